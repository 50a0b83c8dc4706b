//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole of the gamma function at {0}")]
    Pole(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge within {terms} terms")]
    Convergence { terms: usize },
    #[error("invalid index: {0}")]
    Index(String),
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("Breitenlohner-Freedman bound violated: m^2 R^2 = {msq_r2} < {bound}")]
    BfViolation { msq_r2: f64, bound: f64 },
    #[error("spatial dimension d = {0} must be odd and >= 3")]
    EvenDimension(u32),
    #[error("C-type modes and the transfer matrix are unavailable for integer nu = {nu}")]
    Capability { nu: f64 },
    #[error("radial window ({0}, {1}) must lie strictly inside (0, pi/2)")]
    Window(f64, f64),
    #[error("the minus branch requires 0 < nu < 1, got nu = {nu}")]
    ExceptionalBranch { nu: f64 },
    #[error("degenerate C basis: |W(Ca, Cb)| = {0:e}")]
    DegenerateBasis(f64),
    #[error("singular point at rho = {rho}")]
    SingularPoint { rho: f64 },
    #[error("finite-difference stencil leaves the open radial interval at rho = {rho}")]
    BoundaryProximity { rho: f64 },
    #[error("only d = 3 is supported for this operation, got d = {0}")]
    UnsupportedDimension(u32),
    #[error("frequency spacing {0} does not divide 1")]
    GridIncompatible(f64),
    #[error("data not band limited: residual {residual:e} exceeds {tol:e}")]
    BandLimitExceeded { residual: f64, tol: f64 },
    #[error("label (k={k}, l={l}, m={m}) sits on a radial node at rho0")]
    RadialNodeError { k: i64, l: u32, m: i32 },
    #[error("label (k={k}, l={l}, m={m}) is at a magic frequency; boundary data is blind to it")]
    MagicFrequencyBlind { k: i64, l: u32, m: i32 },
    #[error("nu = {nu} is an integer; the twisted derivative is undefined")]
    IntegerNu { nu: f64 },
    #[error("representations use different bases or frequency grids")]
    BasisMismatch,
    #[error("projection residual {residual:e} exceeds {tol:e}")]
    ProjectionResidual { residual: f64, tol: f64 },
    #[error("label outside the coefficient table window: {0}")]
    WindowOverflow(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

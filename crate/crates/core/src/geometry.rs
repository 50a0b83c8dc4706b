//! Global AdS parameters, regions, the radial Klein-Gordon operator, Killing
//! vector fields as finite-difference operators and flat-limit rescalings.

use crate::error::{Error, Result};
use crate::quadrature::AngularGrid;
use crate::specfun::SeriesPolicy;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Spatial dimension, curvature radius and mass, with derived nu and Delta_{+-}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdsParams {
    pub d: u32,
    pub r: f64,
    pub m_sq: f64,
    pub nu: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub policy: SeriesPolicy,
}

impl AdsParams {
    pub fn new(d: u32, r: f64, m_sq: f64) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::EvenDimension(d));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("curvature radius R = {r} must be positive")));
        }
        let dh = d as f64 / 2.0;
        let msq_r2 = m_sq * r * r;
        if msq_r2 < -dh * dh {
            return Err(Error::BfViolation { msq_r2, bound: -dh * dh });
        }
        let nu = (dh * dh + msq_r2).sqrt();
        Ok(AdsParams { d, r, m_sq, nu, delta_plus: dh + nu, delta_minus: dh - nu, policy: SeriesPolicy::default() })
    }

    pub fn with_policy(mut self, policy: SeriesPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Dimensionless mass parameter m^2 R^2.
    pub fn msq_r2(&self) -> f64 {
        self.m_sq * self.r * self.r
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    /// True unless nu lies within 1e-9 of an integer.
    pub fn c_modes_valid(&self) -> bool {
        (self.nu - self.nu.round()).abs() > 1e-9
    }

    /// True for 0 < nu < 1, where the minus-branch Jacobi modes exist.
    pub fn exceptional_range(&self) -> bool {
        self.nu > 0.0 && self.nu < 1.0
    }

    pub fn require_c_modes(&self) -> Result<()> {
        if self.c_modes_valid() {
            Ok(())
        } else {
            Err(Error::Capability { nu: self.nu })
        }
    }

    pub fn require_d3(&self) -> Result<()> {
        if self.d == 3 {
            Ok(())
        } else {
            Err(Error::UnsupportedDimension(self.d))
        }
    }
}

/// Convenience constructor mirroring `AdsParams::new`.
pub fn make_params(d: u32, r: f64, m_sq: f64) -> Result<AdsParams> {
    AdsParams::new(d, r, m_sq)
}

/// Spacetime regions bounded by equal-time or equal-radius hypersurfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Slice { t1: f64, t2: f64 },
    Rod { rho0: f64 },
    Tube { rho1: f64, rho2: f64 },
}

impl Region {
    pub fn slice(t1: f64, t2: f64) -> Result<Self> {
        if t1 < t2 {
            Ok(Region::Slice { t1, t2 })
        } else {
            Err(Error::InvalidParameter(format!("slice needs t1 < t2, got ({t1}, {t2})")))
        }
    }

    pub fn rod(rho0: f64) -> Result<Self> {
        if rho0 > 0.0 && rho0 < FRAC_PI_2 {
            Ok(Region::Rod { rho0 })
        } else {
            Err(Error::InvalidParameter(format!("rod radius {rho0} outside (0, pi/2)")))
        }
    }

    pub fn tube(rho1: f64, rho2: f64) -> Result<Self> {
        if rho1 > 0.0 && rho1 < rho2 && rho2 <= FRAC_PI_2 {
            Ok(Region::Tube { rho1, rho2 })
        } else {
            Err(Error::InvalidParameter(format!("tube needs 0 < rho1 < rho2 <= pi/2, got ({rho1}, {rho2})")))
        }
    }
}

/// A point (t, rho, xi) with xi a unit vector in R^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub rho: f64,
    pub xi: [f64; 3],
}

impl SpacetimePoint {
    pub fn new(t: f64, rho: f64, xi: [f64; 3]) -> Self {
        SpacetimePoint { t, rho, xi: normalize(xi) }
    }

    pub fn from_angles(t: f64, rho: f64, theta: f64, phi: f64) -> Self {
        SpacetimePoint { t, rho, xi: crate::harmonics::unit_vector(theta, phi) }
    }

    pub fn angles(&self) -> (f64, f64) {
        crate::harmonics::angles_of(self.xi)
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Complex field values on a (t, rho, theta, phi) product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub t_nodes: Vec<f64>,
    pub rho_nodes: Vec<f64>,
    pub angular: AngularGrid,
    /// Row-major in (t, rho, theta, phi).
    pub values: Vec<Complex64>,
}

impl FieldGrid {
    pub fn new(t_nodes: Vec<f64>, rho_nodes: Vec<f64>, angular: AngularGrid, values: Vec<Complex64>) -> Result<Self> {
        let n = t_nodes.len() * rho_nodes.len() * angular.len();
        if values.len() != n {
            return Err(Error::InvalidParameter(format!("value tensor has {} entries, grid needs {n}", values.len())));
        }
        if rho_nodes.iter().any(|&r| !(0.0..FRAC_PI_2).contains(&r)) {
            return Err(Error::InvalidParameter("radial nodes must lie in [0, pi/2)".into()));
        }
        Ok(FieldGrid { t_nodes, rho_nodes, angular, values })
    }

    /// Samples a field on the grid.
    pub fn sample(t_nodes: Vec<f64>, rho_nodes: Vec<f64>, angular: AngularGrid, f: impl Fn(&SpacetimePoint) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(t_nodes.len() * rho_nodes.len() * angular.len());
        for &t in &t_nodes {
            for &rho in &rho_nodes {
                for (th, ph, _) in angular.nodes() {
                    values.push(f(&SpacetimePoint::from_angles(t, rho, th, ph)));
                }
            }
        }
        FieldGrid::new(t_nodes, rho_nodes, angular, values)
    }

    pub fn index(&self, it: usize, ir: usize, ia: usize) -> usize {
        (it * self.rho_nodes.len() + ir) * self.angular.len() + ia
    }

    pub fn get(&self, it: usize, ir: usize, ia: usize) -> Complex64 {
        self.values[self.index(it, ir, ia)]
    }
}

fn d1_stencil(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn d2_stencil(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

/// Max residual of the radial Klein-Gordon equation
/// cos^2 f'' + (d-1)/tan f' + (w^2 cos^2 - l(l+d-2)/tan^2 - m^2R^2) f
/// over a uniform sub-grid of the window, normalized by max|f|.
pub fn kg_residual(radial_fn: impl Fn(f64) -> f64, omega: f64, l: u32, params: &AdsParams, rho_window: (f64, f64)) -> Result<f64> {
    let (a, b) = rho_window;
    let h = 1e-4;
    if !(a - 2.0 * h > 0.0 && b + 2.0 * h < FRAC_PI_2 && a < b) {
        return Err(Error::Window(a, b));
    }
    let n = 101;
    let d = params.dim();
    let ll = (l as f64) * (l as f64 + d - 2.0);
    let mut max_res: f64 = 0.0;
    let mut max_f: f64 = 0.0;
    for i in 0..n {
        let rho = a + (b - a) * i as f64 / (n - 1) as f64;
        let f = radial_fn(rho);
        let c = rho.cos();
        let tn = rho.tan();
        let res = c * c * d2_stencil(&radial_fn, rho, h) + (d - 1.0) / tn * d1_stencil(&radial_fn, rho, h)
            + (omega * omega * c * c - ll / (tn * tn) - params.msq_r2()) * f;
        max_res = max_res.max(res.abs());
        max_f = max_f.max(f.abs());
    }
    Ok(max_res / max_f)
}

/// Killing vector fields of AdS_{1,3}, labelled as K_{AB} with A, B in
/// {0, 1, 2, 3, 4 = d+1}. Spatial indices run over 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorId {
    /// K_{d+1,0} = d/dt.
    TimeTranslation,
    /// K_{jk}.
    Rotation(usize, usize),
    /// K_{0j}.
    Boost0(usize),
    /// K_{d+1,j}.
    BoostD1(usize),
}

const D1: usize = 4;

fn eta(a: usize, b: usize) -> f64 {
    if a != b {
        0.0
    } else if a == 0 || a == D1 {
        -1.0
    } else {
        1.0
    }
}

impl GeneratorId {
    fn validate(&self) -> Result<()> {
        let ok = |j: usize| (1..=3).contains(&j);
        let valid = match *self {
            GeneratorId::TimeTranslation => true,
            GeneratorId::Rotation(j, k) => ok(j) && ok(k) && j != k,
            GeneratorId::Boost0(j) | GeneratorId::BoostD1(j) => ok(j),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Index(format!("invalid generator {self:?}")))
        }
    }

    /// Index pair (A, B) with this generator equal to K_{AB}.
    pub fn pair(&self) -> (usize, usize) {
        match *self {
            GeneratorId::TimeTranslation => (D1, 0),
            GeneratorId::Rotation(j, k) => (j, k),
            GeneratorId::Boost0(j) => (0, j),
            GeneratorId::BoostD1(j) => (D1, j),
        }
    }

    /// K_{AB} as sign times a generator; None for A == B.
    pub fn from_pair(a: usize, b: usize) -> Option<(f64, GeneratorId)> {
        if a == b {
            return None;
        }
        let (s, a, b) = match (a, b) {
            (0, _) | (D1, _) => (1.0, a, b),
            (_, 0) | (_, D1) => (-1.0, b, a),
            _ if a < b => (1.0, a, b),
            _ => (-1.0, b, a),
        };
        let g = match (a, b) {
            (D1, 0) => GeneratorId::TimeTranslation,
            (0, D1) => return Some((-s, GeneratorId::TimeTranslation)),
            (0, j) => GeneratorId::Boost0(j),
            (D1, j) => GeneratorId::BoostD1(j),
            (j, k) => GeneratorId::Rotation(j, k),
        };
        Some((s, g))
    }
}

/// Lie bracket [K_a, K_b] as a linear combination of generators, from
/// [K_AB, K_CD] = -eta_AC K_BD + eta_BC K_AD - eta_BD K_AC + eta_AD K_BC.
pub fn bracket(a: GeneratorId, b: GeneratorId) -> Vec<(f64, GeneratorId)> {
    let (pa, pb) = a.pair();
    let (pc, pd) = b.pair();
    let terms = [
        (-eta(pa, pc), pb, pd),
        (eta(pb, pc), pa, pd),
        (-eta(pb, pd), pa, pc),
        (eta(pa, pd), pb, pc),
    ];
    let mut out: Vec<(f64, GeneratorId)> = Vec::new();
    for (c, x, y) in terms {
        if c == 0.0 {
            continue;
        }
        if let Some((s, g)) = GeneratorId::from_pair(x, y) {
            match out.iter_mut().find(|(_, h)| *h == g) {
                Some(entry) => entry.0 += c * s,
                None => out.push((c * s, g)),
            }
        }
    }
    out.retain(|(c, _)| *c != 0.0);
    out
}

/// Components of a vector field: d/dt, d/drho and a tangent vector on S^2
/// acting on the degree-zero extension of the angular dependence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorComponents {
    pub dt: f64,
    pub drho: f64,
    pub tangent: [f64; 3],
}

fn projected(j: usize, xi: &[f64; 3], scale: f64) -> [f64; 3] {
    let mut v = [0.0; 3];
    for (i, vi) in v.iter_mut().enumerate() {
        let e = if i == j - 1 { 1.0 } else { 0.0 };
        *vi = scale * (e - xi[j - 1] * xi[i]);
    }
    v
}

/// Analytic component functions of the AdS Killing vectors.
pub fn killing_components(gen: GeneratorId, p: &SpacetimePoint) -> Result<VectorComponents> {
    gen.validate()?;
    let (st, ct) = p.t.sin_cos();
    let (sr, cr) = p.rho.sin_cos();
    let xi = &p.xi;
    Ok(match gen {
        GeneratorId::TimeTranslation => VectorComponents { dt: 1.0, drho: 0.0, tangent: [0.0; 3] },
        GeneratorId::Rotation(j, k) => {
            let mut v = [0.0; 3];
            v[k - 1] += xi[j - 1];
            v[j - 1] -= xi[k - 1];
            VectorComponents { dt: 0.0, drho: 0.0, tangent: v }
        }
        GeneratorId::Boost0(j) => VectorComponents {
            dt: -xi[j - 1] * ct * sr,
            drho: -xi[j - 1] * st * cr,
            tangent: projected(j, xi, -st / sr),
        },
        GeneratorId::BoostD1(j) => VectorComponents {
            dt: -xi[j - 1] * st * sr,
            drho: xi[j - 1] * ct * cr,
            tangent: projected(j, xi, ct / sr),
        },
    })
}

/// Finite-difference step shared by all Killing operators.
pub const KILLING_STEP: f64 = 1e-3;

fn fd_c(f: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// Applies a first-order operator with the given components at a point,
/// derivatives by 4th-order central differences with step h.
pub fn apply_components(c: &VectorComponents, field: &dyn Fn(&SpacetimePoint) -> Complex64, p: &SpacetimePoint, h: f64) -> Complex64 {
    let mut out = Complex64::new(0.0, 0.0);
    if c.dt != 0.0 {
        out += c.dt * fd_c(|s| field(&SpacetimePoint { t: p.t + s, ..*p }), h);
    }
    if c.drho != 0.0 {
        out += c.drho * fd_c(|s| field(&SpacetimePoint { rho: p.rho + s, ..*p }), h);
    }
    if c.tangent.iter().any(|&v| v != 0.0) {
        let v = c.tangent;
        out += fd_c(
            |s| {
                let xi = normalize([p.xi[0] + s * v[0], p.xi[1] + s * v[1], p.xi[2] + s * v[2]]);
                field(&SpacetimePoint { xi, ..*p })
            },
            h,
        );
    }
    out
}

fn check_margin(gen: GeneratorId, rho: f64, margin: f64) -> Result<()> {
    let radial = matches!(gen, GeneratorId::Boost0(_) | GeneratorId::BoostD1(_));
    if radial && !(rho - margin > 0.0 && rho + margin < FRAC_PI_2) {
        return Err(Error::BoundaryProximity { rho });
    }
    Ok(())
}

/// (K phi)(p) for a smooth field given as a closure.
pub fn killing_apply(gen: GeneratorId, field: &dyn Fn(&SpacetimePoint) -> Complex64, p: &SpacetimePoint) -> Result<Complex64> {
    check_margin(gen, p.rho, 2.0 * KILLING_STEP)?;
    let c = killing_components(gen, p)?;
    Ok(apply_components(&c, field, p, KILLING_STEP))
}

/// Max over the sample points of |[K_a, K_b] phi - (bracket table) phi|.
pub fn verify_lie_bracket(a: GeneratorId, b: GeneratorId, field: &dyn Fn(&SpacetimePoint) -> Complex64, points: &[SpacetimePoint]) -> Result<f64> {
    let margin = 4.0 * KILLING_STEP;
    for p in points {
        check_margin(a, p.rho, margin)?;
        check_margin(b, p.rho, margin)?;
        check_margin(GeneratorId::Boost0(1), p.rho, margin)?;
    }
    let rhs_terms = bracket(a, b);
    let mut max_dev: f64 = 0.0;
    for p in points {
        let kb = |q: &SpacetimePoint| killing_apply(b, field, q).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let ka = |q: &SpacetimePoint| killing_apply(a, field, q).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let lhs = killing_apply(a, &kb, p)? - killing_apply(b, &ka, p)?;
        let mut rhs = Complex64::new(0.0, 0.0);
        for &(c, g) in &rhs_terms {
            rhs += c * killing_apply(g, field, p)?;
        }
        max_dev = max_dev.max((lhs - rhs).norm());
    }
    if max_dev.is_nan() {
        return Err(Error::BoundaryProximity { rho: f64::NAN });
    }
    Ok(max_dev)
}

/// Integrates the flow of a Killing vector for parameter lambda with RK4.
pub fn killing_flow(gen: GeneratorId, p: &SpacetimePoint, lambda: f64, steps: usize) -> Result<SpacetimePoint> {
    gen.validate()?;
    let h = lambda / steps as f64;
    let rhs = |y: [f64; 5]| -> Result<[f64; 5]> {
        let q = SpacetimePoint { t: y[0], rho: y[1], xi: [y[2], y[3], y[4]] };
        let c = killing_components(gen, &q)?;
        Ok([c.dt, c.drho, c.tangent[0], c.tangent[1], c.tangent[2]])
    };
    let add = |y: [f64; 5], k: [f64; 5], s: f64| -> [f64; 5] { [0, 1, 2, 3, 4].map(|i| y[i] + s * k[i]) };
    let mut y = [p.t, p.rho, p.xi[0], p.xi[1], p.xi[2]];
    for _ in 0..steps {
        let k1 = rhs(y)?;
        let k2 = rhs(add(y, k1, h / 2.0))?;
        let k3 = rhs(add(y, k2, h / 2.0))?;
        let k4 = rhs(add(y, k3, h))?;
        y = [0, 1, 2, 3, 4].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let xi = normalize([y[2], y[3], y[4]]);
        y[2] = xi[0];
        y[3] = xi[1];
        y[4] = xi[2];
    }
    Ok(SpacetimePoint { t: y[0], rho: y[1], xi: [y[2], y[3], y[4]] })
}

/// Rescaled coordinates tau = R t, r = R rho.
pub fn flat_rescale(params: &AdsParams, t: f64, rho: f64) -> (f64, f64) {
    (params.r * t, params.r * rho)
}

/// Inverse of `flat_rescale`.
pub fn flat_unscale(params: &AdsParams, tau: f64, r: f64) -> (f64, f64) {
    (tau / params.r, r / params.r)
}

/// Rescaled frequency and momenta attached to a dimensionless frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatLabels {
    pub omega_tilde: f64,
    pub p_r: f64,
    pub p_tilde: f64,
}

pub fn flat_labels(params: &AdsParams, omega: f64) -> FlatLabels {
    let p_r = (omega * omega - params.msq_r2()).abs().sqrt();
    FlatLabels { omega_tilde: omega / params.r, p_r, p_tilde: p_r / params.r }
}

/// Point in rescaled Minkowski-like coordinates (tau, r, xi).
pub type FlatPoint = SpacetimePoint;

/// AdS Killing vector in (tau, r) coordinates, scaled as in the flat-limit
/// correspondence: R^{-1} K_{d+1,0}, R^{-1} K_{d+1,j}, K_{jk}, K_{0j}.
pub fn rescaled_killing_components(gen: GeneratorId, r_ads: f64, p: &FlatPoint) -> Result<VectorComponents> {
    let ads = SpacetimePoint { t: p.t / r_ads, rho: p.rho / r_ads, xi: p.xi };
    let c = killing_components(gen, &ads)?;
    // d/dt = R d/dtau and d/drho = R d/dr.
    let s = match gen {
        GeneratorId::TimeTranslation | GeneratorId::BoostD1(_) => 1.0 / r_ads,
        _ => 1.0,
    };
    Ok(VectorComponents { dt: s * r_ads * c.dt, drho: s * r_ads * c.drho, tangent: c.tangent.map(|v| s * v) })
}

/// Minkowski Killing vectors T_0, T_j, K_{jk}, K_{0j} in spherical coordinates,
/// labelled by their AdS counterparts.
pub fn minkowski_killing_components(gen: GeneratorId, p: &FlatPoint) -> Result<VectorComponents> {
    gen.validate()?;
    let (tau, r, xi) = (p.t, p.rho, &p.xi);
    Ok(match gen {
        GeneratorId::TimeTranslation => VectorComponents { dt: 1.0, drho: 0.0, tangent: [0.0; 3] },
        GeneratorId::Rotation(_, _) => killing_components(gen, p)?,
        GeneratorId::BoostD1(j) => VectorComponents { dt: 0.0, drho: xi[j - 1], tangent: projected(j, xi, 1.0 / r) },
        GeneratorId::Boost0(j) => VectorComponents {
            dt: -xi[j - 1] * r,
            drho: -xi[j - 1] * tau,
            tangent: projected(j, xi, -tau / r),
        },
    })
}

/// Max deviation between the rescaled AdS Killing operator and its
/// Minkowski counterpart, applied to a field of (tau, r, xi).
pub fn flat_killing_deviation(gen: GeneratorId, r_ads: f64, field: &dyn Fn(&FlatPoint) -> Complex64, points: &[FlatPoint]) -> Result<f64> {
    let mut dev: f64 = 0.0;
    for p in points {
        let a = apply_components(&rescaled_killing_components(gen, r_ads, p)?, field, p, KILLING_STEP);
        let b = apply_components(&minkowski_killing_components(gen, p)?, field, p, KILLING_STEP);
        dev = dev.max((a - b).norm());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{sph_harm, AngularLabel};

    fn params() -> AdsParams {
        AdsParams::new(3, 1.0, 0.0).unwrap()
    }

    #[test]
    fn params_examples() {
        let p = params();
        assert_eq!((p.nu, p.delta_plus, p.delta_minus), (1.5, 3.0, 0.0));
        let q = AdsParams::new(3, 1.0, -2.0).unwrap();
        assert!((q.nu - 0.5).abs() < 1e-15 && (q.delta_minus - 1.0).abs() < 1e-15 && q.exceptional_range());
        assert!(!p.exceptional_range());
        assert!(matches!(AdsParams::new(3, 1.0, -2.3), Err(Error::BfViolation { .. })));
        assert!(matches!(AdsParams::new(4, 1.0, 0.0), Err(Error::EvenDimension(4))));
        let int_nu = AdsParams::new(3, 1.0, 7.0 / 4.0).unwrap();
        assert!((int_nu.nu - 2.0).abs() < 1e-15 && !int_nu.c_modes_valid());
        assert!(matches!(int_nu.require_c_modes(), Err(Error::Capability { .. })));
    }

    #[test]
    fn params_identities() {
        for &(d, r, m) in &[(3u32, 1.0, 0.0), (3, 2.0, -0.5), (5, 1.5, 3.3), (7, 0.7, -20.0)] {
            let p = AdsParams::new(d, r, m).unwrap();
            assert!((p.delta_plus * p.delta_minus + p.msq_r2()).abs() < 1e-12);
            assert!((p.delta_plus + p.delta_minus - d as f64).abs() < 1e-12);
            assert!((p.delta_plus - p.delta_minus - 2.0 * p.nu).abs() < 1e-12);
        }
    }

    #[test]
    fn regions_validate() {
        assert!(Region::slice(0.0, 1.0).is_ok() && Region::slice(1.0, 1.0).is_err());
        assert!(Region::rod(0.5).is_ok() && Region::rod(FRAC_PI_2).is_err());
        assert!(Region::tube(0.2, FRAC_PI_2).is_ok() && Region::tube(0.4, 0.3).is_err());
    }

    #[test]
    fn kg_residual_rejects_non_solution() {
        let p = AdsParams::new(3, 1.0, 1.0).unwrap();
        let r = kg_residual(|_| 1.0, 0.0, 0, &p, (0.2, 1.2)).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        assert!(matches!(kg_residual(|_| 1.0, 0.0, 0, &p, (0.0, 1.0)), Err(Error::Window(..))));
    }

    #[test]
    fn flat_rescale_examples() {
        let p = AdsParams::new(3, 10.0, 0.0).unwrap();
        let (tau, r) = flat_rescale(&p, 0.1, 0.05);
        assert!((tau - 1.0).abs() < 1e-15 && (r - 0.5).abs() < 1e-15);
        let (t, rho) = flat_unscale(&p, tau, r);
        assert!((t - 0.1).abs() < 1e-15 && (rho - 0.05).abs() < 1e-15);
        let q = AdsParams::new(3, 100.0, 1.0).unwrap();
        assert_eq!(flat_labels(&q, 100.0).p_r, 0.0);
        let fl = flat_labels(&q, 150.0);
        assert!((fl.omega_tilde - 1.5).abs() < 1e-15);
        assert!((fl.p_tilde - 1.25f64.sqrt()).abs() < 1e-13);
    }

    fn test_field(p: &SpacetimePoint) -> Complex64 {
        let (th, ph) = p.angles();
        let y1 = sph_harm(AngularLabel::new(1, 1).unwrap(), th, ph).unwrap();
        let y2 = sph_harm(AngularLabel::new(2, 0).unwrap(), th, ph).unwrap();
        let env = (-(p.t - 0.2).powi(2)).exp() * p.rho.sin() * p.rho.cos().powi(2);
        env * (Complex64::from_polar(1.0, -1.7 * p.t) * y1 + 0.5 * p.rho * y2)
    }

    fn sample_points(n: usize) -> Vec<SpacetimePoint> {
        (0..n)
            .map(|i| {
                let x = i as f64;
                SpacetimePoint::from_angles(-0.8 + 0.09 * x, 0.2 + 0.055 * x, 0.3 + 0.13 * x, 0.7 * x)
            })
            .collect()
    }

    #[test]
    fn time_translation_of_a_phase() {
        let omega = 2.3;
        let f = |p: &SpacetimePoint| Complex64::from_polar(p.rho.sin() * (1.0 + p.xi[2]), -omega * p.t);
        for p in sample_points(5) {
            let v = killing_apply(GeneratorId::TimeTranslation, &f, &p).unwrap();
            let exact = Complex64::new(0.0, -omega) * f(&p);
            assert!((v - exact).norm() < 1e-8 * exact.norm());
        }
        let g = |p: &SpacetimePoint| Complex64::new(p.rho.cos() * p.xi[0], 0.0);
        for p in sample_points(5) {
            assert!(killing_apply(GeneratorId::TimeTranslation, &g, &p).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn boost_near_boundary_is_rejected() {
        let p = SpacetimePoint::from_angles(0.0, FRAC_PI_2 - 1e-3, 1.0, 0.0);
        assert!(matches!(killing_apply(GeneratorId::Boost0(3), &test_field, &p), Err(Error::BoundaryProximity { .. })));
        let q = SpacetimePoint::from_angles(0.0, 1e-3, 1.0, 0.0);
        assert!(matches!(killing_apply(GeneratorId::BoostD1(1), &test_field, &q), Err(Error::BoundaryProximity { .. })));
    }

    #[test]
    fn boosts_are_tangent_to_the_boundary() {
        for i in 0..10 {
            let p = SpacetimePoint::from_angles(0.37 * i as f64, FRAC_PI_2, 0.2 + 0.25 * i as f64, 0.5 * i as f64);
            for j in 1..=3 {
                assert!(killing_components(GeneratorId::Boost0(j), &p).unwrap().drho.abs() < 1e-15);
                assert!(killing_components(GeneratorId::BoostD1(j), &p).unwrap().drho.abs() < 1e-15);
            }
        }
    }

    fn all_generators() -> Vec<GeneratorId> {
        let mut g = vec![GeneratorId::TimeTranslation];
        for j in 1..=3 {
            g.push(GeneratorId::Boost0(j));
            g.push(GeneratorId::BoostD1(j));
            for k in (j + 1)..=3 {
                g.push(GeneratorId::Rotation(j, k));
            }
        }
        g
    }

    #[test]
    fn bracket_table_entries() {
        use GeneratorId::*;
        let one = |g| vec![(1.0, g)];
        let neg = |g| vec![(-1.0, g)];
        assert!(bracket(TimeTranslation, Rotation(1, 2)).is_empty());
        // [K_{0j}, K_{0k}] = -K_{kj} = K_{jk}
        assert_eq!(bracket(Boost0(1), Boost0(2)), one(Rotation(1, 2)));
        // [K_{0q}, K_{jk}] = eta_jq K_{0k} - eta_kq K_{0j}
        assert_eq!(bracket(Boost0(1), Rotation(1, 2)), one(Boost0(2)));
        assert_eq!(bracket(BoostD1(2), BoostD1(3)), one(Rotation(2, 3)));
        assert_eq!(bracket(TimeTranslation, Boost0(2)), neg(BoostD1(2)));
        assert_eq!(bracket(BoostD1(3), Rotation(1, 3)), neg(BoostD1(1)));
        assert_eq!(bracket(BoostD1(2), TimeTranslation), neg(Boost0(2)));
        assert_eq!(bracket(Boost0(3), BoostD1(3)), one(TimeTranslation));
        assert!(bracket(Boost0(1), BoostD1(3)).is_empty());
        assert_eq!(bracket(Rotation(1, 2), Rotation(2, 3)), one(Rotation(1, 3)));
        for a in all_generators() {
            assert!(bracket(a, a).is_empty());
            for b in all_generators() {
                let ab = bracket(a, b);
                let ba = bracket(b, a);
                assert_eq!(ab.len(), ba.len());
                for (c, g) in ab {
                    assert!(ba.contains(&(-c, g)));
                }
            }
        }
    }

    #[test]
    fn lie_brackets_match_table() {
        let pts = sample_points(20);
        let gens = all_generators();
        let mut worst: f64 = 0.0;
        for (i, &a) in gens.iter().enumerate() {
            for &b in gens.iter().skip(i) {
                let dev = verify_lie_bracket(a, b, &test_field, &pts).unwrap();
                worst = worst.max(dev);
            }
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn flow_is_first_order_consistent() {
        let p = SpacetimePoint::from_angles(0.3, 0.7, 1.1, 0.4);
        for g in all_generators() {
            let eps = 1e-4;
            let q = killing_flow(g, &p, eps, 4).unwrap();
            let lin = (test_field(&q) - test_field(&p)) / eps;
            let k = killing_apply(g, &test_field, &p).unwrap();
            assert!((lin - k).norm() < 1e-3, "{g:?}");
        }
        let q = killing_flow(GeneratorId::TimeTranslation, &p, 0.5, 10).unwrap();
        assert!((q.t - 0.8).abs() < 1e-14 && q.rho == p.rho);
    }

    #[test]
    fn flat_killing_correspondence() {
        let field = |p: &FlatPoint| {
            let x = [p.rho * p.xi[0] - 0.3, p.rho * p.xi[1], p.rho * p.xi[2] - 1.0];
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            Complex64::from_polar((-(p.t - 0.5).powi(2) - r2).exp(), 0.8 * x[0])
        };
        let pts: Vec<FlatPoint> = (0..10).map(|i| SpacetimePoint::from_angles(0.1 * i as f64, 0.5 + 0.2 * i as f64, 0.4 + 0.2 * i as f64, 0.6 * i as f64)).collect();
        let tt = flat_killing_deviation(GeneratorId::TimeTranslation, 100.0, &field, &pts).unwrap();
        assert!(tt < 1e-12);
        for g in [GeneratorId::BoostD1(1), GeneratorId::BoostD1(3), GeneratorId::Boost0(2), GeneratorId::Boost0(3)] {
            let e2 = flat_killing_deviation(g, 100.0, &field, &pts).unwrap();
            let e3 = flat_killing_deviation(g, 1000.0, &field, &pts).unwrap();
            let ratio = e2 / e3;
            assert!((50.0..=200.0).contains(&ratio), "{g:?} ratio {ratio}");
        }
    }
}

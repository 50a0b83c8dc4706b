//! Radial mode functions S^a, S^b, C^a, C^b and J^{+-}, magic frequencies,
//! normalization constants, Wronskians, the S <-> C transfer matrix and full
//! spacetime modes.
//!
//! Each radial kind is `sign * sin^p cos^q 2F1(alpha, beta; gamma; g)` with
//! `g = sin^2` for S kinds and `g = cos^2` for C kinds. The series is summed
//! directly when `g` is below the policy cutoff or the series terminates;
//! otherwise the value is obtained from the other basis through the transfer
//! matrix evaluated at rho = pi/4.

use crate::error::{Error, Result};
use crate::geometry::{AdsParams, SpacetimePoint};
use crate::harmonics::{sph_harm, AngularLabel};
use crate::specfun::{hyp2f1_with_derivative, jacobi_p, jacobi_p_deriv, ln_gamma, nonpositive_integer};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RadialKind {
    Sa,
    Sb,
    Ca,
    Cb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Plus,
    Minus,
}

/// Continuous-frequency mode label used on tube and rod regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeLabel {
    pub omega: f64,
    pub l: u32,
    pub m: i32,
}

/// Discrete Jacobi mode label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SliceLabel {
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub fn hyper_params(kind: RadialKind, omega: f64, l: u32, params: &AdsParams) -> Result<HyperParams> {
    let l = l as f64;
    let alpha = (l + params.delta_plus - omega) / 2.0;
    let beta = (l + params.delta_plus + omega) / 2.0;
    let gamma_s = l + params.dim() / 2.0;
    let gamma_c = 1.0 + params.nu;
    let b_kind = |g: f64| HyperParams { alpha: alpha - g + 1.0, beta: beta - g + 1.0, gamma: 2.0 - g };
    Ok(match kind {
        RadialKind::Sa => HyperParams { alpha, beta, gamma: gamma_s },
        RadialKind::Sb => b_kind(gamma_s),
        RadialKind::Ca => {
            params.require_c_modes()?;
            HyperParams { alpha, beta, gamma: gamma_c }
        }
        RadialKind::Cb => {
            params.require_c_modes()?;
            b_kind(gamma_c)
        }
    })
}

/// Prefactor structure of a radial kind.
struct Form {
    sign: f64,
    p: f64,
    q: f64,
    sin_arg: bool,
}

fn form(kind: RadialKind, l: u32, params: &AdsParams) -> Form {
    let l = l as f64;
    match kind {
        RadialKind::Sa => Form { sign: 1.0, p: l, q: params.delta_plus, sin_arg: true },
        RadialKind::Sb => Form { sign: -1.0, p: 2.0 - l - params.dim(), q: params.delta_plus, sin_arg: true },
        RadialKind::Ca => Form { sign: 1.0, p: l, q: params.delta_plus, sin_arg: false },
        RadialKind::Cb => Form { sign: 1.0, p: l, q: params.delta_minus, sin_arg: false },
    }
}

fn terminates(h: &HyperParams) -> bool {
    nonpositive_integer(h.alpha, 1e-10).is_some() || nonpositive_integer(h.beta, 1e-10).is_some()
}

/// Value and rho-derivative of sin^p cos^q, times a smooth factor F with
/// derivative dF/drho.
fn with_prefactor(p: f64, q: f64, rho: f64, f: f64, df: f64) -> (f64, f64) {
    let (s, c) = rho.sin_cos();
    let pre = s.powf(p) * c.powf(q);
    let mut dpre = 0.0;
    if p != 0.0 {
        dpre += p * s.powf(p - 1.0) * c.powf(q + 1.0);
    }
    if q != 0.0 {
        dpre -= q * s.powf(p + 1.0) * c.powf(q - 1.0);
    }
    (pre * f, dpre * f + pre * df)
}

fn direct(kind: RadialKind, omega: f64, l: u32, rho: f64, params: &AdsParams) -> Result<(f64, f64)> {
    let h = hyper_params(kind, omega, l, params)?;
    let fm = form(kind, l, params);
    let (s, c) = rho.sin_cos();
    let (g, dg) = if fm.sin_arg { (s * s, 2.0 * s * c) } else { (c * c, -2.0 * s * c) };
    let (f, df) = hyp2f1_with_derivative(h.alpha, h.beta, h.gamma, g, &params.policy)?;
    let (v, dv) = with_prefactor(fm.p, fm.q, rho, f, df * dg);
    Ok((fm.sign * v, fm.sign * dv))
}

fn direct_allowed(kind: RadialKind, omega: f64, l: u32, rho: f64, params: &AdsParams) -> Result<bool> {
    let h = hyper_params(kind, omega, l, params)?;
    if terminates(&h) {
        return Ok(true);
    }
    let g = if form(kind, l, params).sin_arg { rho.sin().powi(2) } else { rho.cos().powi(2) };
    Ok(g <= params.policy.arg_cutoff)
}

/// Entries of S^a = m11 C^a + m12 C^b, S^b = m21 C^a + m22 C^b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl TransferMatrix {
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// (S^a, S^b) from (C^a, C^b).
    pub fn apply(&self, ca: f64, cb: f64) -> (f64, f64) {
        (self.m11 * ca + self.m12 * cb, self.m21 * ca + self.m22 * cb)
    }

    /// (C^a, C^b) from (S^a, S^b).
    pub fn apply_inverse(&self, sa: f64, sb: f64) -> (f64, f64) {
        let det = self.det();
        ((self.m22 * sa - self.m12 * sb) / det, (-self.m21 * sa + self.m11 * sb) / det)
    }
}

fn wronskian_of(params: &AdsParams, rho: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    rho.tan().powi(params.d as i32 - 1) * (a.0 * b.1 - b.0 * a.1)
}

pub fn transfer_matrix(omega: f64, l: u32, params: &AdsParams) -> Result<TransferMatrix> {
    params.require_c_modes()?;
    let rho = FRAC_PI_4;
    let sa = direct(RadialKind::Sa, omega, l, rho, params)?;
    let sb = direct(RadialKind::Sb, omega, l, rho, params)?;
    let ca = direct(RadialKind::Ca, omega, l, rho, params)?;
    let cb = direct(RadialKind::Cb, omega, l, rho, params)?;
    let w = |a, b| wronskian_of(params, rho, a, b);
    let wcc = w(ca, cb);
    if wcc.abs() < 1e-12 {
        return Err(Error::DegenerateBasis(wcc.abs()));
    }
    Ok(TransferMatrix { m11: w(sa, cb) / wcc, m12: -w(sa, ca) / wcc, m21: w(sb, cb) / wcc, m22: -w(sb, ca) / wcc })
}

/// Evaluates all radial kinds at fixed (omega, l), computing the transfer
/// matrix at most once.
#[derive(Debug, Clone)]
pub struct RadialSet {
    pub omega: f64,
    pub l: u32,
    params: AdsParams,
    transfer: Option<TransferMatrix>,
}

impl RadialSet {
    pub fn new(omega: f64, l: u32, params: &AdsParams) -> Self {
        RadialSet { omega, l, params: *params, transfer: None }
    }

    fn transfer(&mut self) -> Result<TransferMatrix> {
        if let Some(m) = self.transfer {
            return Ok(m);
        }
        let m = transfer_matrix(self.omega, self.l, &self.params)?;
        self.transfer = Some(m);
        Ok(m)
    }

    /// Value and first derivative of a radial kind at rho.
    pub fn eval(&mut self, kind: RadialKind, rho: f64) -> Result<(f64, f64)> {
        let (w, l, p) = (self.omega, self.l, self.params);
        if rho == 0.0 && kind != RadialKind::Sa {
            let h = hyper_params(kind, w, l, &p)?;
            if kind == RadialKind::Sb || !terminates(&h) {
                return Err(Error::SingularPoint { rho });
            }
        }
        if direct_allowed(kind, w, l, rho, &p)? {
            return direct(kind, w, l, rho, &p);
        }
        let m = self.transfer()?;
        match kind {
            RadialKind::Sa | RadialKind::Sb => {
                let ca = direct(RadialKind::Ca, w, l, rho, &p)?;
                let cb = direct(RadialKind::Cb, w, l, rho, &p)?;
                let (r1, r2) = if kind == RadialKind::Sa { (m.m11, m.m12) } else { (m.m21, m.m22) };
                Ok((r1 * ca.0 + r2 * cb.0, r1 * ca.1 + r2 * cb.1))
            }
            RadialKind::Ca | RadialKind::Cb => {
                let sa = direct(RadialKind::Sa, w, l, rho, &p)?;
                let sb = direct(RadialKind::Sb, w, l, rho, &p)?;
                let (ca, cb) = m.apply_inverse(sa.0, sb.0);
                let (dca, dcb) = m.apply_inverse(sa.1, sb.1);
                Ok(if kind == RadialKind::Ca { (ca, dca) } else { (cb, dcb) })
            }
        }
    }

    pub fn transfer_matrix(&mut self) -> Result<TransferMatrix> {
        self.transfer()
    }
}

pub fn radial_eval(kind: RadialKind, omega: f64, l: u32, rho: f64, params: &AdsParams) -> Result<f64> {
    RadialSet::new(omega, l, params).eval(kind, rho).map(|v| v.0)
}

/// Value and rho-derivative of a radial kind.
pub fn radial_eval_with_deriv(kind: RadialKind, omega: f64, l: u32, rho: f64, params: &AdsParams) -> Result<(f64, f64)> {
    RadialSet::new(omega, l, params).eval(kind, rho)
}

/// Second derivative of any radial solution from the radial equation.
pub fn ode_second_derivative(f: f64, df: f64, omega: f64, l: u32, rho: f64, params: &AdsParams) -> f64 {
    let (c, t) = (rho.cos(), rho.tan());
    let d = params.dim();
    let ll = l as f64 * (l as f64 + d - 2.0);
    -((d - 1.0) / t * df + (omega * omega * c * c - ll / (t * t) - params.msq_r2()) * f) / (c * c)
}

/// tan^{d-1} (f_A f_B' - f_B f_A').
pub fn wronskian(a: RadialKind, b: RadialKind, omega: f64, l: u32, rho: f64, params: &AdsParams) -> Result<f64> {
    let mut set = RadialSet::new(omega, l, params);
    let fa = set.eval(a, rho)?;
    let fb = set.eval(b, rho)?;
    Ok(wronskian_of(params, rho, fa, fb))
}

pub fn magic_frequency(branch: Branch, n: u32, l: u32, params: &AdsParams) -> f64 {
    let delta = match branch {
        Branch::Plus => params.delta_plus,
        Branch::Minus => params.delta_minus,
    };
    2.0 * n as f64 + l as f64 + delta
}

fn branch_nu(branch: Branch, params: &AdsParams) -> Result<f64> {
    match branch {
        Branch::Plus => Ok(params.nu),
        Branch::Minus if params.exceptional_range() => Ok(-params.nu),
        Branch::Minus => Err(Error::ExceptionalBranch { nu: params.nu }),
    }
}

/// n! / (gamma)_n as a running product.
fn factorial_ratio(n: u32, gamma: f64) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (k as f64 + 1.0) / (gamma + k as f64))
}

/// Value and rho-derivative of J^{+-}_{nl}.
pub fn jacobi_radial_with_deriv(branch: Branch, n: u32, l: u32, rho: f64, params: &AdsParams) -> Result<(f64, f64)> {
    let bnu = branch_nu(branch, params)?;
    let gamma = l as f64 + params.dim() / 2.0;
    let delta = params.dim() / 2.0 + bnu;
    let x = (2.0 * rho).cos();
    let c = factorial_ratio(n, gamma);
    let p = jacobi_p(gamma - 1.0, bnu, n, x);
    let dp = jacobi_p_deriv(gamma - 1.0, bnu, n, x) * (-2.0 * (2.0 * rho).sin());
    let (v, dv) = with_prefactor(l as f64, delta, rho, p, dp);
    Ok((c * v, c * dv))
}

pub fn jacobi_radial(branch: Branch, n: u32, l: u32, rho: f64, params: &AdsParams) -> Result<f64> {
    jacobi_radial_with_deriv(branch, n, l, rho, params).map(|v| v.0)
}

/// N_{nl} = n! Gamma(g)^2 Gamma(n +- nu + 1) / (2 w Gamma(n + g) Gamma(n +- nu + g)).
pub fn norm_constant(branch: Branch, n: u32, l: u32, params: &AdsParams) -> Result<f64> {
    let bnu = branch_nu(branch, params)?;
    let gamma = l as f64 + params.dim() / 2.0;
    let b = n as f64 + bnu;
    let ratio = (ln_gamma(gamma)? + ln_gamma(b + 1.0)? - ln_gamma(b + gamma)?).exp();
    Ok(factorial_ratio(n, gamma) * ratio / (2.0 * magic_frequency(branch, n, l, params)))
}

fn harmonic(l: u32, m: i32, p: &SpacetimePoint, params: &AdsParams) -> Result<Complex64> {
    params.require_d3()?;
    let (th, ph) = p.angles();
    sph_harm(AngularLabel::new(l, m)?, th, ph)
}

/// e^{-i w t} Y_l^m radial(rho) for a continuous-frequency label.
pub fn mode_eval_tube(label: &TubeLabel, kind: RadialKind, p: &SpacetimePoint, params: &AdsParams) -> Result<Complex64> {
    let y = harmonic(label.l, label.m, p, params)?;
    let r = radial_eval(kind, label.omega, label.l, p.rho, params)?;
    Ok(Complex64::from_polar(r, -label.omega * p.t) * y)
}

/// e^{-i w t} Y_l^m J_{nl}(rho) at the magic frequency of the label.
pub fn mode_eval_slice(label: &SliceLabel, p: &SpacetimePoint, params: &AdsParams) -> Result<Complex64> {
    let y = harmonic(label.l, label.m, p, params)?;
    let r = jacobi_radial(label.branch, label.n, label.l, p.rho, params)?;
    let w = magic_frequency(label.branch, label.n, label.l, params);
    Ok(Complex64::from_polar(r, -w * p.t) * y)
}

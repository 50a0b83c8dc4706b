//! Klein-Gordon theory on Minkowski space (d = 3) in spherical coordinates:
//! the radial functions jcheck/ncheck, slice and tube expansions, their
//! symplectic structures, and the comparison harness for the flat limit of
//! the AdS expansions.
//!
//! Conventions:
//! - Slice: phi = sum w * 2p/sqrt(2 pi) j_l(pr) (plus e^{-iEt} Y + minus_conj e^{iEt} conj(Y)),
//!   where w is a quadrature weight in p attached to each entry.
//! - Tube: phi = dE * sum_k p/(4 pi) (a jcheck + b ncheck) e^{-iEt} Y with E = k dE.
//!
//! Points reuse `SpacetimePoint` with t = tau and rho = r.

use crate::error::{Error, Result};
use crate::expansions::{Jet, OmegaGrid, SliceRep, TubeBasis, TubeKey, TubeRep};
use crate::geometry::{flat_labels, AdsParams, SpacetimePoint};
use crate::harmonics::{sph_harm, AngularLabel};
use crate::modes::{magic_frequency, Branch};
use crate::quadrature::AngularGrid;
use crate::specfun::{gamma_fn, spherical_bessel, spherical_bessel_deriv, BesselKind};
use crate::symplectic::{omega_slice_momentum, SymplecticValue};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkTubeLabel {
    pub e: f64,
    pub l: u32,
    pub m: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkSliceLabel {
    pub p: f64,
    pub l: u32,
    pub m: i32,
}

impl MinkSliceLabel {
    pub fn energy(&self, mass: f64) -> f64 {
        (self.p * self.p + mass * mass).sqrt()
    }
}

/// p = sqrt|E^2 - m^2| and whether E^2 - m^2 >= 0.
pub fn radial_momentum(e: f64, mass: f64) -> (f64, bool) {
    let disc = e * e - mass * mass;
    (disc.abs().sqrt(), disc >= 0.0)
}

const SERIES_TERMS: usize = 400;

/// Sum of c_k (x/2)^{2k+s} over k and its x-derivative, where the first
/// coefficient and ratios come from `coef`.
fn half_power_series(x: f64, s_of: impl Fn(usize) -> f64, mut coef: impl FnMut(usize) -> Result<f64>) -> Result<(f64, f64)> {
    let (mut sum, mut dsum) = (0.0, 0.0);
    for k in 0..SERIES_TERMS {
        let s = s_of(k);
        let c = coef(k)?;
        let term = c * (x / 2.0).powf(s);
        sum += term;
        dsum += term * s / x;
        if k > 2 && term.abs() <= 1e-17 * sum.abs() && s > 0.0 {
            return Ok((sum, dsum));
        }
    }
    Err(Error::Convergence { terms: SERIES_TERMS })
}

/// i_l(x) = sqrt(pi)/2 sum (x/2)^{2k+l} / (k! Gamma(k+l+3/2)) and derivative.
fn modified_first(l: u32, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((if l == 0 { 1.0 } else { 0.0 }, if l == 1 { 1.0 / 3.0 } else { 0.0 }));
    }
    let c0 = PI.sqrt() / 2.0 / gamma_fn(l as f64 + 1.5)?;
    let mut c = c0;
    let (v, dv) = half_power_series(
        x,
        |k| (2 * k + l as usize) as f64,
        |k| {
            if k > 0 {
                c /= k as f64 * (k as f64 + l as f64 + 0.5);
            }
            Ok(c)
        },
    )?;
    Ok((v, dv))
}

/// (-1)^{l+1} sqrt(pi)/2 sum (x/2)^{2k-l-1} / (k! Gamma(k-l+1/2)) and derivative.
fn modified_second(l: u32, x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("ncheck at x = {x}")));
    }
    let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
    let lf = l as f64;
    let mut c = PI.sqrt() / 2.0 / gamma_fn(0.5 - lf)?;
    let (v, dv) = half_power_series(
        x,
        |k| 2.0 * k as f64 - lf - 1.0,
        |k| {
            if k > 0 {
                c /= k as f64 * (k as f64 - lf - 0.5);
            }
            Ok(c)
        },
    )?;
    Ok((sign * v, sign * dv))
}

/// jcheck and its r-derivative.
pub fn jcheck_with_deriv(e: f64, l: u32, r: f64, mass: f64) -> Result<(f64, f64)> {
    let (p, propagating) = radial_momentum(e, mass);
    if propagating {
        let x = p * r;
        return Ok((spherical_bessel(BesselKind::J, l, x)?, p * spherical_bessel_deriv(BesselKind::J, l, x)?));
    }
    let (v, dv) = modified_first(l, p * r)?;
    Ok((v, p * dv))
}

/// ncheck and its r-derivative.
pub fn ncheck_with_deriv(e: f64, l: u32, r: f64, mass: f64) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("ncheck at r = {r}")));
    }
    let (p, propagating) = radial_momentum(e, mass);
    if p == 0.0 {
        return Err(Error::Domain(format!("ncheck at E^2 = m^2 (E = {e})")));
    }
    if propagating {
        let x = p * r;
        return Ok((spherical_bessel(BesselKind::N, l, x)?, p * spherical_bessel_deriv(BesselKind::N, l, x)?));
    }
    let (v, dv) = modified_second(l, p * r)?;
    Ok((v, p * dv))
}

pub fn jcheck(e: f64, l: u32, r: f64, mass: f64) -> Result<f64> {
    jcheck_with_deriv(e, l, r, mass).map(|v| v.0)
}

pub fn ncheck(e: f64, l: u32, r: f64, mass: f64) -> Result<f64> {
    ncheck_with_deriv(e, l, r, mass).map(|v| v.0)
}

/// r^2 f'' + 2 r f' + (D r^2 - l(l+1)) f by central differences, D = E^2 - m^2.
pub fn flat_radial_residual(f: impl Fn(f64) -> Result<f64>, e: f64, l: u32, r: f64, mass: f64) -> Result<f64> {
    let h = 1e-3 * r.max(1.0);
    let (fm2, fm, f0, fp, fp2) = (f(r - 2.0 * h)?, f(r - h)?, f(r)?, f(r + h)?, f(r + 2.0 * h)?);
    let d1 = (fm2 - 8.0 * fm + 8.0 * fp - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm - 30.0 * f0 + 16.0 * fp - fp2) / (12.0 * h * h);
    let disc = e * e - mass * mass;
    Ok(r * r * d2 + 2.0 * r * d1 + (disc * r * r - (l * (l + 1)) as f64) * f0)
}

fn harmonic(l: u32, m: i32, p: &SpacetimePoint) -> Result<C64> {
    let (th, ph) = p.angles();
    sph_harm(AngularLabel::new(l, m)?, th, ph)
}

/// One slice entry: a momentum node with its quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkSliceEntry {
    pub label: MinkSliceLabel,
    pub weight: f64,
    pub plus: C64,
    pub minus_conj: C64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MinkSliceRep {
    pub entries: Vec<MinkSliceEntry>,
}

impl MinkSliceRep {
    pub fn push(&mut self, p: f64, l: u32, m: i32, weight: f64, plus: C64, minus_conj: C64) -> Result<()> {
        AngularLabel::new(l, m)?;
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("slice momentum {p} must be positive")));
        }
        self.entries.push(MinkSliceEntry { label: MinkSliceLabel { p, l, m }, weight, plus, minus_conj });
        Ok(())
    }
}

pub fn mink_slice_jet(rep: &MinkSliceRep, mass: f64, pt: &SpacetimePoint) -> Result<Jet> {
    let mut jet = Jet::default();
    for en in &rep.entries {
        let MinkSliceLabel { p, l, m } = en.label;
        let e = en.label.energy(mass);
        let x = p * pt.rho;
        let c = en.weight * 2.0 * p / (2.0 * PI).sqrt();
        let (j, dj) = (spherical_bessel(BesselKind::J, l, x)?, p * spherical_bessel_deriv(BesselKind::J, l, x)?);
        let mu = C64::from_polar(c, -e * pt.t) * harmonic(l, m, pt)?;
        let (pos, neg) = (en.plus * mu, en.minus_conj * mu.conj());
        jet.value += (pos + neg) * j;
        jet.dt += (pos - neg) * C64::new(0.0, -e) * j;
        jet.drho += (pos + neg) * dj;
    }
    Ok(jet)
}

pub fn mink_synth_slice(rep: &MinkSliceRep, mass: f64, pt: &SpacetimePoint) -> Result<C64> {
    mink_slice_jet(rep, mass, pt).map(|j| j.value)
}

/// Tube representation (a, b) on the energy grid E_k = k dE.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkTubeRep {
    pub grid: OmegaGrid,
    pub coeffs: BTreeMap<TubeKey, (C64, C64)>,
}

impl MinkTubeRep {
    pub fn new(grid: OmegaGrid) -> Self {
        MinkTubeRep { grid, coeffs: BTreeMap::new() }
    }

    pub fn insert(&mut self, k: i64, l: u32, m: i32, a: C64, b: C64) -> Result<()> {
        AngularLabel::new(l, m)?;
        self.coeffs.insert((k, l, m), (a, b));
        Ok(())
    }
}

pub fn mink_tube_jet(rep: &MinkTubeRep, mass: f64, pt: &SpacetimePoint) -> Result<Jet> {
    let mut jet = Jet::default();
    for (&(k, l, m), &(a, b)) in &rep.coeffs {
        let e = rep.grid.omega(k);
        let (p, _) = radial_momentum(e, mass);
        if p == 0.0 {
            if b != C64::default() {
                return Err(Error::Domain(format!("ncheck at E^2 = m^2 (E = {e})")));
            }
            continue;
        }
        let (j, dj) = jcheck_with_deriv(e, l, pt.rho, mass)?;
        let (n, dn) = if b == C64::default() { (0.0, 0.0) } else { ncheck_with_deriv(e, l, pt.rho, mass)? };
        let mu = C64::from_polar(rep.grid.d_omega * p / (4.0 * PI), -e * pt.t) * harmonic(l, m, pt)?;
        let v = a * j + b * n;
        jet.value += mu * v;
        jet.dt += mu * C64::new(0.0, -e) * v;
        jet.drho += mu * (a * dj + b * dn);
    }
    Ok(jet)
}

pub fn mink_synth_tube(rep: &MinkTubeRep, mass: f64, pt: &SpacetimePoint) -> Result<C64> {
    mink_tube_jet(rep, mass, pt).map(|j| j.value)
}

/// i sum w E (conj(eta^-) zeta^+ - eta^+ conj(zeta^-)) over entries with equal labels.
pub fn mink_omega_slice(eta: &MinkSliceRep, zeta: &MinkSliceRep, mass: f64) -> SymplecticValue {
    let mut total = C64::default();
    for e in &eta.entries {
        for z in zeta.entries.iter().filter(|z| z.label == e.label) {
            total += (e.minus_conj * z.plus - e.plus * z.minus_conj) * e.weight * e.label.energy(mass);
        }
    }
    C64::new(0.0, 1.0) * total
}

/// -1/2 int_0^{r_max} r^2 dr dOmega (eta d_t zeta - zeta d_t eta) at time tau,
/// with an n_r-point Gauss-Legendre rule in r.
pub fn mink_omega_slice_quadrature(eta: &MinkSliceRep, zeta: &MinkSliceRep, tau: f64, r_max: f64, n_r: usize, mass: f64) -> Result<SymplecticValue> {
    let lmax = eta.entries.iter().chain(&zeta.entries).map(|e| e.label.l).max().unwrap_or(0);
    let ang = AngularGrid::for_lmax(lmax);
    let rule = crate::quadrature::gauss_legendre(n_r, 0.0, r_max);
    let mut total = C64::default();
    for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
        let mut ring = C64::default();
        for (th, ph, wa) in ang.nodes() {
            let pt = SpacetimePoint::from_angles(tau, r, th, ph);
            let (a, b) = (mink_slice_jet(eta, mass, &pt)?, mink_slice_jet(zeta, mass, &pt)?);
            ring += (a.value * b.dt - b.value * a.dt) * wa;
        }
        total += ring * wr * r * r;
    }
    Ok(-0.5 * total)
}

/// r^2/2 int dt dOmega (eta d_r zeta - zeta d_r eta) over one time window at radius r.
pub fn mink_omega_tube_quadrature(eta: &MinkTubeRep, zeta: &MinkTubeRep, r: f64, mass: f64) -> Result<SymplecticValue> {
    if eta.grid != zeta.grid {
        return Err(Error::BasisMismatch);
    }
    let kmax = eta.coeffs.keys().chain(zeta.coeffs.keys()).map(|k| k.0.abs()).max().unwrap_or(0);
    let lmax = eta.coeffs.keys().chain(zeta.coeffs.keys()).map(|k| k.1).max().unwrap_or(0);
    let n_t = (2 * kmax + 1) as usize;
    let dt = eta.grid.period() / n_t as f64;
    let ang = AngularGrid::for_lmax(lmax);
    let mut total = C64::default();
    for j in 0..n_t {
        for (th, ph, wa) in ang.nodes() {
            let pt = SpacetimePoint::from_angles(j as f64 * dt, r, th, ph);
            let (a, b) = (mink_tube_jet(eta, mass, &pt)?, mink_tube_jet(zeta, mass, &pt)?);
            total += (a.value * b.drho - b.value * a.drho) * wa;
        }
    }
    Ok(total * dt * r * r / 2.0)
}

/// dE sum p/(16 pi) (eta^a_{E,l,m} zeta^b_{-E,l,-m} - eta^b zeta^a).
pub fn mink_omega_tube(eta: &MinkTubeRep, zeta: &MinkTubeRep, mass: f64) -> Result<SymplecticValue> {
    if eta.grid != zeta.grid {
        return Err(Error::BasisMismatch);
    }
    let mut total = C64::default();
    for (&(k, l, m), &(ea, eb)) in &eta.coeffs {
        let Some(&(za, zb)) = zeta.coeffs.get(&(-k, l, -m)) else { continue };
        let (p, _) = radial_momentum(eta.grid.omega(k), mass);
        total += (ea * zb - eb * za) * p / (16.0 * PI);
    }
    Ok(total * eta.grid.d_omega)
}

fn double_factorial_odd(l: u32) -> f64 {
    // (2l+1)!!
    (0..=l).fold(1.0, |acc, j| acc * (2 * j + 1) as f64)
}

/// Scale factors (s_a, s_b) with AdS coefficient = s * Minkowski coefficient
/// for the tube label (omega, l): the modified momentum representation.
pub fn tube_flat_scales(omega: f64, l: u32, params: &AdsParams) -> Result<(f64, f64)> {
    params.require_d3()?;
    let fl = flat_labels(params, omega);
    if fl.p_r == 0.0 {
        return Err(Error::Domain(format!("flat map at p = 0 (omega = {omega})")));
    }
    let lower = if l == 0 { 1.0 } else { double_factorial_odd(l - 1) };
    let sa = fl.p_tilde * fl.p_r.powi(l as i32) / (4.0 * PI * params.r * double_factorial_odd(l));
    let sb = fl.p_tilde * fl.p_r.powi(-(l as i32 + 1)) * lower / (4.0 * PI * params.r);
    Ok((sa, sb))
}

/// Minkowski node, weight and scale for the slice label (n, l): the AdS
/// coefficient equals scale times the Minkowski one. The weight is the
/// momentum spacing dp~/dn = 2 w~ / (R p~).
pub fn slice_flat_node(n: u32, l: u32, params: &AdsParams) -> Result<(f64, f64, f64)> {
    params.require_d3()?;
    let fl = flat_labels(params, magic_frequency(Branch::Plus, n, l, params));
    if fl.p_r == 0.0 {
        return Err(Error::Domain(format!("flat map at p = 0 (n = {n}, l = {l})")));
    }
    let weight = 2.0 * fl.omega_tilde / (params.r * fl.p_tilde);
    let scale = weight * 2.0 * fl.p_tilde * fl.p_r.powi(l as i32) / ((2.0 * PI).sqrt() * double_factorial_odd(l));
    Ok((fl.p_tilde, weight, scale))
}

/// Minkowski tube representation of an AdS S-basis tube representation.
pub fn flat_tube_map(rep: &TubeRep, params: &AdsParams) -> Result<MinkTubeRep> {
    if rep.basis != TubeBasis::S {
        return Err(Error::BasisMismatch);
    }
    let mut out = MinkTubeRep::new(OmegaGrid::new(rep.grid.d_omega / params.r)?);
    for (&(k, l, m), &(a, b)) in &rep.coeffs {
        let (sa, sb) = tube_flat_scales(rep.grid.omega(k), l, params)?;
        out.coeffs.insert((k, l, m), (a / sa, b / sb));
    }
    Ok(out)
}

/// Minkowski slice representation of an AdS Jacobi representation.
pub fn flat_slice_map(rep: &SliceRep, params: &AdsParams) -> Result<MinkSliceRep> {
    let mut out = MinkSliceRep::default();
    for (&(n, l, m), &(plus, mc)) in &rep.coeffs {
        let (p, w, s) = slice_flat_node(n, l, params)?;
        out.push(p, l, m, w, plus / s, mc / s)?;
    }
    Ok(out)
}

/// Max relative errors of the flat-limit comparison at one AdS radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatLimitRow {
    pub r_ads: f64,
    pub radial: f64,
    pub slice: f64,
    pub symplectic: f64,
}

/// Minkowski slice data (p~, l, m, plus, minus_conj) held fixed across R.
const SLICE_TARGETS: [(f64, u32, i32, [f64; 4]); 3] =
    [(0.6, 0, 0, [1.0, 0.3, 0.5, -0.2]), (1.0, 1, -1, [-0.4, 0.8, 0.2, 0.6]), (1.4, 2, 1, [0.7, -0.5, -0.3, 0.1])];

fn nearest_n(p_target: f64, l: u32, params: &AdsParams) -> u32 {
    let e = (p_target * p_target + params.m_sq).sqrt() * params.r;
    (((e - l as f64 - params.delta_plus) / 2.0).round().max(0.0)) as u32
}

fn rel_err(pairs: &[(C64, C64)]) -> f64 {
    let scale = pairs.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    pairs.iter().map(|p| (p.0 - p.1).norm()).fold(0.0, f64::max) / scale
}

fn radial_error(params: &AdsParams, mass: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &wt in &[0.3, 0.8, 1.5] {
        for l in 0..3 {
            let omega = wt * params.r;
            let fl = flat_labels(params, omega);
            let scale = fl.p_r.powi(l as i32) / double_factorial_odd(l);
            let mut pairs = Vec::new();
            for i in 0..50 {
                let r = 0.1 + 4.9 * i as f64 / 49.0;
                let s = crate::modes::radial_eval(crate::modes::RadialKind::Sa, omega, l, r / params.r, params)?;
                pairs.push((C64::from(s * scale), C64::from(jcheck(wt, l, r, mass)?)));
            }
            worst = worst.max(rel_err(&pairs));
        }
    }
    Ok(worst)
}

fn slice_pair(params: &AdsParams, conj_swap: bool) -> Result<(SliceRep, MinkSliceRep)> {
    let mut ads = SliceRep::new();
    let mut mink = MinkSliceRep::default();
    for &(pt, l, m, c) in &SLICE_TARGETS {
        let n = nearest_n(pt, l, params);
        let (p, w, s) = slice_flat_node(n, l, params)?;
        let (plus, mc) = if conj_swap { (C64::new(c[2], -c[3]), C64::new(c[1], c[0])) } else { (C64::new(c[0], c[1]), C64::new(c[2], c[3])) };
        ads.insert(n, l, m, plus * s, mc * s)?;
        mink.push(p, l, m, w, plus, mc)?;
    }
    Ok((ads, mink))
}

/// Compares AdS quantities at radius R with their Minkowski counterparts for
/// a field of mass sqrt(m_sq), on r in [0.1, 5] and tau in [-1.3, 0.7].
pub fn flat_limit_row(r_ads: f64, m_sq: f64) -> Result<FlatLimitRow> {
    let params = AdsParams::new(3, r_ads, m_sq)?;
    let mass = m_sq.sqrt();
    let radial = radial_error(&params, mass)?;

    let (ads, mink) = slice_pair(&params, false)?;
    let mut pairs = Vec::new();
    for &tau in &[-1.3, 0.0, 0.7] {
        for i in 0..12 {
            let r = 0.1 + 4.9 * i as f64 / 11.0;
            let (th, ph) = (0.4 + 0.2 * i as f64, 0.9 * i as f64);
            let a = crate::expansions::synth_slice(&ads, &SpacetimePoint::from_angles(tau / r_ads, r / r_ads, th, ph), &params)?;
            let b = mink_synth_slice(&mink, mass, &SpacetimePoint::from_angles(tau, r, th, ph))?;
            pairs.push((a, b));
        }
    }
    let slice = rel_err(&pairs);

    let (ads2, mink2) = slice_pair(&params, true)?;
    let a = omega_slice_momentum(&ads, &ads2, &params)?;
    let b = mink_omega_slice(&mink, &mink2, mass);
    let symplectic = (a - b).norm() / b.norm();
    Ok(FlatLimitRow { r_ads, radial, slice, symplectic })
}

/// One row per AdS radius.
pub fn flat_limit_compare(radii: &[f64], m_sq: f64) -> Result<Vec<FlatLimitRow>> {
    radii.iter().map(|&r| flat_limit_row(r, m_sq)).collect()
}

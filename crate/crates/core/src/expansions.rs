//! Momentum representations on slice, tube and rod regions: synthesis,
//! inversion from hypersurface data, the S <-> C coefficient transform,
//! boundary data via the twisted derivative and a text serialization.
//!
//! Conventions:
//! - Slice: phi = sum plus * mu + minus_conj * conj(mu), mu = e^{-i w t} Y_l^m J^+_{nl}.
//! - Tube: phi = d_omega * sum_k (a mu^a + b mu^b) with w = k d_omega.
//! - Rod: a tube representation with only S^a content.
//!
//! All maps are keyed by (k or n, l, m) in a `BTreeMap`, which fixes the
//! summation order and makes synthesis bit-reproducible.

use crate::error::{Error, Result};
use crate::geometry::{AdsParams, SpacetimePoint};
use crate::harmonics::{sph_harm, AngularLabel};
use crate::modes::{jacobi_radial_with_deriv, magic_frequency, transfer_matrix, Branch, RadialKind, RadialSet};
use crate::quadrature::{tanh_sinh, AngularGrid, Rule};
use crate::specfun::{double_pochhammer, pochhammer};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

type C64 = Complex64;

/// Discrete frequency grid w_k = k * d_omega with time window T = 2 pi / d_omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaGrid {
    pub d_omega: f64,
}

impl OmegaGrid {
    pub fn new(d_omega: f64) -> Result<Self> {
        if !(d_omega > 0.0 && d_omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("frequency spacing {d_omega} must be positive")));
        }
        Ok(OmegaGrid { d_omega })
    }

    pub fn omega(&self, k: i64) -> f64 {
        k as f64 * self.d_omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.d_omega
    }

    /// Number of grid steps per unit frequency, if 1/d_omega is an integer.
    pub fn unit_steps(&self) -> Result<i64> {
        let s = 1.0 / self.d_omega;
        if (s - s.round()).abs() > 1e-9 || s.round() < 1.0 {
            return Err(Error::GridIncompatible(self.d_omega));
        }
        Ok(s.round() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TubeBasis {
    S,
    C,
}

impl TubeBasis {
    pub fn kinds(self) -> (RadialKind, RadialKind) {
        match self {
            TubeBasis::S => (RadialKind::Sa, RadialKind::Sb),
            TubeBasis::C => (RadialKind::Ca, RadialKind::Cb),
        }
    }

    /// Constant Wronskian of the basis pair.
    pub fn wronskian(self, l: u32, params: &AdsParams) -> f64 {
        match self {
            TubeBasis::S => 2.0 * l as f64 + params.dim() - 2.0,
            TubeBasis::C => 2.0 * params.nu,
        }
    }
}

pub type TubeKey = (i64, u32, i32);
pub type SliceKey = (u32, u32, i32);

fn check_label(l: u32, m: i32) -> Result<()> {
    AngularLabel::new(l, m).map(|_| ())
}

/// Tube momentum representation (a, b) per label.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeRep {
    pub grid: OmegaGrid,
    pub basis: TubeBasis,
    pub coeffs: BTreeMap<TubeKey, (C64, C64)>,
}

impl TubeRep {
    pub fn new(grid: OmegaGrid, basis: TubeBasis) -> Self {
        TubeRep { grid, basis, coeffs: BTreeMap::new() }
    }

    pub fn insert(&mut self, k: i64, l: u32, m: i32, a: C64, b: C64) -> Result<()> {
        check_label(l, m)?;
        self.coeffs.insert((k, l, m), (a, b));
        Ok(())
    }

    pub fn get(&self, key: TubeKey) -> (C64, C64) {
        self.coeffs.get(&key).copied().unwrap_or_default()
    }

    /// True iff coeff(-k, l, -m) = conj(coeff(k, l, m)) within tol.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(&(k, l, m), &(a, b))| {
            let (ca, cb) = self.get((-k, l, -m));
            (ca - a.conj()).norm() <= tol && (cb - b.conj()).norm() <= tol
        })
    }

    /// alpha * self + beta * other.
    pub fn combine(&self, alpha: C64, other: &TubeRep, beta: C64) -> Result<TubeRep> {
        if self.basis != other.basis || self.grid != other.grid {
            return Err(Error::BasisMismatch);
        }
        let mut out = TubeRep::new(self.grid, self.basis);
        for key in self.coeffs.keys().chain(other.coeffs.keys()) {
            let (a1, b1) = self.get(*key);
            let (a2, b2) = other.get(*key);
            out.coeffs.insert(*key, (alpha * a1 + beta * a2, alpha * b1 + beta * b2));
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &TubeRep) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|key| {
                let (a1, b1) = self.get(*key);
                let (a2, b2) = other.get(*key);
                (a1 - a2).norm().max((b1 - b2).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Jacobi momentum representation (phi^+, conj(phi^-)) per label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SliceRep {
    pub coeffs: BTreeMap<SliceKey, (C64, C64)>,
}

impl SliceRep {
    pub fn new() -> Self {
        SliceRep::default()
    }

    pub fn insert(&mut self, n: u32, l: u32, m: i32, plus: C64, minus_conj: C64) -> Result<()> {
        check_label(l, m)?;
        self.coeffs.insert((n, l, m), (plus, minus_conj));
        Ok(())
    }

    pub fn get(&self, key: SliceKey) -> (C64, C64) {
        self.coeffs.get(&key).copied().unwrap_or_default()
    }

    /// True iff phi^+ = phi^- on every label.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.values().all(|&(p, mc)| (p - mc.conj()).norm() <= tol)
    }

    pub fn combine(&self, alpha: C64, other: &SliceRep, beta: C64) -> SliceRep {
        let mut out = SliceRep::new();
        for key in self.coeffs.keys().chain(other.coeffs.keys()) {
            let (p1, m1) = self.get(*key);
            let (p2, m2) = other.get(*key);
            out.coeffs.insert(*key, (alpha * p1 + beta * p2, alpha * m1 + beta * m2));
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SliceRep) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|key| {
                let (p1, m1) = self.get(*key);
                let (p2, m2) = other.get(*key);
                (p1 - p2).norm().max((m1 - m2).norm())
            })
            .fold(0.0, f64::max)
    }

    /// The same solution as an S-basis tube rep on a grid containing all
    /// magic frequencies of the support.
    pub fn to_tube(&self, grid: OmegaGrid, params: &AdsParams) -> Result<TubeRep> {
        let mut out = TubeRep::new(grid, TubeBasis::S);
        for (&(n, l, m), &(p, mc)) in &self.coeffs {
            let w = magic_frequency(Branch::Plus, n, l, params);
            let k = (w / grid.d_omega).round();
            if (k * grid.d_omega - w).abs() > 1e-9 {
                return Err(Error::GridIncompatible(grid.d_omega));
            }
            let k = k as i64;
            let scale = 1.0 / grid.d_omega;
            let e = out.coeffs.entry((k, l, m)).or_default();
            e.0 += p * scale;
            // conj(e^{-iwt} Y_l^m) = e^{iwt} Y_l^{-m}
            let e = out.coeffs.entry((-k, l, -m)).or_default();
            e.0 += mc * scale;
        }
        Ok(out)
    }
}

/// Rod momentum representation: S^a coefficients only.
#[derive(Debug, Clone, PartialEq)]
pub struct RodRep {
    pub grid: OmegaGrid,
    pub coeffs: BTreeMap<TubeKey, C64>,
}

impl RodRep {
    pub fn new(grid: OmegaGrid) -> Self {
        RodRep { grid, coeffs: BTreeMap::new() }
    }

    pub fn insert(&mut self, k: i64, l: u32, m: i32, a: C64) -> Result<()> {
        check_label(l, m)?;
        self.coeffs.insert((k, l, m), a);
        Ok(())
    }

    pub fn to_tube(&self) -> TubeRep {
        let mut out = TubeRep::new(self.grid, TubeBasis::S);
        for (&key, &a) in &self.coeffs {
            out.coeffs.insert(key, (a, C64::new(0.0, 0.0)));
        }
        out
    }

    pub fn max_abs_diff(&self, other: &RodRep) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|key| {
                let a = self.coeffs.get(key).copied().unwrap_or_default();
                let b = other.coeffs.get(key).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Field value with its t and rho derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: C64,
    pub dt: C64,
    pub drho: C64,
}

fn harmonic(l: u32, m: i32, p: &SpacetimePoint) -> Result<C64> {
    let (th, ph) = p.angles();
    sph_harm(AngularLabel::new(l, m)?, th, ph)
}

pub fn slice_jet(rep: &SliceRep, p: &SpacetimePoint, params: &AdsParams) -> Result<Jet> {
    params.require_d3()?;
    let mut jet = Jet::default();
    for (&(n, l, m), &(plus, mc)) in &rep.coeffs {
        let w = magic_frequency(Branch::Plus, n, l, params);
        let (j, dj) = jacobi_radial_with_deriv(Branch::Plus, n, l, p.rho, params)?;
        let mu = C64::from_polar(1.0, -w * p.t) * harmonic(l, m, p)?;
        let (pos, neg) = (plus * mu, mc * mu.conj());
        jet.value += (pos + neg) * j;
        jet.dt += (pos - neg) * C64::new(0.0, -w) * j;
        jet.drho += (pos + neg) * dj;
    }
    Ok(jet)
}

pub fn synth_slice(rep: &SliceRep, p: &SpacetimePoint, params: &AdsParams) -> Result<C64> {
    slice_jet(rep, p, params).map(|j| j.value)
}

pub fn tube_jet(rep: &TubeRep, p: &SpacetimePoint, params: &AdsParams) -> Result<Jet> {
    params.require_d3()?;
    let (ka, kb) = rep.basis.kinds();
    let mut jet = Jet::default();
    let mut cache: Option<((i64, u32), (f64, f64), (f64, f64))> = None;
    for (&(k, l, m), &(a, b)) in &rep.coeffs {
        let w = rep.grid.omega(k);
        let (ra, rb) = match cache {
            Some((key, ra, rb)) if key == (k, l) => (ra, rb),
            _ => {
                let mut set = RadialSet::new(w, l, params);
                let ra = set.eval(ka, p.rho)?;
                let rb = set.eval(kb, p.rho)?;
                cache = Some(((k, l), ra, rb));
                (ra, rb)
            }
        };
        let mu = C64::from_polar(rep.grid.d_omega, -w * p.t) * harmonic(l, m, p)?;
        jet.value += mu * (a * ra.0 + b * rb.0);
        jet.dt += mu * C64::new(0.0, -w) * (a * ra.0 + b * rb.0);
        jet.drho += mu * (a * ra.1 + b * rb.1);
    }
    Ok(jet)
}

pub fn synth_tube(rep: &TubeRep, p: &SpacetimePoint, params: &AdsParams) -> Result<C64> {
    tube_jet(rep, p, params).map(|j| j.value)
}

pub fn rod_jet(rep: &RodRep, p: &SpacetimePoint, params: &AdsParams) -> Result<Jet> {
    params.require_d3()?;
    let mut jet = Jet::default();
    for (&(k, l, m), &a) in &rep.coeffs {
        let w = rep.grid.omega(k);
        let (r, dr) = RadialSet::new(w, l, params).eval(RadialKind::Sa, p.rho)?;
        let mu = C64::from_polar(rep.grid.d_omega, -w * p.t) * harmonic(l, m, p)? * a;
        jet.value += mu * r;
        jet.dt += mu * C64::new(0.0, -w) * r;
        jet.drho += mu * dr;
    }
    Ok(jet)
}

pub fn synth_rod(rep: &RodRep, p: &SpacetimePoint, params: &AdsParams) -> Result<C64> {
    rod_jet(rep, p, params).map(|j| j.value)
}

/// Any of the three representation kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyRep {
    Slice(SliceRep),
    Tube(TubeRep),
    Rod(RodRep),
}

pub fn synth(rep: &AnyRep, p: &SpacetimePoint, params: &AdsParams) -> Result<C64> {
    match rep {
        AnyRep::Slice(r) => synth_slice(r, p, params),
        AnyRep::Tube(r) => synth_tube(r, p, params),
        AnyRep::Rod(r) => synth_rod(r, p, params),
    }
}

/// Rewrites an S-basis rep in the C basis.
pub fn s_to_c(rep: &TubeRep, params: &AdsParams) -> Result<TubeRep> {
    if rep.basis != TubeBasis::S {
        return Err(Error::BasisMismatch);
    }
    let mut out = TubeRep::new(rep.grid, TubeBasis::C);
    for (&(k, l, m), &(a, b)) in &rep.coeffs {
        let t = transfer_matrix(rep.grid.omega(k), l, params)?;
        out.coeffs.insert((k, l, m), (a * t.m11 + b * t.m21, a * t.m12 + b * t.m22));
    }
    Ok(out)
}

/// Rewrites a C-basis rep in the S basis.
pub fn c_to_s(rep: &TubeRep, params: &AdsParams) -> Result<TubeRep> {
    if rep.basis != TubeBasis::C {
        return Err(Error::BasisMismatch);
    }
    let mut out = TubeRep::new(rep.grid, TubeBasis::S);
    for (&(k, l, m), &(ca, cb)) in &rep.coeffs {
        let t = transfer_matrix(rep.grid.omega(k), l, params)?;
        let det = t.det();
        out.coeffs.insert((k, l, m), ((ca * t.m22 - cb * t.m21) / det, (cb * t.m11 - ca * t.m12) / det));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Slice inversion

/// Label cutoffs n <= n_max, l <= l_max for slice inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceCutoffs {
    pub n_max: u32,
    pub l_max: u32,
}

/// Radial rule on [0, pi/2) for slice pairings.
pub fn slice_rule() -> Rule {
    tanh_sinh(0.0, FRAC_PI_2, 1.0 / 64.0, 4.0)
}

/// phi and d_t phi sampled on an equal-time surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceData {
    pub t0: f64,
    pub rule: Rule,
    pub angular: AngularGrid,
    /// Indexed by radial node then angular node.
    pub phi: Vec<C64>,
    pub dphi: Vec<C64>,
}

impl SliceData {
    pub fn sample(t0: f64, angular: AngularGrid, f: impl Fn(&SpacetimePoint) -> Result<(C64, C64)>) -> Result<Self> {
        let rule = slice_rule();
        let mut phi = Vec::with_capacity(rule.len() * angular.len());
        let mut dphi = Vec::with_capacity(rule.len() * angular.len());
        for &rho in &rule.nodes {
            for (th, ph, _) in angular.nodes() {
                let (v, dv) = f(&SpacetimePoint::from_angles(t0, rho, th, ph))?;
                phi.push(v);
                dphi.push(dv);
            }
        }
        Ok(SliceData { t0, rule, angular, phi, dphi })
    }

    pub fn from_rep(rep: &SliceRep, t0: f64, angular: AngularGrid, params: &AdsParams) -> Result<Self> {
        SliceData::sample(t0, angular, |p| slice_jet(rep, p, params).map(|j| (j.value, j.dt)))
    }
}

fn harmonic_table(angular: &AngularGrid, l_max: u32) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::new();
    for l in 0..=l_max {
        for m in -(l as i32)..=(l as i32) {
            let label = AngularLabel::new(l, m)?;
            out.push(angular.nodes().map(|(th, ph, _)| sph_harm(label, th, ph)).collect::<Result<Vec<_>>>()?);
        }
    }
    Ok(out)
}

fn lm_index(l: u32, m: i32) -> usize {
    (l * l) as usize + (m + l as i32) as usize
}

/// Recovers (phi^+, conj(phi^-)) from initial data on an equal-time surface.
pub fn invert_slice(data: &SliceData, params: &AdsParams, cut: SliceCutoffs) -> Result<SliceRep> {
    params.require_d3()?;
    let nang = data.angular.len();
    let nrho = data.rule.len();
    let ylm = harmonic_table(&data.angular, cut.l_max)?;
    let weights: Vec<f64> = data.angular.nodes().map(|(_, _, w)| w).collect();
    let nlm = ylm.len();
    // Angular projections against conj(Y) and Y, per radial node.
    let mut proj = vec![[C64::default(); 4]; nrho * nlm];
    for i in 0..nrho {
        let row = i * nang;
        for (j, y) in ylm.iter().enumerate() {
            let mut acc = [C64::default(); 4];
            for a in 0..nang {
                let (v, dv) = (data.phi[row + a], data.dphi[row + a]);
                let wy = y[a] * weights[a];
                acc[0] += wy.conj() * v;
                acc[1] += wy.conj() * dv;
                acc[2] += wy * v;
                acc[3] += wy * dv;
            }
            proj[i * nlm + j] = acc;
        }
    }
    let jac: Vec<Vec<Vec<f64>>> = (0..=cut.l_max)
        .map(|l| {
            (0..=cut.n_max)
                .map(|n| data.rule.nodes.iter().map(|&r| jacobi_radial_with_deriv(Branch::Plus, n, l, r, params).map(|v| v.0)).collect())
                .collect::<Result<Vec<Vec<f64>>>>()
        })
        .collect::<Result<_>>()?;
    let tan_w: Vec<f64> = data.rule.nodes.iter().zip(&data.rule.weights).map(|(r, w)| w * r.tan().powi(params.d as i32 - 1)).collect();
    let mut rep = SliceRep::new();
    for l in 0..=cut.l_max {
        for n in 0..=cut.n_max {
            let w = magic_frequency(Branch::Plus, n, l, params);
            let norm = crate::modes::norm_constant(Branch::Plus, n, l, params)?;
            let f = C64::from_polar(1.0 / (2.0 * norm), w * data.t0);
            let d = C64::new(0.0, 1.0) * f / w;
            for m in -(l as i32)..=(l as i32) {
                let j = lm_index(l, m);
                let mut acc = [C64::default(); 4];
                for i in 0..nrho {
                    let jw = jac[l as usize][n as usize][i] * tan_w[i];
                    let p = &proj[i * nlm + j];
                    for c in 0..4 {
                        acc[c] += p[c] * jw;
                    }
                }
                let plus = f * acc[0] + d * acc[1];
                let minus_conj = f.conj() * acc[2] + d.conj() * acc[3];
                rep.coeffs.insert((n, l, m), (plus, minus_conj));
            }
        }
    }
    // Band-limit check against the reconstruction on the data nodes.
    let scale = data.phi.iter().chain(&data.dphi).map(|v| v.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        let mut resid: f64 = 0.0;
        for i in 0..nrho {
            let mut radial = vec![[C64::default(); 4]; nlm];
            for (&(n, l, m), &(plus, mc)) in &rep.coeffs {
                let w = magic_frequency(Branch::Plus, n, l, params);
                let jv = jac[l as usize][n as usize][i];
                let e = C64::from_polar(1.0, -w * data.t0);
                let r = &mut radial[lm_index(l, m)];
                r[0] += plus * e * jv;
                r[1] += mc * e.conj() * jv;
                r[2] += plus * e * jv * C64::new(0.0, -w);
                r[3] += mc * e.conj() * jv * C64::new(0.0, w);
            }
            for a in 0..nang {
                let (mut v, mut dv) = (C64::default(), C64::default());
                for (j, y) in ylm.iter().enumerate() {
                    let r = &radial[j];
                    v += y[a] * r[0] + y[a].conj() * r[1];
                    dv += y[a] * r[2] + y[a].conj() * r[3];
                }
                resid = resid.max((v - data.phi[i * nang + a]).norm()).max((dv - data.dphi[i * nang + a]).norm());
            }
        }
        let tol = 1e-6;
        if resid > tol * scale {
            return Err(Error::BandLimitExceeded { residual: resid / scale, tol });
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Hypercylinder data and tube / rod inversion

/// Explicit tube label window: k_min <= k <= k_max, l <= l_max, all m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TubeWindow {
    pub k_min: i64,
    pub k_max: i64,
    pub l_max: u32,
}

impl TubeWindow {
    pub fn labels(&self) -> impl Iterator<Item = TubeKey> + '_ {
        (self.k_min..=self.k_max).flat_map(move |k| (0..=self.l_max).flat_map(move |l| (-(l as i32)..=l as i32).map(move |m| (k, l, m))))
    }

    pub fn contains(&self, key: TubeKey) -> bool {
        key.0 >= self.k_min && key.0 <= self.k_max && key.1 <= self.l_max
    }

    /// Minimal number of time samples that resolves the window exactly.
    pub fn time_samples(&self) -> usize {
        (2 * (self.k_max - self.k_min) + 1).max(1) as usize
    }

    pub fn angular_grid(&self) -> AngularGrid {
        AngularGrid::for_lmax(self.l_max)
    }
}

/// Values of a function on (t, Omega) over one time window, uniform in t.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSamples {
    pub grid: OmegaGrid,
    pub n_t: usize,
    pub angular: AngularGrid,
    /// Indexed by time node then angular node.
    pub values: Vec<C64>,
}

impl CylinderSamples {
    pub fn t_nodes(&self) -> Vec<f64> {
        let dt = self.grid.period() / self.n_t as f64;
        (0..self.n_t).map(|j| j as f64 * dt).collect()
    }

    pub fn sample(grid: OmegaGrid, n_t: usize, angular: AngularGrid, f: impl Fn(f64, f64, f64) -> Result<C64>) -> Result<Self> {
        let dt = grid.period() / n_t as f64;
        let mut values = Vec::with_capacity(n_t * angular.len());
        for j in 0..n_t {
            for (th, ph, _) in angular.nodes() {
                values.push(f(j as f64 * dt, th, ph)?);
            }
        }
        Ok(CylinderSamples { grid, n_t, angular, values })
    }

    /// int_0^T dt int dOmega e^{i w_k t} conj(Y_l^m) f for every window label.
    pub fn project(&self, window: &TubeWindow) -> Result<BTreeMap<TubeKey, C64>> {
        let nang = self.angular.len();
        let ylm = harmonic_table(&self.angular, window.l_max)?;
        let weights: Vec<f64> = self.angular.nodes().map(|(_, _, w)| w).collect();
        let dt = self.grid.period() / self.n_t as f64;
        let mut ang = vec![C64::default(); self.n_t * ylm.len()];
        for j in 0..self.n_t {
            for (i, y) in ylm.iter().enumerate() {
                ang[j * ylm.len() + i] = (0..nang).map(|a| (y[a] * weights[a]).conj() * self.values[j * nang + a]).sum();
            }
        }
        let mut out = BTreeMap::new();
        for key in window.labels() {
            let (k, l, m) = key;
            let idx = lm_index(l, m);
            let mut acc = C64::default();
            for j in 0..self.n_t {
                // e^{i w_k t_j} with w_k t_j = 2 pi k j / n_t exactly
                let phase = 2.0 * PI * ((k * j as i64).rem_euclid(self.n_t as i64)) as f64 / self.n_t as f64;
                acc += C64::from_polar(dt, phase) * ang[j * ylm.len() + idx];
            }
            out.insert(key, acc);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// phi and d_rho phi on the hypercylinder rho = rho0.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeData {
    pub rho0: f64,
    pub phi: CylinderSamples,
    pub drho: CylinderSamples,
}

impl TubeData {
    pub fn sample(rho0: f64, grid: OmegaGrid, window: &TubeWindow, f: impl Fn(&SpacetimePoint) -> Result<(C64, C64)>) -> Result<Self> {
        let n_t = window.time_samples();
        let ang = window.angular_grid();
        let dt = grid.period() / n_t as f64;
        let mut vals = Vec::with_capacity(n_t * ang.len());
        let mut ders = Vec::with_capacity(n_t * ang.len());
        for j in 0..n_t {
            for (th, ph, _) in ang.nodes() {
                let (v, dv) = f(&SpacetimePoint::from_angles(j as f64 * dt, rho0, th, ph))?;
                vals.push(v);
                ders.push(dv);
            }
        }
        let phi = CylinderSamples { grid, n_t, angular: ang.clone(), values: vals };
        let drho = CylinderSamples { grid, n_t, angular: ang, values: ders };
        Ok(TubeData { rho0, phi, drho })
    }

    pub fn from_tube_rep(rep: &TubeRep, rho0: f64, window: &TubeWindow, params: &AdsParams) -> Result<Self> {
        TubeData::sample(rho0, rep.grid, window, |p| tube_jet(rep, p, params).map(|j| (j.value, j.drho)))
    }
}

fn check_rho0(rho0: f64) -> Result<()> {
    if rho0 > 0.0 && rho0 < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("hypersurface radius {rho0} must lie in (0, pi/2)")))
    }
}

/// Recovers a tube rep in the chosen basis from (phi, d_rho phi) on rho = rho0.
pub fn invert_tube(data: &TubeData, params: &AdsParams, basis: TubeBasis, window: &TubeWindow) -> Result<TubeRep> {
    check_rho0(data.rho0)?;
    let pv = data.phi.project(window)?;
    let pd = data.drho.project(window)?;
    let (ka, kb) = basis.kinds();
    let tan = data.rho0.tan().powi(params.d as i32 - 1);
    let mut rep = TubeRep::new(data.phi.grid, basis);
    let mut radial: Option<((i64, u32), (f64, f64), (f64, f64))> = None;
    for key in window.labels() {
        let (k, l, _) = key;
        let (fa, fb) = match radial {
            Some((kl, fa, fb)) if kl == (k, l) => (fa, fb),
            _ => {
                let mut set = RadialSet::new(data.phi.grid.omega(k), l, params);
                let fa = set.eval(ka, data.rho0)?;
                let fb = set.eval(kb, data.rho0)?;
                radial = Some(((k, l), fa, fb));
                (fa, fb)
            }
        };
        let pre = tan / (2.0 * PI * basis.wronskian(l, params));
        let (v, dv) = (pv[&key], pd[&key]);
        let a = pre * (v * fb.1 - dv * fb.0);
        let b = pre * (dv * fa.0 - v * fa.1);
        rep.coeffs.insert(key, (a, b));
    }
    Ok(rep)
}

/// phi on rho = rho0 for rod inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct RodData {
    pub rho0: f64,
    pub phi: CylinderSamples,
}

impl RodData {
    pub fn from_rod_rep(rep: &RodRep, rho0: f64, window: &TubeWindow, params: &AdsParams) -> Result<Self> {
        let phi = CylinderSamples::sample(rep.grid, window.time_samples(), window.angular_grid(), |t, th, ph| {
            synth_rod(rep, &SpacetimePoint::from_angles(t, rho0, th, ph), params)
        })?;
        Ok(RodData { rho0, phi })
    }
}

/// Recovers the S^a coefficients of a rod solution from its values on rho = rho0.
pub fn invert_rod_interior(data: &RodData, params: &AdsParams, window: &TubeWindow) -> Result<RodRep> {
    check_rho0(data.rho0)?;
    let proj = data.phi.project(window)?;
    let mut rep = RodRep::new(data.phi.grid);
    let mut radial: Option<((i64, u32), f64)> = None;
    for key in window.labels() {
        let (k, l, m) = key;
        let s = match radial {
            Some((kl, s)) if kl == (k, l) => s,
            _ => {
                let s = RadialSet::new(data.phi.grid.omega(k), l, params).eval(RadialKind::Sa, data.rho0)?.0;
                radial = Some(((k, l), s));
                s
            }
        };
        if s.abs() < 1e-10 {
            return Err(Error::RadialNodeError { k, l, m });
        }
        rep.coeffs.insert(key, proj[&key] / (2.0 * PI * s));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Boundary machinery

/// floor(nu), rejecting integer nu.
pub fn nu_floor(params: &AdsParams) -> Result<u32> {
    if !params.c_modes_valid() {
        return Err(Error::IntegerNu { nu: params.nu });
    }
    Ok(params.nu.floor() as u32)
}

/// Taylor coefficients in cos(rho) of C^a (Plus, powers Delta_+ + 2a) or
/// C^b (Minus, powers Delta_- + 2a), for a = 0..=a_max.
pub fn taylor_coeffs(branch: Branch, omega: f64, l: u32, params: &AdsParams, a_max: u32) -> Result<Vec<f64>> {
    let kind = match branch {
        Branch::Plus => RadialKind::Ca,
        Branch::Minus => RadialKind::Cb,
    };
    let h = crate::modes::hyper_params(kind, omega, l, params)?;
    let half = l as f64 / 2.0 + 1.0;
    Ok((0..=a_max)
        .map(|a| {
            (0..=a)
                .map(|b| {
                    let c = a - b;
                    let sin_part = if b % 2 == 0 { 1.0 } else { -1.0 } * pochhammer(half - b as f64, b) / pochhammer(1.0, b);
                    sin_part * pochhammer(h.alpha, c) * pochhammer(h.beta, c) / (pochhammer(h.gamma, c) * pochhammer(1.0, c))
                })
                .sum()
        })
        .collect())
}

/// Twisted-derivative weight of the cos^{2a} (C^a) or cos^{2a - 2 nu} (C^b) term.
fn twisted_weight(kind: RadialKind, a: u32, nu: f64, fl: u32) -> f64 {
    match kind {
        RadialKind::Ca => double_pochhammer(2.0 * nu + 2.0 * a as f64 - 2.0 * fl as f64, fl + 1),
        _ => double_pochhammer(2.0 * a as f64 - 2.0 * fl as f64, fl + 1),
    }
}

fn c_branch(kind: RadialKind) -> Result<Branch> {
    match kind {
        RadialKind::Ca => Ok(Branch::Plus),
        RadialKind::Cb => Ok(Branch::Minus),
        _ => Err(Error::InvalidParameter("twisted derivative acts on C^a or C^b".into())),
    }
}

/// The twisted derivative of C^a or C^b at rho, summed from the Taylor series
/// truncated at a_max.
pub fn twisted_derivative(kind: RadialKind, omega: f64, l: u32, rho: f64, params: &AdsParams, a_max: u32) -> Result<f64> {
    let fl = nu_floor(params)?;
    let d = taylor_coeffs(c_branch(kind)?, omega, l, params, a_max)?;
    let c = rho.cos();
    let shift = if kind == RadialKind::Ca { 0.0 } else { -2.0 * params.nu };
    Ok(d.iter().enumerate().map(|(a, &da)| c.powf(shift + 2.0 * a as f64) * da * twisted_weight(kind, a as u32, params.nu, fl)).sum())
}

/// Boundary limit of the twisted derivative of C^a or C^b.
pub fn twisted_boundary_limit(kind: RadialKind, params: &AdsParams) -> Result<f64> {
    let fl = nu_floor(params)?;
    match c_branch(kind)? {
        Branch::Plus => Ok(double_pochhammer(2.0 * params.nu - 2.0 * fl as f64, fl + 1)),
        Branch::Minus => Ok(0.0),
    }
}

/// (rescaled value, twisted derivative) of C^a or C^b at rho = pi/2, read off
/// term by term from the Taylor series: only exponent-zero terms survive.
pub fn boundary_limits(kind: RadialKind, omega: f64, l: u32, params: &AdsParams) -> Result<(f64, f64)> {
    let fl = nu_floor(params)?;
    let a_max = fl + 2;
    let d = taylor_coeffs(c_branch(kind)?, omega, l, params, a_max)?;
    let nu = params.nu;
    let mut rescaled = 0.0;
    let mut twisted = 0.0;
    for (a, &da) in d.iter().enumerate() {
        let a2 = 2.0 * a as f64;
        // cos^{-Delta_-} applied to cos^{Delta_{+-} + 2a}
        let (e_res, e_tw) = match kind {
            RadialKind::Ca => (2.0 * nu + a2, a2),
            _ => (a2, a2 - 2.0 * nu),
        };
        let tw = da * twisted_weight(kind, a as u32, nu, fl);
        for (e, v, acc) in [(e_res, da, &mut rescaled), (e_tw, tw, &mut twisted)] {
            if e.abs() < 1e-12 {
                *acc += v;
            } else if e < 0.0 && v != 0.0 {
                return Err(Error::Domain(format!("boundary limit diverges: exponent {e}")));
            }
        }
    }
    Ok((rescaled, twisted))
}

/// Rescaled value and twisted derivative of a C-basis rep on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// lim cos^{-Delta_-} phi.
    pub minus: CylinderSamples,
    /// lim of the twisted derivative of phi.
    pub plus: CylinderSamples,
}

impl BoundaryData {
    pub fn from_c_rep(rep: &TubeRep, window: &TubeWindow, params: &AdsParams) -> Result<Self> {
        if rep.basis != TubeBasis::C {
            return Err(Error::BasisMismatch);
        }
        let mut limits = BTreeMap::new();
        for (&(k, l, _), _) in &rep.coeffs {
            if let std::collections::btree_map::Entry::Vacant(e) = limits.entry((k, l)) {
                let w = rep.grid.omega(k);
                e.insert((boundary_limits(RadialKind::Ca, w, l, params)?, boundary_limits(RadialKind::Cb, w, l, params)?));
            }
        }
        let field = |t: f64, th: f64, ph: f64, which: usize| -> Result<C64> {
            let mut acc = C64::default();
            for (&(k, l, m), &(a, b)) in &rep.coeffs {
                let (la, lb) = limits[&(k, l)];
                let (va, vb) = if which == 0 { (la.0, lb.0) } else { (la.1, lb.1) };
                let y = sph_harm(AngularLabel::new(l, m)?, th, ph)?;
                acc += C64::from_polar(rep.grid.d_omega, -rep.grid.omega(k) * t) * y * (a * va + b * vb);
            }
            Ok(acc)
        };
        let n_t = window.time_samples();
        let minus = CylinderSamples::sample(rep.grid, n_t, window.angular_grid(), |t, th, ph| field(t, th, ph, 0))?;
        let plus = CylinderSamples::sample(rep.grid, n_t, window.angular_grid(), |t, th, ph| field(t, th, ph, 1))?;
        Ok(BoundaryData { minus, plus })
    }
}

/// Recovers the full C-basis rep from the two boundary functions.
pub fn boundary_reconstruct(data: &BoundaryData, params: &AdsParams, window: &TubeWindow) -> Result<TubeRep> {
    params.require_c_modes().map_err(|_| Error::IntegerNu { nu: params.nu })?;
    let lim = twisted_boundary_limit(RadialKind::Ca, params)?;
    let pp = data.plus.project(window)?;
    let pm = data.minus.project(window)?;
    let mut rep = TubeRep::new(data.minus.grid, TubeBasis::C);
    for key in window.labels() {
        rep.coeffs.insert(key, (pp[&key] / (2.0 * PI * lim), pm[&key] / (2.0 * PI)));
    }
    Ok(rep)
}

/// Rescaled boundary value lim cos^{-Delta_-} phi of a rod solution.
pub fn rod_boundary_data(rep: &RodRep, window: &TubeWindow, params: &AdsParams) -> Result<CylinderSamples> {
    let c = s_to_c(&rep.to_tube(), params)?;
    Ok(BoundaryData::from_c_rep(&c, window, params)?.minus)
}

/// Recovers a rod rep from its rescaled boundary value.
pub fn rod_boundary_reconstruct(data: &CylinderSamples, params: &AdsParams, window: &TubeWindow) -> Result<RodRep> {
    let proj = data.project(window)?;
    let mut rep = RodRep::new(data.grid);
    for key in window.labels() {
        let (k, l, m) = key;
        let m12 = transfer_matrix(data.grid.omega(k), l, params)?.m12;
        if m12.abs() < 1e-10 {
            return Err(Error::MagicFrequencyBlind { k, l, m });
        }
        rep.coeffs.insert(key, proj[&key] / (2.0 * PI * m12));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Serialization

/// Header fields of a serialized rep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepHeader {
    pub d: u32,
    pub r: f64,
    pub m_sq: f64,
    pub d_omega: f64,
}

impl RepHeader {
    pub fn params(&self) -> Result<AdsParams> {
        AdsParams::new(self.d, self.r, self.m_sq)
    }
}

fn fmt_c(c: C64) -> String {
    format!("{:e} {:e}", c.re, c.im)
}

/// Serializes a rep as `basis k l m re_a im_a re_b im_b` lines.
pub fn write_rep(header: &RepHeader, rep: &AnyRep) -> String {
    let mut s = format!("adskg-rep v1 d={} R={} msq={} domega={}\n", header.d, header.r, header.m_sq, header.d_omega);
    let zero = C64::default();
    match rep {
        AnyRep::Slice(r) => {
            for (&(n, l, m), &(p, mc)) in &r.coeffs {
                s += &format!("J {n} {l} {m} {} {}\n", fmt_c(p), fmt_c(mc));
            }
        }
        AnyRep::Tube(r) => {
            let tag = if r.basis == TubeBasis::S { "S" } else { "C" };
            for (&(k, l, m), &(a, b)) in &r.coeffs {
                s += &format!("{tag} {k} {l} {m} {} {}\n", fmt_c(a), fmt_c(b));
            }
        }
        AnyRep::Rod(r) => {
            for (&(k, l, m), &a) in &r.coeffs {
                s += &format!("rod {k} {l} {m} {} {}\n", fmt_c(a), fmt_c(zero));
            }
        }
    }
    s
}

fn parse_header(line: &str) -> Result<RepHeader> {
    let mut it = line.split_whitespace();
    if it.next() != Some("adskg-rep") {
        return Err(Error::Parse("missing adskg-rep header".into()));
    }
    match it.next() {
        Some("v1") => {}
        other => return Err(Error::Parse(format!("unsupported version {other:?}"))),
    }
    let mut fields = BTreeMap::new();
    for tok in it {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field {tok}")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| -> Result<f64> {
        fields.get(k).ok_or_else(|| Error::Parse(format!("header lacks {k}")))?.parse::<f64>().map_err(|e| Error::Parse(format!("{k}: {e}")))
    };
    let d = get("d")?;
    if d.fract() != 0.0 || d < 1.0 {
        return Err(Error::Parse(format!("bad dimension {d}")));
    }
    Ok(RepHeader { d: d as u32, r: get("R")?, m_sq: get("msq")?, d_omega: get("domega")? })
}

/// Parses the text format written by `write_rep`.
pub fn parse_rep(text: &str) -> Result<(RepHeader, AnyRep)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = parse_header(lines.next().ok_or_else(|| Error::Parse("empty input".into()))?)?;
    let mut basis: Option<String> = None;
    let mut rows = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 8 {
            return Err(Error::Parse(format!("expected 8 fields: {line}")));
        }
        match &basis {
            None => basis = Some(toks[0].to_string()),
            Some(b) if b != toks[0] => return Err(Error::Parse("mixed bases in one file".into())),
            _ => {}
        }
        let k: i64 = toks[1].parse().map_err(|e| Error::Parse(format!("k: {e}")))?;
        let l: u32 = toks[2].parse().map_err(|e| Error::Parse(format!("l: {e}")))?;
        let m: i32 = toks[3].parse().map_err(|e| Error::Parse(format!("m: {e}")))?;
        let v: Vec<f64> = toks[4..].iter().map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t}: {e}")))).collect::<Result<_>>()?;
        check_label(l, m).map_err(|e| Error::Parse(e.to_string()))?;
        rows.push((k, l, m, C64::new(v[0], v[1]), C64::new(v[2], v[3])));
    }
    let grid = || OmegaGrid::new(header.d_omega).map_err(|e| Error::Parse(e.to_string()));
    let rep = match basis.as_deref() {
        None | Some("J") => {
            let mut r = SliceRep::new();
            for (k, l, m, a, b) in rows {
                let n = u32::try_from(k).map_err(|_| Error::Parse(format!("negative radial index {k}")))?;
                r.coeffs.insert((n, l, m), (a, b));
            }
            AnyRep::Slice(r)
        }
        Some(tag @ ("S" | "C")) => {
            let mut r = TubeRep::new(grid()?, if tag == "S" { TubeBasis::S } else { TubeBasis::C });
            for (k, l, m, a, b) in rows {
                r.coeffs.insert((k, l, m), (a, b));
            }
            AnyRep::Tube(r)
        }
        Some("rod") => {
            let mut r = RodRep::new(grid()?);
            for (k, l, m, a, _) in rows {
                r.coeffs.insert((k, l, m), a);
            }
            AnyRep::Rod(r)
        }
        Some(other) => return Err(Error::Parse(format!("unknown basis {other}"))),
    };
    Ok((header, rep))
}

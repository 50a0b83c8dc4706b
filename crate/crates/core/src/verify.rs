//! Verification suites. Each acceptance criterion is a function returning
//! named checks; module suites group criteria and a few extra invariants.

use crate::error::{Error, Result};
use crate::expansions::{
    boundary_limits, boundary_reconstruct, invert_rod_interior, invert_slice, invert_tube, rod_boundary_data, rod_boundary_reconstruct, s_to_c,
    twisted_derivative, AnyRep, BoundaryData, OmegaGrid, RodData, RodRep, SliceCutoffs, SliceData, SliceRep, TubeBasis, TubeData, TubeRep,
    TubeWindow,
};
use crate::fixtures;
use crate::geometry::{flat_killing_deviation, kg_residual, verify_lie_bracket, AdsParams, FlatPoint, GeneratorId, SpacetimePoint};
use crate::harmonics::{angles_of, sph_harm, unit_vector, wigner_d, AngularLabel, EulerAngles};
use crate::isometry::{
    act_rotation, act_time_translation, boost_slice, boost_tube, extract_boost_coeffs, invariance_suite, slice_identities, tube_identities, Action,
    LabelSpace,
};
use crate::minkowski::{flat_limit_compare, flat_radial_residual, jcheck, ncheck};
use crate::modes::{jacobi_radial, magic_frequency, norm_constant, radial_eval, transfer_matrix, wronskian, Branch, RadialKind};
use crate::quadrature::{tanh_sinh, AngularGrid};
use crate::specfun::{double_pochhammer, factorial, hyp2f1, jacobi_p, pochhammer, spherical_bessel, BesselKind, SeriesPolicy};
use crate::symplectic::{omega_slice_momentum, omega_slice_quadrature, omega_tube_momentum, omega_tube_quadrature};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI};

type C64 = Complex64;

/// What a check measured.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    /// Passes iff err <= tol.
    Error { err: f64, tol: f64 },
    /// Passes iff lo <= ratio <= hi.
    Ratio { ratio: f64, lo: f64, hi: f64 },
    /// The computation itself failed.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measure: Measure,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.measure {
            Measure::Error { err, tol } => err <= tol,
            Measure::Ratio { ratio, lo, hi } => (lo..=hi).contains(&ratio),
            Measure::Failed(_) => false,
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match &self.measure {
            Measure::Error { err, tol } => format!("{status} {} err={err:.3e} tol={tol:.1e}", self.name),
            Measure::Ratio { ratio, lo, hi } => format!("{status} {} ratio={ratio:.2} range=[{lo}, {hi}]", self.name),
            Measure::Failed(msg) => format!("{status} {} error: {msg}", self.name),
        }
    }
}

fn err_check(name: &str, r: Result<f64>, tol: f64) -> Check {
    let measure = match r {
        Ok(err) if err.is_nan() => Measure::Failed("NaN".into()),
        Ok(err) => Measure::Error { err, tol },
        Err(e) => Measure::Failed(e.to_string()),
    };
    Check { name: name.into(), measure }
}

fn ratio_check(name: &str, r: Result<f64>, lo: f64, hi: f64) -> Check {
    let measure = match r {
        Ok(ratio) => Measure::Ratio { ratio, lo, hi },
        Err(e) => Measure::Failed(e.to_string()),
    };
    Check { name: name.into(), measure }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Largest error among error-type checks; infinite if a computation failed.
    pub fn max_err(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| match c.measure {
                Measure::Error { err, .. } => err,
                Measure::Ratio { .. } => 0.0,
                Measure::Failed(_) => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    pub fn summary_line(&self) -> String {
        format!("SUITE {} {} max_err={:.3e}", self.name, if self.passed() { "PASS" } else { "FAIL" }, self.max_err())
    }
}

pub const SUITES: [&str; 9] = ["specfun", "harmonics", "geometry", "modes", "expansions", "symplectic", "isometry", "minkowski", "all"];

/// Runs one named suite.
pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let criteria: &[u32] = match name {
        "specfun" => &[1],
        "harmonics" => &[],
        "geometry" => &[11],
        "modes" => &[2, 3, 4, 6],
        "expansions" => &[8, 9],
        "symplectic" => &[5],
        "isometry" => &[7],
        "minkowski" => &[10],
        "all" => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
        _ => return Err(Error::InvalidParameter(format!("unknown suite {name}; expected one of {}", SUITES.join(", ")))),
    };
    let mut checks = Vec::new();
    if matches!(name, "specfun" | "all") {
        checks.push(err_check("spherical Bessel ODE residual", bessel_residual(), 1e-6));
    }
    if matches!(name, "harmonics" | "all") {
        checks.extend(harmonics_checks());
    }
    if matches!(name, "minkowski" | "all") {
        checks.push(err_check("jcheck/ncheck flat radial residual", flat_residual(), 1e-6));
    }
    for &c in criteria {
        checks.extend(criterion(c)?);
    }
    Ok(SuiteReport { name: name.into(), checks })
}

/// Checks of one acceptance criterion (1..=11).
pub fn criterion(n: u32) -> Result<Vec<Check>> {
    Ok(match n {
        1 => criterion_specfun(),
        2 => criterion_ode(),
        3 => criterion_wronskian(),
        4 => criterion_norm(),
        5 => criterion_symplectic(),
        6 => criterion_magic(),
        7 => criterion_isometry(),
        8 => criterion_boundary(),
        9 => criterion_inversion(),
        10 => criterion_flat(),
        11 => criterion_lie(),
        _ => return Err(Error::Index(format!("criterion {n} not in 1..=11"))),
    })
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

// ---- specfun ----

fn criterion_specfun() -> Vec<Check> {
    let policy = SeriesPolicy::default();
    let mut rng = fixtures::rng(101);
    let jac = (|| {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let (a, b) = (rng.gen_range(-0.9..4.0), rng.gen_range(-0.9..4.0));
            let n: u32 = rng.gen_range(0..10);
            let x = rng.gen_range(0.4..1.0);
            let rec = jacobi_p(a, b, n, x);
            let hyp = pochhammer(a + 1.0, n) / factorial(n) * hyp2f1(-(n as f64), n as f64 + a + b + 1.0, a + 1.0, (1.0 - x) / 2.0, &policy)?;
            worst = worst.max((rec - hyp).abs() / hyp.abs().max(1.0));
        }
        Ok(worst)
    })();
    let term = (|| {
        let mut worst: f64 = 0.0;
        // 2F1(-n, b; b; x) = (1 - x)^n with dyadic data is exact in floating point
        for n in 0..8u32 {
            for &(b, x) in &[(1.5, 0.5), (-2.25, 0.25), (3.0, -0.5)] {
                let v = hyp2f1(-(n as f64), b, b, x, &policy)?;
                worst = worst.max((v - (1.0f64 - x).powi(n as i32)).abs());
            }
        }
        worst = worst.max((hyp2f1(0.3, -1.7, 2.2, 0.0, &policy)? - 1.0).abs());
        Ok(worst)
    })();
    let mut rng = fixtures::rng(103);
    let mut dp: f64 = 0.0;
    for _ in 0..50 {
        let a = rng.gen_range(-5.0..5.0);
        let k = rng.gen_range(0..20);
        let rhs = 2f64.powi(k as i32) * pochhammer(a, k);
        dp = dp.max((double_pochhammer(2.0 * a, k) - rhs).abs() / rhs.abs().max(1e-300));
    }
    vec![
        err_check("jacobi_p vs hypergeometric form (50 samples)", jac, 1e-11),
        err_check("terminating 2F1 exact", term, 0.0),
        err_check("((2a))_k = 2^k (a)_k", Ok(dp), 1e-13),
    ]
}

fn bessel_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for kind in [BesselKind::J, BesselKind::N] {
        for l in 0..6 {
            for i in 0..40 {
                let x = 0.5 + 19.5 * i as f64 / 39.0;
                let f = |s: f64| spherical_bessel(kind, l, s).unwrap_or(f64::NAN);
                let h = 1e-3;
                let d1 = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
                let d2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h);
                let res = x * x * d2 + 2.0 * x * d1 + (x * x - (l * (l + 1)) as f64) * f(x);
                worst = worst.max(res.abs() / f(x).abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

// ---- harmonics ----

fn harmonics_checks() -> Vec<Check> {
    let y = |l: u32, m: i32, t: f64, p: f64| sph_harm(AngularLabel::new(l, m)?, t, p);
    let ortho = (|| {
        let g = AngularGrid::new(8, 13);
        let mut worst: f64 = 0.0;
        for l in 0..=5u32 {
            for m in -(l as i32)..=l as i32 {
                for lp in 0..=5u32 {
                    for mp in -(lp as i32)..=lp as i32 {
                        let mut v = C64::default();
                        for (t, p, w) in g.nodes() {
                            v += w * y(lp, mp, t, p)?.conj() * y(l, m, t, p)?;
                        }
                        let e = if l == lp && m == mp { 1.0 } else { 0.0 };
                        worst = worst.max((v - e).norm());
                    }
                }
            }
        }
        Ok(worst)
    })();
    let mut unit: f64 = 0.0;
    let rot = (|| {
        let mut worst: f64 = 0.0;
        for (i, a) in [EulerAngles::new(0.7, 1.3, -0.4), EulerAngles::new(-2.1, 0.2, 2.9)].into_iter().enumerate() {
            for l in 0..=4u32 {
                let d = wigner_d(l, a);
                let li = l as i32;
                for m1 in -li..=li {
                    for m2 in -li..=li {
                        let s: C64 = (-li..=li).map(|m| d.get(m1, m) * d.get(m2, m).conj()).sum();
                        unit = unit.max((s - if m1 == m2 { 1.0 } else { 0.0 }).norm());
                    }
                }
                for j in 0..10 {
                    let (t, p) = (0.1 + 0.3 * j as f64, 0.7 * j as f64 + i as f64);
                    let (tr, pr) = angles_of(a.rotate(unit_vector(t, p)));
                    for mp in -li..=li {
                        let mut rhs = C64::default();
                        for m in -li..=li {
                            rhs += y(l, m, t, p)? * d.get(mp, m).conj();
                        }
                        worst = worst.max((y(l, mp, tr, pr)? - rhs).norm());
                    }
                }
            }
        }
        Ok(worst)
    })();
    let conj = (|| {
        let mut worst: f64 = 0.0;
        for l in 0..8u32 {
            for m in 0..=l as i32 {
                worst = worst.max((y(l, m, 1.1, -2.3)?.conj() - y(l, -m, 1.1, -2.3)?).norm());
            }
        }
        Ok(worst)
    })();
    vec![
        err_check("spherical harmonics orthonormal on the grid", ortho, 1e-10),
        err_check("Wigner D unitary", Ok(unit), 1e-12),
        err_check("rotation rule Y(Rx) = sum Y conj(D)", rot, 1e-10),
        err_check("conj(Y^m) = Y^-m", conj, 1e-14),
    ]
}

// ---- modes ----

const MSQ_SET: [f64; 3] = [0.0, -2.0, 1.0];

fn criterion_ode() -> Vec<Check> {
    let mut out = Vec::new();
    for &msq in &MSQ_SET {
        let r = (|| {
            let p = AdsParams::new(3, 1.0, msq)?;
            let mut rng = fixtures::rng(107);
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let w = rng.gen_range(0.1..6.0);
                let l = rng.gen_range(0..4);
                for kind in [RadialKind::Sa, RadialKind::Sb, RadialKind::Ca, RadialKind::Cb] {
                    let f = |rho: f64| radial_eval(kind, w, l, rho, &p).unwrap_or(f64::NAN);
                    worst = worst.max(kg_residual(f, w, l, &p, (0.2, 1.2))?);
                }
                let (n, l) = (rng.gen_range(0..5), rng.gen_range(0..4));
                let mut branches = vec![Branch::Plus];
                if p.exceptional_range() {
                    branches.push(Branch::Minus);
                }
                for br in branches {
                    let f = |rho: f64| jacobi_radial(br, n, l, rho, &p).unwrap_or(f64::NAN);
                    worst = worst.max(kg_residual(f, magic_frequency(br, n, l, &p), l, &p, (0.2, 1.2))?);
                }
            }
            Ok(worst)
        })();
        out.push(err_check(&format!("radial KG residual, m^2R^2 = {msq}"), r, 1e-6));
    }
    out
}

fn criterion_wronskian() -> Vec<Check> {
    use RadialKind::*;
    let mut spread_all: Result<f64> = Ok(0.0);
    let mut det_all: Result<f64> = Ok(0.0);
    for &msq in &MSQ_SET {
        let r: Result<(f64, f64)> = (|| {
            let p = AdsParams::new(3, 1.0, msq)?;
            let mut rng = fixtures::rng(109);
            let (mut spread, mut det): (f64, f64) = (0.0, 0.0);
            for _ in 0..10 {
                let w = rng.gen_range(0.1..6.0);
                let l = rng.gen_range(0..4);
                for (a, b) in [(Sa, Sb), (Ca, Cb), (Sa, Ca), (Sa, Cb), (Sb, Ca), (Sb, Cb)] {
                    let v: Vec<f64> = [0.4, 0.7, 1.0].iter().map(|&rho| wronskian(a, b, w, l, rho, &p)).collect::<Result<_>>()?;
                    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                    spread = spread.max((hi - lo) / scale);
                }
                let m = transfer_matrix(w, l, &p)?;
                let wc = wronskian(Ca, Cb, w, l, 0.8, &p)?;
                let ws = wronskian(Sa, Sb, w, l, 0.8, &p)?;
                det = det.max((m.det() * wc - ws).abs() / ws.abs());
            }
            Ok((spread, det))
        })();
        match r {
            Ok((s, d)) => {
                spread_all = spread_all.map(|x| x.max(s));
                det_all = det_all.map(|x| x.max(d));
            }
            Err(e) => {
                spread_all = Err(e.clone());
                det_all = Err(e);
            }
        }
    }
    vec![err_check("Wronskian relative spread over rho", spread_all, 1e-8), err_check("det(M) W(Ca,Cb) = W(Sa,Sb)", det_all, 1e-8)]
}

fn criterion_norm() -> Vec<Check> {
    let quad = |br: Branch, n: u32, l: u32, p: &AdsParams| {
        let r = tanh_sinh(0.0, FRAC_PI_2, 1.0 / 64.0, 4.0);
        r.integrate(|rho| rho.tan().powi(p.d as i32 - 1) * jacobi_radial(br, n, l, rho, p).unwrap_or(f64::NAN).powi(2))
    };
    let r = (|| {
        let mut worst: f64 = 0.0;
        for &msq in &[0.0, -2.0, 0.7] {
            let p = AdsParams::new(3, 1.0, msq)?;
            let mut branches = vec![Branch::Plus];
            if p.exceptional_range() {
                branches.push(Branch::Minus);
            }
            for br in branches {
                for n in 0..=4 {
                    for l in 0..=4 {
                        let c = norm_constant(br, n, l, &p)?;
                        worst = worst.max((c - quad(br, n, l, &p)).abs() / c);
                    }
                }
            }
        }
        Ok(worst)
    })();
    let pi32 = AdsParams::new(3, 1.0, 0.0).and_then(|p| norm_constant(Branch::Plus, 0, 0, &p)).map(|v| (v - PI / 32.0).abs() / (PI / 32.0));
    vec![err_check("norm_constant vs quadrature, n,l <= 4", r, 1e-9), err_check("N_00 = pi/32 (d=3, m=0)", pi32, 1e-14)]
}

fn criterion_magic() -> Vec<Check> {
    let r: Result<(f64, f64)> = (|| {
        let (mut pt, mut m12): (f64, f64) = (0.0, 0.0);
        for &msq in &[0.0, -2.0, 0.7] {
            let p = AdsParams::new(3, 1.0, msq)?;
            for n in 0..=3 {
                for l in 0..=3 {
                    let w = magic_frequency(Branch::Plus, n, l, &p);
                    for i in 0..15 {
                        let rho = 0.05 + 1.45 * i as f64 / 14.0;
                        let s = radial_eval(RadialKind::Sa, w, l, rho, &p)?;
                        let j = jacobi_radial(Branch::Plus, n, l, rho, &p)?;
                        pt = pt.max((s - j).abs() / j.abs().max(1.0));
                    }
                    let m = transfer_matrix(w, l, &p)?;
                    m12 = m12.max(m.m12.abs() / m.m11.abs());
                }
            }
        }
        Ok((pt, m12))
    })();
    vec![
        err_check("S^a(w+_nl) = J+_nl pointwise, n,l <= 3", r.clone().map(|v| v.0), 1e-10),
        err_check("|m12| / |m11| at magic frequencies", r.map(|v| v.1), 1e-8),
    ]
}

// ---- symplectic ----

fn criterion_symplectic() -> Vec<Check> {
    let slice = (|| {
        let (mut agree, mut indep): (f64, f64) = (0.0, 0.0);
        for &(msq, r) in &[(0.0, 1.0), (-1.7, 2.0), (1.3, 0.7)] {
            let p = AdsParams::new(3, r, msq / (r * r))?;
            let mut rng = fixtures::rng(113);
            let cut = SliceCutoffs { n_max: 3, l_max: 3 };
            let eta = fixtures::slice_rep(&mut rng, 6, cut, false);
            let mut zeta = fixtures::slice_rep(&mut rng, 6, cut, false);
            // the form pairs equal labels; make sure some are shared
            for (&key, &v) in eta.coeffs.iter().take(3) {
                zeta.coeffs.insert(key, (v.1 * C64::new(0.6, -0.3), v.0 * 1.1));
            }
            let mom = omega_slice_momentum(&eta, &zeta, &p)?;
            let q: Vec<C64> = [0.0, 0.37, 1.9].iter().map(|&t| omega_slice_quadrature(&eta, &zeta, t, &p)).collect::<Result<_>>()?;
            for v in &q {
                agree = agree.max(rel(*v, mom));
                indep = indep.max(rel(*v, q[0]));
            }
        }
        Ok((agree, indep))
    })();
    let tube = (|| {
        let (mut agree, mut indep): (f64, f64) = (0.0, 0.0);
        let p = AdsParams::new(3, 1.5, 0.3)?;
        let grid = OmegaGrid::new(0.25)?;
        let w = TubeWindow { k_min: -12, k_max: 12, l_max: 2 };
        let mut rng = fixtures::rng(127);
        for basis in [TubeBasis::S, TubeBasis::C] {
            let eta = fixtures::tube_rep(&mut rng, grid, basis, &w, 6, false);
            let mut zeta = fixtures::tube_rep(&mut rng, grid, basis, &w, 6, false);
            for (&(k, l, m), &v) in eta.coeffs.iter().take(3) {
                zeta.coeffs.insert((-k, l, -m), (v.1 * 0.7, v.0 * C64::new(0.1, 0.9)));
            }
            let mom = omega_tube_momentum(&eta, &zeta, &p)?;
            let q: Vec<C64> = [0.5, 0.9, 1.3].iter().map(|&r| omega_tube_quadrature(&eta, &zeta, r, &p)).collect::<Result<_>>()?;
            for v in &q {
                agree = agree.max(rel(*v, mom));
                indep = indep.max(rel(*v, q[0]));
            }
        }
        Ok((agree, indep))
    })();
    let vanish = (|| {
        let p = AdsParams::new(3, 1.0, 0.4)?;
        let mut rng = fixtures::rng(131);
        let cut = SliceCutoffs { n_max: 2, l_max: 2 };
        let mut a = fixtures::slice_rep(&mut rng, 5, cut, false);
        let mut b = fixtures::slice_rep(&mut rng, 5, cut, false);
        a.coeffs.values_mut().for_each(|v| v.1 = C64::default());
        b.coeffs.values_mut().for_each(|v| v.1 = C64::default());
        let mut worst = omega_slice_quadrature(&a, &b, 0.2, &p)?.norm().max(omega_slice_momentum(&a, &b, &p)?.norm());
        a.coeffs.values_mut().for_each(|v| *v = (C64::default(), v.0));
        b.coeffs.values_mut().for_each(|v| *v = (C64::default(), v.0));
        worst = worst.max(omega_slice_quadrature(&a, &b, 0.2, &p)?.norm());
        let grid = OmegaGrid::new(0.25)?;
        let w = TubeWindow { k_min: -12, k_max: 12, l_max: 2 };
        let ra = fixtures::rod_rep(&mut rng, grid, &w, 6).to_tube();
        let mut rb = fixtures::rod_rep(&mut rng, grid, &w, 6).to_tube();
        for (&(k, l, m), &v) in &ra.coeffs {
            rb.coeffs.insert((-k, l, -m), (v.0 * C64::new(0.3, 0.5), C64::default()));
        }
        worst = worst.max(omega_tube_momentum(&ra, &rb, &p)?.norm());
        worst = worst.max(omega_tube_quadrature(&ra, &rb, 0.9, &p)?.norm());
        Ok(worst)
    })();
    vec![
        err_check("Sigma_t quadrature == momentum (random 6-label reps)", slice.clone().map(|v| v.0), 1e-7),
        err_check("Sigma_t value independent of t0", slice.map(|v| v.1), 1e-8),
        err_check("Sigma_rho quadrature == momentum (S and C bases)", tube.clone().map(|v| v.0), 1e-7),
        err_check("Sigma_rho value independent of rho0", tube.map(|v| v.1), 1e-8),
        err_check("Lagrangian subspaces and rod solutions vanish", vanish, 1e-9),
    ]
}

// ---- isometry ----

fn slice_of(r: AnyRep) -> Result<SliceRep> {
    match r {
        AnyRep::Slice(s) => Ok(s),
        _ => Err(Error::BasisMismatch),
    }
}

fn tube_of(r: AnyRep) -> Result<TubeRep> {
    match r {
        AnyRep::Tube(t) => Ok(t),
        _ => Err(Error::BasisMismatch),
    }
}

fn criterion_isometry() -> Vec<Check> {
    let finite = (|| {
        let p = AdsParams::new(3, 1.2, 0.4)?;
        let mut rng = fixtures::rng(137);
        let grid = OmegaGrid::new(0.5)?;
        let w = TubeWindow { k_min: -8, k_max: 8, l_max: 3 };
        let cut = SliceCutoffs { n_max: 2, l_max: 3 };
        let sp: Vec<(SliceRep, SliceRep)> = (0..3).map(|_| (fixtures::slice_rep(&mut rng, 6, cut, false), fixtures::slice_rep(&mut rng, 6, cut, false))).collect();
        let tp: Vec<(TubeRep, TubeRep)> =
            (0..3).map(|_| (fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 6, true), fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 6, true))).collect();
        let ang = EulerAngles::new(-0.3, 0.8, 1.9);
        let pp = &p;
        let st = Action::Finite(Box::new(move |r: &SliceRep| slice_of(act_time_translation(&AnyRep::Slice(r.clone()), -0.7, pp))));
        let sr = Action::Finite(Box::new(move |r: &SliceRep| slice_of(act_rotation(&AnyRep::Slice(r.clone()), ang, pp)?)));
        let tt = Action::Finite(Box::new(move |r: &TubeRep| tube_of(act_time_translation(&AnyRep::Tube(r.clone()), -0.7, pp))));
        let tr = Action::Finite(Box::new(move |r: &TubeRep| tube_of(act_rotation(&AnyRep::Tube(r.clone()), ang, pp)?)));
        let oms = |a: &SliceRep, b: &SliceRep| omega_slice_momentum(a, b, pp);
        let omt = |a: &TubeRep, b: &TubeRep| omega_tube_momentum(a, b, pp);
        let qs = |a: &SliceRep, b: &SliceRep| omega_slice_quadrature(a, b, 0.2, pp);
        let qt = |a: &TubeRep, b: &TubeRep| omega_tube_quadrature(a, b, 0.8, pp);
        let mut worst: f64 = 0.0;
        for act in [&st, &sr] {
            worst = worst.max(invariance_suite(oms, &sp, act)?).max(invariance_suite(qs, &sp[..1], act)?);
        }
        for act in [&tt, &tr] {
            worst = worst.max(invariance_suite(omt, &tp, act)?).max(invariance_suite(qt, &tp[..1], act)?);
        }
        Ok(worst)
    })();
    let tube_boost = (|| {
        let p = AdsParams::new(3, 1.0, 0.6)?;
        let grid = OmegaGrid::new(0.5)?;
        let w = TubeWindow { k_min: -8, k_max: 8, l_max: 3 };
        let inner = TubeWindow { k_min: -6, k_max: 6, l_max: 2 };
        let mut rng = fixtures::rng(139);
        let pairs: Vec<(TubeRep, TubeRep)> = (0..3)
            .map(|_| {
                let a = fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &inner, 6, true);
                let mut b = fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &inner, 6, true);
                for (&(k, l, m), &v) in a.coeffs.iter().take(2) {
                    b.coeffs.insert((-k, l, -m), (v.1, v.0));
                }
                (a, b)
            })
            .collect();
        let (mut leib, mut ident): (f64, f64) = (0.0, 0.0);
        for gen in [GeneratorId::Boost0(3), GeneratorId::BoostD1(3)] {
            let table = extract_boost_coeffs(LabelSpace::Tube { grid, window: w }, gen, &p)?;
            let act = Action::Infinitesimal(Box::new(|r: &TubeRep| boost_tube(r, gen, &table)));
            leib = leib.max(invariance_suite(|a, b| omega_tube_momentum(a, b, &p), &pairs, &act)?);
            ident = ident.max(tube_identities(&table, &p)?);
        }
        Ok((leib, ident))
    })();
    let slice_boost = (|| {
        let p = AdsParams::new(3, 1.0, -1.2)?;
        let cut = SliceCutoffs { n_max: 3, l_max: 3 };
        let inner = SliceCutoffs { n_max: 2, l_max: 2 };
        let mut rng = fixtures::rng(149);
        let pairs: Vec<(SliceRep, SliceRep)> = (0..3).map(|_| (fixtures::slice_rep(&mut rng, 6, inner, false), fixtures::slice_rep(&mut rng, 6, inner, false))).collect();
        let (mut leib, mut ident): (f64, f64) = (0.0, 0.0);
        for gen in [GeneratorId::Boost0(3), GeneratorId::BoostD1(3)] {
            let table = extract_boost_coeffs(LabelSpace::Slice(cut), gen, &p)?;
            let act = Action::Infinitesimal(Box::new(|r: &SliceRep| boost_slice(r, gen, &table)));
            leib = leib.max(invariance_suite(|a, b| omega_slice_momentum(a, b, &p), &pairs, &act)?);
            ident = ident.max(slice_identities(&table, &p)?);
        }
        Ok((leib, ident))
    })();
    vec![
        err_check("time translations and rotations preserve both structures", finite, 1e-8),
        err_check("tube boosts: Leibniz vanishing", tube_boost.clone().map(|v| v.0), 1e-6),
        err_check("slice boosts: Leibniz vanishing", slice_boost.clone().map(|v| v.0), 1e-6),
        err_check("tube boost coefficient identities (four)", tube_boost.map(|v| v.1), 1e-8),
        err_check("slice boost coefficient identities (two)", slice_boost.map(|v| v.1), 1e-8),
    ]
}

// ---- expansions ----

fn criterion_boundary() -> Vec<Check> {
    let limits = (|| {
        let mut worst: f64 = 0.0;
        // nu = 1.5 gives ((1))_2 = 3
        let p0 = AdsParams::new(3, 1.0, 0.0)?;
        worst = worst.max((boundary_limits(RadialKind::Ca, 2.3, 1, &p0)?.1 - 3.0).abs());
        for &msq in &[0.0, -1.6, 2.2, 7.0] {
            let p = AdsParams::new(3, 1.0, msq)?;
            let fl = p.nu.floor() as u32;
            let oracle = double_pochhammer(2.0 * p.nu - 2.0 * fl as f64, fl + 1);
            for &(w, l) in &[(2.3, 1u32), (0.7, 2), (4.1, 0)] {
                let (_, ta) = boundary_limits(RadialKind::Ca, w, l, &p)?;
                let (_, tb) = boundary_limits(RadialKind::Cb, w, l, &p)?;
                worst = worst.max((ta - oracle).abs()).max(tb.abs());
                // the Taylor-tail evaluation approaches the C^a limit
                worst = worst.max((twisted_derivative(RadialKind::Ca, w, l, 1e-6f64.acos(), &p, 30)? - oracle).abs());
            }
        }
        Ok(worst)
    })();
    let bdy = (|| {
        let p = AdsParams::new(3, 1.0, 0.8)?;
        let grid = OmegaGrid::new(0.25)?;
        let w = TubeWindow { k_min: -10, k_max: 10, l_max: 2 };
        let mut rng = fixtures::rng(151);
        let rep = fixtures::tube_rep(&mut rng, grid, TubeBasis::C, &w, 5, false);
        Ok(boundary_reconstruct(&BoundaryData::from_c_rep(&rep, &w, &p)?, &p, &w)?.max_abs_diff(&rep))
    })();
    let rod = (|| {
        let p = AdsParams::new(3, 1.0, 0.3)?;
        let grid = OmegaGrid::new(0.25)?;
        let w = TubeWindow { k_min: -12, k_max: 12, l_max: 2 };
        let mut rng = fixtures::rng(157);
        let rep = fixtures::rod_rep(&mut rng, grid, &w, 4);
        let interior = invert_rod_interior(&RodData::from_rod_rep(&rep, 0.9, &w, &p)?, &p, &w)?.max_abs_diff(&rep);
        // boundary data is blind at magic frequencies: the window avoids w = 3 + 2n + l
        let q = AdsParams::new(3, 1.0, 0.0)?;
        let g = OmegaGrid::new(0.1)?;
        let mut r2 = RodRep::new(g);
        r2.insert(17, 0, 0, C64::new(0.3, 0.1))?;
        r2.insert(29, 1, -1, C64::new(-0.5, 0.2))?;
        r2.insert(22, 1, 0, C64::new(0.1, 0.7))?;
        let w2 = TubeWindow { k_min: 15, k_max: 29, l_max: 1 };
        let boundary = rod_boundary_reconstruct(&rod_boundary_data(&r2, &w2, &q)?, &q, &w2)?.max_abs_diff(&r2);
        Ok(interior.max(boundary))
    })();
    vec![
        err_check("twisted-derivative boundary limits of C^a and C^b", limits, 1e-8),
        err_check("boundary_reconstruct round trip", bdy, 1e-7),
        err_check("rod interior and boundary round trips", rod, 1e-6),
    ]
}

fn criterion_inversion() -> Vec<Check> {
    let slice = (|| {
        let p = AdsParams::new(3, 1.0, -1.1)?;
        let cut = SliceCutoffs { n_max: 3, l_max: 2 };
        let ang = AngularGrid::for_lmax(cut.l_max);
        let mut rng = fixtures::rng(163);
        let rep = fixtures::slice_rep(&mut rng, 8, cut, false);
        let r1 = invert_slice(&SliceData::from_rep(&rep, 0.2, ang.clone(), &p)?, &p, cut)?;
        let r2 = invert_slice(&SliceData::from_rep(&rep, 1.7, ang, &p)?, &p, cut)?;
        Ok((r1.max_abs_diff(&rep).max(r2.max_abs_diff(&rep)), r1.max_abs_diff(&r2)))
    })();
    let tube = (|| {
        let p = AdsParams::new(3, 1.0, 0.7)?;
        let grid = OmegaGrid::new(0.25)?;
        let w = TubeWindow { k_min: -16, k_max: 16, l_max: 2 };
        let mut rng = fixtures::rng(167);
        let rep = fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 5, false);
        let a = invert_tube(&TubeData::from_tube_rep(&rep, 0.6, &w, &p)?, &p, TubeBasis::S, &w)?;
        let b = invert_tube(&TubeData::from_tube_rep(&rep, 1.1, &w, &p)?, &p, TubeBasis::S, &w)?;
        let c = invert_tube(&TubeData::from_tube_rep(&rep, 0.9, &w, &p)?, &p, TubeBasis::C, &w)?;
        let rt = a.max_abs_diff(&rep).max(b.max_abs_diff(&rep)).max(c.max_abs_diff(&s_to_c(&rep, &p)?));
        Ok((rt, a.max_abs_diff(&b)))
    })();
    vec![
        err_check("slice inversion left-inverts synthesis", slice.clone().map(|v| v.0), 1e-6),
        err_check("tube inversion left-inverts synthesis (S and C)", tube.clone().map(|v| v.0), 1e-6),
        err_check("slice inversion independent of t0", slice.map(|v| v.1), 1e-7),
        err_check("tube inversion independent of rho0", tube.map(|v| v.1), 1e-7),
    ]
}

// ---- minkowski / flat limit ----

fn flat_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(e, mass) in &[(2.0, 1.0), (0.5, 1.0), (1.7, 0.0)] {
        for l in 0..4 {
            for i in 0..10 {
                let r = 0.5 + 0.45 * i as f64;
                for f in [jcheck as fn(f64, u32, f64, f64) -> Result<f64>, ncheck] {
                    let scale = f(e, l, r, mass)?.abs().max(1.0);
                    worst = worst.max(flat_radial_residual(|s| f(e, l, s, mass), e, l, r, mass)?.abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

fn criterion_flat() -> Vec<Check> {
    let mut out = Vec::new();
    for m_sq in [0.0, 0.25] {
        match flat_limit_compare(&[100.0, 1000.0], m_sq) {
            Ok(rows) => {
                let (a, b) = (rows[0], rows[1]);
                out.push(ratio_check(&format!("(i) S^a vs jcheck, m^2 = {m_sq}"), Ok(a.radial / b.radial), 5.0, 200.0));
                out.push(ratio_check(&format!("(ii) slice expansion vs Minkowski, m^2 = {m_sq}"), Ok(a.slice / b.slice), 5.0, 200.0));
                out.push(ratio_check(&format!("(iii) symplectic values, m^2 = {m_sq}"), Ok(a.symplectic / b.symplectic), 5.0, 200.0));
            }
            Err(e) => out.push(ratio_check(&format!("flat limit, m^2 = {m_sq}"), Err(e), 5.0, 200.0)),
        }
    }
    let spot = AdsParams::new(3, 1000.0, 0.0).and_then(|p| radial_eval(RadialKind::Sa, 1300.0, 0, 1e-3, &p)).map(|s| (s - 1.3f64.sin() / 1.3).abs());
    out.push(err_check("S^a vs j_0 at R = 1e3, r = 1 (m = 0, l = 0)", spot, 1e-2));
    let field = |p: &FlatPoint| {
        let x = [p.rho * p.xi[0] - 0.3, p.rho * p.xi[1], p.rho * p.xi[2] - 1.0];
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        C64::from_polar((-(p.t - 0.5).powi(2) - r2).exp(), 0.8 * x[0])
    };
    let pts: Vec<FlatPoint> = (0..10).map(|i| SpacetimePoint::from_angles(0.1 * i as f64, 0.5 + 0.2 * i as f64, 0.4 + 0.2 * i as f64, 0.6 * i as f64)).collect();
    for g in [GeneratorId::BoostD1(1), GeneratorId::BoostD1(3), GeneratorId::Boost0(2), GeneratorId::Boost0(3)] {
        let r = (|| Ok(flat_killing_deviation(g, 100.0, &field, &pts)? / flat_killing_deviation(g, 1000.0, &field, &pts)?))();
        out.push(ratio_check(&format!("Killing correspondence {g:?}"), r, 50.0, 200.0));
    }
    out
}

// ---- geometry ----

fn lie_field(p: &SpacetimePoint) -> C64 {
    let (th, ph) = p.angles();
    let y1 = AngularLabel::new(1, 1).and_then(|a| sph_harm(a, th, ph)).unwrap_or_default();
    let y2 = AngularLabel::new(2, 0).and_then(|a| sph_harm(a, th, ph)).unwrap_or_default();
    let env = (-(p.t - 0.2).powi(2)).exp() * p.rho.sin() * p.rho.cos().powi(2);
    env * (C64::from_polar(1.0, -1.7 * p.t) * y1 + 0.5 * p.rho * y2)
}

fn criterion_lie() -> Vec<Check> {
    let pts: Vec<SpacetimePoint> = (0..20)
        .map(|i| {
            let x = i as f64;
            SpacetimePoint::from_angles(-0.8 + 0.09 * x, 0.2 + 0.055 * x, 0.3 + 0.13 * x, 0.7 * x)
        })
        .collect();
    let mut gens = vec![GeneratorId::TimeTranslation];
    for j in 1..=3 {
        gens.push(GeneratorId::Boost0(j));
        gens.push(GeneratorId::BoostD1(j));
        for k in (j + 1)..=3 {
            gens.push(GeneratorId::Rotation(j, k));
        }
    }
    let family = |g: &GeneratorId| match g {
        GeneratorId::TimeTranslation => "K_{d+1,0}",
        GeneratorId::Rotation(..) => "K_jk",
        GeneratorId::Boost0(_) => "K_0j",
        GeneratorId::BoostD1(_) => "K_{d+1,j}",
    };
    let mut out: Vec<(String, Result<f64>)> = Vec::new();
    for (i, a) in gens.iter().enumerate() {
        for b in gens.iter().skip(i + 1) {
            let name = format!("[{}, {}]", family(a), family(b));
            let dev = verify_lie_bracket(*a, *b, &lie_field, &pts);
            match out.iter_mut().find(|(n, _)| *n == name) {
                Some((_, acc)) => {
                    *acc = match (acc.clone(), dev) {
                        (Ok(x), Ok(y)) => Ok(x.max(y)),
                        (Err(e), _) | (_, Err(e)) => Err(e),
                    }
                }
                None => out.push((name, dev)),
            }
        }
    }
    out.into_iter().map(|(n, r)| err_check(&format!("Lie bracket {n}"), r, 1e-5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert!(matches!(run_suite("nope"), Err(Error::InvalidParameter(_))));
        assert!(matches!(criterion(12), Err(Error::Index(_))));
    }

    #[test]
    fn check_reporting() {
        let ok = err_check("a", Ok(1e-9), 1e-8);
        let bad = ratio_check("b", Ok(300.0), 5.0, 200.0);
        let failed = err_check("c", Err(Error::BasisMismatch), 1.0);
        assert!(ok.passed() && !bad.passed() && !failed.passed());
        assert!(ok.line().starts_with("PASS a err="));
        let rep = SuiteReport { name: "x".into(), checks: vec![ok.clone(), bad] };
        assert!(!rep.passed());
        assert!(rep.summary_line().starts_with("SUITE x FAIL max_err=1.000e-9"));
        let rep = SuiteReport { name: "y".into(), checks: vec![ok, failed] };
        assert_eq!(rep.max_err(), f64::INFINITY);
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["specfun", "harmonics", "geometry", "modes"] {
            let rep = run_suite(name).unwrap();
            for c in &rep.checks {
                assert!(c.passed(), "{}", c.line());
            }
        }
    }
}

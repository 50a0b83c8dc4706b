//! Spherical harmonics on the two-sphere, Wigner D-matrices and the
//! raising/lowering coefficients of contiguous hyperspherical harmonics.
//!
//! Harmonics carry no Condon-Shortley phase, so conj(Y_l^m) = Y_l^{-m}.
//! D-matrices are expressed in the same basis:
//! `D_{m'm}(R) = <Y^{m'} o R, Y^m>` and `Y^{m'}(R x) = sum_m Y^m(x) conj(D_{m'm})`.

use crate::error::{Error, Result};
use crate::specfun::{assoc_legendre, assoc_legendre_sin2_deriv, factorial};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Angular momentum pair (l, m) with |m| <= l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AngularLabel {
    pub l: u32,
    pub m: i32,
}

impl AngularLabel {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(Error::Index(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(AngularLabel { l, m })
    }
}

/// ZYZ Euler angles; the rotation is Rz(alpha) Ry(beta) Rz(gamma).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    pub fn inverse(&self) -> Self {
        EulerAngles { alpha: -self.gamma, beta: -self.beta, gamma: -self.alpha }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let rz = |a: f64| [[a.cos(), -a.sin(), 0.0], [a.sin(), a.cos(), 0.0], [0.0, 0.0, 1.0]];
        let ry = |b: f64| [[b.cos(), 0.0, b.sin()], [0.0, 1.0, 0.0], [-b.sin(), 0.0, b.cos()]];
        matmul(&matmul(&rz(self.alpha), &ry(self.beta)), &rz(self.gamma))
    }

    /// Applies the rotation to a vector.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let m = self.matrix();
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Spherical angles (theta, phi) of a nonzero vector.
pub fn angles_of(v: [f64; 3]) -> (f64, f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    ((v[2] / r).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

/// Unit vector with spherical angles (theta, phi).
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn norm_lm(l: u32, am: u32) -> f64 {
    ((2 * l + 1) as f64 * factorial(l - am) / (4.0 * PI * factorial(l + am))).sqrt()
}

/// Y_l^m(theta, phi) = N_l^{|m|} e^{i m phi} P_l^{|m|}(cos theta).
pub fn sph_harm(label: AngularLabel, theta: f64, phi: f64) -> Result<Complex64> {
    let am = label.m.unsigned_abs();
    if am > label.l {
        return Err(Error::Index(format!("|m| = {am} exceeds l = {}", label.l)));
    }
    let p = assoc_legendre(am as i32, label.l, theta.cos())?;
    Ok(Complex64::from_polar(norm_lm(label.l, am) * p, label.m as f64 * phi))
}

/// (1 - cos^2 theta) dY_l^m / d(cos theta), evaluated analytically.
pub fn sph_harm_sin2_dcos(label: AngularLabel, theta: f64, phi: f64) -> Result<Complex64> {
    let am = label.m.unsigned_abs();
    let dp = assoc_legendre_sin2_deriv(am, label.l, theta.cos())?;
    Ok(Complex64::from_polar(norm_lm(label.l, am) * dp, label.m as f64 * phi))
}

/// Raising and lowering coefficients of contiguous (hyper)spherical harmonics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContiguousCoeffs {
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
}

/// Coefficients for cos(theta_{d-1}) Y and (1 - cos^2) dY/dcos in terms of
/// harmonics with l -> l -+ 1. `sub` is m for d = 3 and l_{d-2} for d > 3.
pub fn contiguous_coeffs(d: u32, l: u32, sub: i32) -> Result<ContiguousCoeffs> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::Domain(format!("d = {d} must be odd and >= 3")));
    }
    let s = sub.unsigned_abs();
    if s > l || (d > 3 && sub < 0) {
        return Err(Error::Index(format!("sub = {sub} incompatible with l = {l}")));
    }
    let (l, s, d) = (l as f64, s as f64, d as f64);
    let kappa_minus = if l == 0.0 || l == s {
        0.0
    } else {
        ((l - s) * (l + s + d - 3.0) / ((2.0 * l + d - 4.0) * (2.0 * l + d - 2.0))).sqrt()
    };
    let kappa_plus = ((l - s + 1.0) * (l + s + d - 2.0) / ((2.0 * l + d - 2.0) * (2.0 * l + d))).sqrt();
    Ok(ContiguousCoeffs {
        kappa_minus,
        kappa_plus,
        delta_minus: (l + d - 2.0) * kappa_minus,
        delta_plus: -l * kappa_plus,
    })
}

/// Wigner D-matrix for angular momentum l; entries indexed by m' (row) and m
/// (column), both running over -l..=l in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMatrix {
    pub l: u32,
    pub data: Vec<Complex64>,
}

impl WignerMatrix {
    fn dim(&self) -> usize {
        2 * self.l as usize + 1
    }

    pub fn get(&self, m_row: i32, m_col: i32) -> Complex64 {
        let l = self.l as i32;
        let n = self.dim();
        self.data[(m_row + l) as usize * n + (m_col + l) as usize]
    }

    pub fn conj_transpose(&self) -> WignerMatrix {
        let n = self.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        WignerMatrix { l: self.l, data }
    }
}

/// Small-d matrix d^l_{m'm}(beta) from the factorial sum.
fn small_d(l: i32, mp: i32, m: i32, beta: f64) -> f64 {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = (factorial((l + mp) as u32) * factorial((l - mp) as u32) * factorial((l + m) as u32) * factorial((l - m) as u32)).sqrt();
    let kmin = 0.max(m - mp);
    let kmax = (l + m).min(l - mp);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let sign = if (k - m + mp) % 2 == 0 { 1.0 } else { -1.0 };
        let den = factorial((l + m - k) as u32) * factorial(k as u32) * factorial((l - k - mp) as u32) * factorial((k - m + mp) as u32);
        sum += sign * c.powi(2 * l + m - mp - 2 * k) * s.powi(2 * k - m + mp) / den;
    }
    pre * sum
}

/// Phase relating Condon-Shortley harmonics to the phase-free ones used here.
fn cs_phase(m: i32) -> f64 {
    if m > 0 && m % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

pub fn wigner_d(l: u32, angles: EulerAngles) -> WignerMatrix {
    let li = l as i32;
    let n = 2 * l as usize + 1;
    let mut data = Vec::with_capacity(n * n);
    for mp in -li..=li {
        for m in -li..=li {
            let phase = Complex64::from_polar(1.0, -(mp as f64) * angles.alpha - m as f64 * angles.gamma);
            data.push(phase * small_d(li, mp, m, angles.beta) * cs_phase(mp) * cs_phase(m));
        }
    }
    WignerMatrix { l, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::AngularGrid;
    use proptest::prelude::*;

    fn y(l: u32, m: i32, t: f64, p: f64) -> Complex64 {
        sph_harm(AngularLabel::new(l, m).unwrap(), t, p).unwrap()
    }

    #[test]
    fn harmonic_examples() {
        let v = y(0, 0, 0.3, 1.1);
        assert!((v.re - 0.282_094_791_773_878_14).abs() < 1e-15 && v.im == 0.0);
        let pairs = [(0.1, 0.2), (0.5, 2.0), (1.0, -1.0), (1.5, 3.0), (2.0, 0.7), (2.5, 5.5), (3.0, 1.2), (0.7, 4.4), (1.9, -2.2), (2.9, 0.0)];
        for &(t, p) in &pairs {
            assert!((y(2, 1, t, p).conj() - y(2, -1, t, p)).norm() < 1e-15);
        }
        let g = AngularGrid::new(64, 128);
        let norm: f64 = g.nodes().map(|(t, p, w)| w * y(1, 0, t, p).norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(matches!(sph_harm(AngularLabel { l: 1, m: 2 }, 0.1, 0.1), Err(Error::Index(_))));
    }

    #[test]
    fn orthonormality() {
        let g = AngularGrid::new(8, 13);
        for l in 0..=5u32 {
            for m in -(l as i32)..=l as i32 {
                for lp in 0..=5u32 {
                    for mp in -(lp as i32)..=lp as i32 {
                        let v: Complex64 = g.nodes().map(|(t, p, w)| w * y(lp, mp, t, p).conj() * y(l, m, t, p)).sum();
                        let e = if l == lp && m == mp { 1.0 } else { 0.0 };
                        assert!((v - e).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn contiguous_examples() {
        let c = contiguous_coeffs(3, 0, 0).unwrap();
        assert_eq!((c.kappa_minus, c.delta_minus), (0.0, 0.0));
        let c = contiguous_coeffs(3, 1, 0).unwrap();
        assert!((c.kappa_minus - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let a = contiguous_coeffs(5, 3, 1).unwrap();
        let b = contiguous_coeffs(5, 2, 1).unwrap();
        assert!((a.kappa_minus - b.kappa_plus).abs() < 1e-15);
        assert!(contiguous_coeffs(4, 1, 0).is_err());
        let top = contiguous_coeffs(5, 3, 3).unwrap();
        assert_eq!((top.kappa_minus, top.delta_minus), (0.0, 0.0));
        let ext = contiguous_coeffs(3, 2, -2).unwrap();
        assert_eq!(ext.kappa_minus, 0.0);
    }

    #[test]
    fn contiguous_relations_two_sphere() {
        for l in 0..=6u32 {
            for m in -(l as i32)..=l as i32 {
                let c = contiguous_coeffs(3, l, m).unwrap();
                assert!((c.delta_minus - (l + 1) as f64 * c.kappa_minus).abs() < 1e-15);
                for i in 0..20 {
                    for j in 0..20 {
                        let t = 0.05 + 3.0 * i as f64 / 19.0;
                        let p = 6.0 * j as f64 / 19.0;
                        let lower = if l > 0 && m.unsigned_abs() < l { y(l - 1, m, t, p) } else { Complex64::new(0.0, 0.0) };
                        let upper = y(l + 1, m, t, p);
                        let lhs = t.cos() * y(l, m, t, p);
                        assert!((lhs - c.kappa_minus * lower - c.kappa_plus * upper).norm() < 1e-10);
                        let lhs = sph_harm_sin2_dcos(AngularLabel::new(l, m).unwrap(), t, p).unwrap();
                        assert!((lhs - c.delta_minus * lower - c.delta_plus * upper).norm() < 1e-10);
                    }
                }
            }
        }
    }

    /// Gegenbauer factor of the hyperspherical harmonic in the last angle.
    fn hyper_factor(d: u32, l: u32, s: u32, x: f64) -> f64 {
        let lam = s as f64 + d as f64 / 2.0 - 1.0;
        (1.0 - x * x).powf(s as f64 / 2.0) * crate::specfun::gegenbauer_c(lam, l - s, x)
    }

    #[test]
    fn contiguous_relations_higher_dimension() {
        // The general-d coefficients act on the unnormalized Gegenbauer factors
        // after restoring the normalization ratio of the neighbours.
        for &d in &[5u32, 7] {
            for l in 1..=5u32 {
                for s in 0..l {
                    let c = contiguous_coeffs(d, l, s as i32).unwrap();
                    let nrm = |ll: u32| {
                        let h = |x: f64| hyper_factor(d, ll, s, x);
                        // weight (1-x^2)^{(d-3)/2} on [-1,1]
                        let r = crate::quadrature::gauss_legendre(40, -1.0, 1.0);
                        r.integrate(|x| h(x).powi(2) * (1.0 - x * x).powf((d as f64 - 3.0) / 2.0)).sqrt()
                    };
                    let f = |ll: u32, x: f64| hyper_factor(d, ll, s, x) / nrm(ll);
                    for &x in &[-0.7, -0.2, 0.3, 0.85] {
                        let lower = if s < l { f(l - 1, x) } else { 0.0 };
                        let upper = f(l + 1, x);
                        assert!((x * f(l, x) - c.kappa_minus * lower - c.kappa_plus * upper).abs() < 1e-10);
                        let hh = 1e-3;
                        let dfdx = (f(l, x - 2.0 * hh) - 8.0 * f(l, x - hh) + 8.0 * f(l, x + hh) - f(l, x + 2.0 * hh)) / (12.0 * hh);
                        let lhs = (1.0 - x * x) * dfdx;
                        assert!((lhs - c.delta_minus * lower - c.delta_plus * upper).abs() < 1e-8, "d={d} l={l} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn wigner_identity_and_inverse() {
        let id = wigner_d(1, EulerAngles::new(0.0, 0.0, 0.0));
        for i in -1..=1 {
            for j in -1..=1 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - e).norm() < 1e-15);
            }
        }
        let a = EulerAngles::new(0.4, 1.1, -2.3);
        let d = wigner_d(3, a);
        let di = wigner_d(3, a.inverse());
        let dh = d.conj_transpose();
        for i in -3..=3 {
            for j in -3..=3 {
                assert!((di.get(i, j) - dh.get(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn wigner_matches_rotation_rule() {
        // Y^{m'}(R x) = sum_m Y^m(x) conj(D_{m'm}), and D_{m'm} = <Y^{m'} o R, Y^m>.
        let a = EulerAngles::new(0.7, 1.3, -0.4);
        let l = 3u32;
        let d = wigner_d(l, a);
        let mut max_dev: f64 = 0.0;
        for i in 0..12 {
            for j in 0..12 {
                let t = 0.1 + 2.9 * i as f64 / 11.0;
                let p = 6.2 * j as f64 / 11.0;
                let (tr, pr) = angles_of(a.rotate(unit_vector(t, p)));
                for mp in -3..=3 {
                    let lhs = y(l, mp, tr, pr);
                    let rhs: Complex64 = (-3..=3).map(|m| y(l, m, t, p) * d.get(mp, m).conj()).sum();
                    max_dev = max_dev.max((lhs - rhs).norm());
                }
            }
        }
        assert!(max_dev < 1e-10, "{max_dev}");
        let g = AngularGrid::new(8, 13);
        for mp in -3..=3 {
            for m in -3..=3 {
                let v: Complex64 = g
                    .nodes()
                    .map(|(t, p, w)| {
                        let (tr, pr) = angles_of(a.rotate(unit_vector(t, p)));
                        w * y(l, mp, tr, pr).conj() * y(l, m, t, p)
                    })
                    .sum();
                assert!((v - d.get(mp, m)).norm() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn wigner_completeness(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, l in 0u32..5) {
            let d = wigner_d(l, EulerAngles::new(a, b, c));
            let li = l as i32;
            for m1 in -li..=li {
                for m2 in -li..=li {
                    let s: Complex64 = (-li..=li).map(|m| d.get(m1, m) * d.get(m2, m).conj()).sum();
                    let e = if m1 == m2 { 1.0 } else { 0.0 };
                    prop_assert!((s - e).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn conjugation_rule(l in 0u32..8, mm in 0u32..8, t in 0.0f64..3.14159, p in -7.0f64..7.0) {
            let m = (mm.min(l)) as i32;
            prop_assert!((y(l, m, t, p).conj() - y(l, -m, t, p)).norm() < 1e-14);
        }

        #[test]
        fn raising_lowering_link(d in prop::sample::select(vec![3u32, 5, 7, 9]), l in 0u32..10, s in 0u32..10) {
            let s = s.min(l);
            let lo = contiguous_coeffs(d, l + 1, s as i32).unwrap();
            let hi = contiguous_coeffs(d, l, s as i32).unwrap();
            prop_assert!((lo.kappa_minus - hi.kappa_plus).abs() < 1e-14);
            prop_assert!((hi.delta_plus + l as f64 * hi.kappa_plus).abs() < 1e-14);
            prop_assert!((hi.delta_minus - (l + d - 2) as f64 * hi.kappa_minus).abs() < 1e-14);
        }
    }
}

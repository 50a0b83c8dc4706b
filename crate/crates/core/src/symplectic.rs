//! Symplectic structures on equal-time slices and equal-radius hypercylinders
//! in quadrature and momentum form, and the symplectic potential.
//!
//! Orientation: Sigma_t carries the outward normal +t of the region below it,
//! Sigma_rho the outward normal +rho of the rod inside it. With the potential
//! theta_phi(eta) = int eta n_mu dL/d(d_mu phi), the structure is
//! omega(eta, zeta) = (theta_eta(zeta) - theta_zeta(eta)) / 2.

use crate::error::{Error, Result};
use crate::expansions::{slice_jet, slice_rule, tube_jet, AnyRep, Jet, SliceRep, TubeBasis, TubeRep};
use crate::geometry::{AdsParams, Region, SpacetimePoint};
use crate::modes::{magic_frequency, norm_constant, Branch};
use crate::quadrature::AngularGrid;
use num_complex::Complex64;
use std::f64::consts::PI;

type C64 = Complex64;

/// Value of a symplectic form.
pub type SymplecticValue = Complex64;

fn r_factor(params: &AdsParams) -> f64 {
    params.r.powi(params.d as i32 - 1)
}

fn slice_lmax(reps: &[&SliceRep]) -> u32 {
    reps.iter().flat_map(|r| r.coeffs.keys().map(|k| k.1)).max().unwrap_or(0)
}

fn tube_lmax(reps: &[&TubeRep]) -> u32 {
    reps.iter().flat_map(|r| r.coeffs.keys().map(|k| k.1)).max().unwrap_or(0)
}

/// Integrates f(jet_eta, jet_zeta) * tan^{d-1} over Sigma_{t0}.
fn slice_integral(eta: &SliceRep, zeta: &SliceRep, t0: f64, params: &AdsParams, f: impl Fn(&Jet, &Jet) -> C64) -> Result<C64> {
    let rule = slice_rule();
    let ang = AngularGrid::for_lmax(slice_lmax(&[eta, zeta]));
    let mut total = C64::default();
    for (&rho, &wr) in rule.nodes.iter().zip(&rule.weights) {
        let mut ring = C64::default();
        for (th, ph, wa) in ang.nodes() {
            let p = SpacetimePoint::from_angles(t0, rho, th, ph);
            ring += f(&slice_jet(eta, &p, params)?, &slice_jet(zeta, &p, params)?) * wa;
        }
        total += ring * wr * rho.tan().powi(params.d as i32 - 1);
    }
    Ok(total * r_factor(params))
}

/// -1/2 int drho dOmega R^{d-1} tan^{d-1} (eta d_t zeta - zeta d_t eta) at t0.
pub fn omega_slice_quadrature(eta: &SliceRep, zeta: &SliceRep, t0: f64, params: &AdsParams) -> Result<SymplecticValue> {
    Ok(-0.5 * slice_integral(eta, zeta, t0, params, |e, z| e.value * z.dt - z.value * e.dt)?)
}

/// i sum w R^{d-1} N (conj(eta^-) zeta^+ - eta^+ conj(zeta^-)).
pub fn omega_slice_momentum(eta: &SliceRep, zeta: &SliceRep, params: &AdsParams) -> Result<SymplecticValue> {
    let mut total = C64::default();
    for (&(n, l, m), &(ep, emc)) in &eta.coeffs {
        let Some(&(zp, zmc)) = zeta.coeffs.get(&(n, l, m)) else { continue };
        let w = magic_frequency(Branch::Plus, n, l, params);
        total += (emc * zp - ep * zmc) * w * norm_constant(Branch::Plus, n, l, params)?;
    }
    Ok(C64::new(0.0, r_factor(params)) * total)
}

/// Integrates f(jet_eta, jet_zeta) over Sigma_{rho0} for one time window.
fn tube_integral(eta: &TubeRep, zeta: &TubeRep, rho0: f64, params: &AdsParams, f: impl Fn(&Jet, &Jet) -> C64) -> Result<C64> {
    if eta.grid != zeta.grid {
        return Err(Error::BasisMismatch);
    }
    let kmax = eta.coeffs.keys().chain(zeta.coeffs.keys()).map(|k| k.0.abs()).max().unwrap_or(0);
    let n_t = (2 * kmax + 1) as usize;
    let dt = eta.grid.period() / n_t as f64;
    let ang = AngularGrid::for_lmax(tube_lmax(&[eta, zeta]));
    let mut total = C64::default();
    for j in 0..n_t {
        for (th, ph, wa) in ang.nodes() {
            let p = SpacetimePoint::from_angles(j as f64 * dt, rho0, th, ph);
            total += f(&tube_jet(eta, &p, params)?, &tube_jet(zeta, &p, params)?) * wa;
        }
    }
    Ok(total * dt * r_factor(params) * rho0.tan().powi(params.d as i32 - 1))
}

/// 1/2 int dt dOmega R^{d-1} tan^{d-1} rho0 (eta d_rho zeta - zeta d_rho eta)
/// over one time window.
pub fn omega_tube_quadrature(eta: &TubeRep, zeta: &TubeRep, rho0: f64, params: &AdsParams) -> Result<SymplecticValue> {
    Ok(0.5 * tube_integral(eta, zeta, rho0, params, |e, z| e.value * z.drho - z.value * e.drho)?)
}

/// pi R^{d-1} d_omega sum (eta^a_{k,l,m} zeta^b_{-k,l,-m} - eta^b zeta^a) W_l.
pub fn omega_tube_momentum(eta: &TubeRep, zeta: &TubeRep, params: &AdsParams) -> Result<SymplecticValue> {
    if eta.basis != zeta.basis || eta.grid != zeta.grid {
        return Err(Error::BasisMismatch);
    }
    let mut total = C64::default();
    for (&(k, l, m), &(ea, eb)) in &eta.coeffs {
        let Some(&(za, zb)) = zeta.coeffs.get(&(-k, l, -m)) else { continue };
        total += (ea * zb - eb * za) * eta.basis.wronskian(l, params);
    }
    Ok(total * PI * r_factor(params) * eta.grid.d_omega)
}

/// Hypersurface carrying a symplectic potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hypersurface {
    EqualTime(f64),
    EqualRadius(f64),
}

fn as_slice(rep: &AnyRep) -> Result<&SliceRep> {
    match rep {
        AnyRep::Slice(r) => Ok(r),
        _ => Err(Error::BasisMismatch),
    }
}

fn as_tube(rep: &AnyRep) -> Result<TubeRep> {
    match rep {
        AnyRep::Tube(r) => Ok(r.clone()),
        AnyRep::Rod(r) => Ok(r.to_tube()),
        AnyRep::Slice(_) => Err(Error::BasisMismatch),
    }
}

/// theta_phi(eta) = int_Sigma eta n_mu dL/d(d_mu phi) with
/// L = sqrt|g| (-g^{mu nu} d_mu phi d_nu phi - m^2 phi^2) / 2.
pub fn symplectic_potential(surface: Hypersurface, phi: &AnyRep, eta: &AnyRep, params: &AdsParams) -> Result<C64> {
    match surface {
        // dL/d(d_t phi) = R^{d-1} tan^{d-1} d_t phi
        Hypersurface::EqualTime(t0) => slice_integral(as_slice(phi)?, as_slice(eta)?, t0, params, |f, e| e.value * f.dt),
        // dL/d(d_rho phi) = -R^{d-1} tan^{d-1} d_rho phi
        Hypersurface::EqualRadius(rho0) => {
            let (f, e) = (as_tube(phi)?, as_tube(eta)?);
            Ok(-tube_integral(&f, &e, rho0, params, |f, e| e.value * f.drho)?)
        }
    }
}

/// Symplectic potential of the whole boundary of a region, each component
/// with its outward orientation.
pub fn region_potential(region: Region, phi: &AnyRep, eta: &AnyRep, params: &AdsParams) -> Result<C64> {
    let th = |s| symplectic_potential(s, phi, eta, params);
    match region {
        Region::Slice { t1, t2 } => Ok(th(Hypersurface::EqualTime(t2))? - th(Hypersurface::EqualTime(t1))?),
        Region::Rod { rho0 } => th(Hypersurface::EqualRadius(rho0)),
        Region::Tube { rho1, rho2 } => Ok(th(Hypersurface::EqualRadius(rho2))? - th(Hypersurface::EqualRadius(rho1))?),
    }
}

/// (theta_eta(zeta) - theta_zeta(eta)) / 2.
pub fn antisymmetrized_potential(surface: Hypersurface, eta: &AnyRep, zeta: &AnyRep, params: &AdsParams) -> Result<C64> {
    Ok(0.5 * (symplectic_potential(surface, eta, zeta, params)? - symplectic_potential(surface, zeta, eta, params)?))
}

/// Tube form on Sigma_{rho0} for reps in possibly different bases.
pub fn omega_tube(eta: &TubeRep, zeta: &TubeRep, params: &AdsParams) -> Result<SymplecticValue> {
    if eta.basis == zeta.basis {
        return omega_tube_momentum(eta, zeta, params);
    }
    let to_s = |r: &TubeRep| if r.basis == TubeBasis::S { Ok(r.clone()) } else { crate::expansions::c_to_s(r, params) };
    omega_tube_momentum(&to_s(eta)?, &to_s(zeta)?, params)
}

//! Isometry actions on momentum representations: finite time translations and
//! rotations, infinitesimal d-boosts with numerically extracted shift
//! coefficients, and checks of symplectic invariance.
//!
//! An isometry k acts on fields by pullback, (k |> phi)(x) = phi(k^{-1} x), so
//! a generator acts as K |> phi = -K phi with K the Killing vector field.
//!
//! Boost coefficients are stored per source label. For a tube source
//! (w, l, m) in channel a or b, with s grid steps per unit frequency,
//!
//! ```text
//! K_0d    |> mu_{w,l} = (i/2) [z-- mu_{w-1,l-1} + z-+ mu_{w-1,l+1} + zt+- mu_{w+1,l-1} + zt++ mu_{w+1,l+1}]
//! K_d+1,d |> mu_{w,l} = (1/2) [z-- mu_{w-1,l-1} + z-+ mu_{w-1,l+1} - zt+- mu_{w+1,l-1} - zt++ mu_{w+1,l+1}]
//! ```
//!
//! and for a slice source (n, l, m) the targets of [z0-, z-+, zt+-, zt0+] are
//! (n, l-1), (n-1, l+1), (n+1, l-1), (n, l+1). The conj(phi^-) channel uses
//! the complex conjugate weights since both generators are real vector fields.

use crate::error::{Error, Result};
use crate::expansions::{c_to_s, s_to_c, AnyRep, OmegaGrid, SliceCutoffs, SliceRep, TubeBasis, TubeRep, TubeWindow};
use crate::geometry::{killing_components, AdsParams, GeneratorId, SpacetimePoint};
use crate::harmonics::{sph_harm, sph_harm_sin2_dcos, wigner_d, AngularLabel, EulerAngles};
use crate::modes::{jacobi_radial_with_deriv, magic_frequency, norm_constant, Branch, RadialKind, RadialSet};
use crate::quadrature::{tanh_sinh, AngularGrid};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

// ---------------------------------------------------------------------------
// Finite actions

/// Finite time translation t -> t + delta_t.
pub fn act_time_translation(rep: &AnyRep, delta_t: f64, params: &AdsParams) -> AnyRep {
    match rep {
        AnyRep::Slice(r) => {
            let mut out = r.clone();
            for (&(n, l, _), v) in out.coeffs.iter_mut() {
                let ph = C64::from_polar(1.0, magic_frequency(Branch::Plus, n, l, params) * delta_t);
                *v = (v.0 * ph, v.1 * ph.conj());
            }
            AnyRep::Slice(out)
        }
        AnyRep::Tube(r) => {
            let mut out = r.clone();
            for (&(k, _, _), v) in out.coeffs.iter_mut() {
                let ph = C64::from_polar(1.0, r.grid.omega(k) * delta_t);
                *v = (v.0 * ph, v.1 * ph);
            }
            AnyRep::Tube(out)
        }
        AnyRep::Rod(r) => {
            let mut out = r.clone();
            for (&(k, _, _), v) in out.coeffs.iter_mut() {
                *v *= C64::from_polar(1.0, r.grid.omega(k) * delta_t);
            }
            AnyRep::Rod(out)
        }
    }
}

/// Mixes the m-components of every (label, l) block: out_m = sum_{m'} c_{m'} w(m', m).
fn mix_blocks<K: Ord + Copy, V: Copy>(
    coeffs: &BTreeMap<(K, u32, i32), V>,
    zero: V,
    mut mix: impl FnMut(u32, i32, i32, V, &mut V),
) -> BTreeMap<(K, u32, i32), V> {
    let mut out = BTreeMap::new();
    for (&(k, l, mp), &c) in coeffs {
        for m in -(l as i32)..=l as i32 {
            let e = out.entry((k, l, m)).or_insert(zero);
            mix(l, mp, m, c, e);
        }
    }
    out
}

/// Finite rotation R: (R |> phi)(t, rho, x) = phi(t, rho, R^{-1} x). Only d = 3.
pub fn act_rotation(rep: &AnyRep, angles: EulerAngles, params: &AdsParams) -> Result<AnyRep> {
    params.require_d3()?;
    let inv = angles.inverse();
    let l_max = match rep {
        AnyRep::Slice(r) => r.coeffs.keys().map(|k| k.1).max(),
        AnyRep::Tube(r) => r.coeffs.keys().map(|k| k.1).max(),
        AnyRep::Rod(r) => r.coeffs.keys().map(|k| k.1).max(),
    };
    let ds: Vec<_> = (0..=l_max.unwrap_or(0)).map(|l| wigner_d(l, inv)).collect();
    let w = |l: u32, mp: i32, m: i32| ds[l as usize].get(mp, m).conj();
    Ok(match rep {
        AnyRep::Slice(r) => AnyRep::Slice(SliceRep {
            coeffs: mix_blocks(&r.coeffs, (C64::default(), C64::default()), |l, mp, m, c, e| {
                let x = w(l, mp, m);
                e.0 += c.0 * x;
                e.1 += c.1 * x.conj();
            }),
        }),
        AnyRep::Tube(r) => AnyRep::Tube(TubeRep {
            grid: r.grid,
            basis: r.basis,
            coeffs: mix_blocks(&r.coeffs, (C64::default(), C64::default()), |l, mp, m, c, e| {
                let x = w(l, mp, m);
                e.0 += c.0 * x;
                e.1 += c.1 * x;
            }),
        }),
        AnyRep::Rod(r) => {
            let mut out = r.clone();
            out.coeffs = mix_blocks(&r.coeffs, C64::default(), |l, mp, m, c, e| *e += c * w(l, mp, m));
            AnyRep::Rod(out)
        }
    })
}

// ---------------------------------------------------------------------------
// Boost coefficient tables

/// Label space a boost table is extracted over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelSpace {
    Tube { grid: OmegaGrid, window: TubeWindow },
    Slice(SliceCutoffs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    A,
    B,
    Plus,
}

impl Channel {
    fn name(self) -> &'static str {
        match self {
            Channel::A => "a",
            Channel::B => "b",
            Channel::Plus => "plus",
        }
    }
}

/// Target offset of one of the four shift coefficients of a source label.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Shift {
    /// Label step (in grid steps of one unit of frequency for tubes, in n for slices).
    dk: i64,
    dl: i32,
    raising: bool,
    name: &'static str,
}

fn shifts(space: &LabelSpace) -> Result<[Shift; 4]> {
    let sh = |dk, dl, raising, name| Shift { dk, dl, raising, name };
    Ok(match space {
        LabelSpace::Tube { grid, .. } => {
            let s = grid.unit_steps()?;
            [sh(-s, -1, false, "z--"), sh(-s, 1, false, "z-+"), sh(s, -1, true, "zt+-"), sh(s, 1, true, "zt++")]
        }
        LabelSpace::Slice(_) => [sh(0, -1, false, "z0-"), sh(-1, 1, false, "z-+"), sh(1, -1, true, "zt+-"), sh(0, 1, true, "zt0+")],
    })
}

/// Boost shift coefficients per source label, in the order of the module
/// documentation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostCoeffTable {
    pub space: LabelSpace,
    pub coeffs: BTreeMap<(Channel, i64, u32, i32), [C64; 4]>,
    /// Largest off-contiguous leakage relative to the contiguous content.
    pub max_leakage: f64,
}

impl BoostCoeffTable {
    /// Coefficient by name at a source label; zero outside the table.
    pub fn get(&self, channel: Channel, k: i64, l: i64, m: i32, name: &str) -> Result<C64> {
        let idx = shifts(&self.space)?.iter().position(|s| s.name == name).ok_or_else(|| Error::Index(format!("unknown coefficient {name}")))?;
        if l < 0 {
            return Ok(C64::default());
        }
        Ok(self.coeffs.get(&(channel, k, l as u32, m)).map_or(C64::default(), |c| c[idx]))
    }

    /// CSV rows `kind,channel,coeff,k_or_n,l,m,re,im`.
    pub fn to_csv(&self) -> Result<String> {
        let kind = match self.space {
            LabelSpace::Tube { .. } => "tube",
            LabelSpace::Slice(_) => "slice",
        };
        let names = shifts(&self.space)?;
        let mut s = String::from("kind,channel,coeff,k_or_n,l,m,re,im\n");
        for (&(ch, k, l, m), c) in &self.coeffs {
            for (sh, v) in names.iter().zip(c) {
                s.push_str(&format!("{kind},{},{},{k},{l},{m},{:.15e},{:.15e}\n", ch.name(), sh.name, v.re, v.im));
            }
        }
        Ok(s)
    }
}

fn require_d_boost(gen: GeneratorId, params: &AdsParams) -> Result<()> {
    params.require_d3()?;
    match gen {
        GeneratorId::Boost0(3) | GeneratorId::BoostD1(3) => Ok(()),
        _ => Err(Error::InvalidParameter(format!("{gen:?} is not a d-boost"))),
    }
}

/// Coefficient of the sin^2(theta) d/dcos(theta) term of a d-boost.
fn sphere_scale(gen: GeneratorId, t: f64, rho: f64) -> f64 {
    match gen {
        GeneratorId::Boost0(_) => -t.sin() / rho.sin(),
        _ => t.cos() / rho.sin(),
    }
}

/// Projections of -K mu for a single mode mu = e^{-i w t} Y_l^m f(rho) onto
/// e^{-i (w + dw) t} Y_{l+dl}^m, per target and radius.
struct BoostProjector {
    gen: GeneratorId,
    times: Vec<f64>,
    angular: AngularGrid,
}

impl BoostProjector {
    fn new(gen: GeneratorId, l_max: u32) -> Self {
        let n_t = 4;
        BoostProjector { gen, times: (0..n_t).map(|j| 2.0 * PI * j as f64 / n_t as f64).collect(), angular: AngularGrid::for_lmax(l_max + 3) }
    }

    fn project(&self, omega: f64, l: u32, m: i32, radii: &[f64], radial: &[(f64, f64)], targets: &[(i32, i32)]) -> Result<Vec<Vec<C64>>> {
        let src = AngularLabel::new(l, m)?;
        let nodes: Vec<(f64, f64, f64)> = self.angular.nodes().collect();
        let mut ys = Vec::with_capacity(nodes.len());
        for &(th, ph, _) in &nodes {
            ys.push((sph_harm(src, th, ph)?, sph_harm_sin2_dcos(src, th, ph)?));
        }
        let mut conj_targets = Vec::with_capacity(targets.len());
        for &(_, dl) in targets {
            let lt = l as i32 + dl;
            let row: Vec<C64> = if lt < m.abs() {
                vec![C64::default(); nodes.len()]
            } else {
                let lab = AngularLabel::new(lt as u32, m)?;
                nodes.iter().map(|&(th, ph, w)| sph_harm(lab, th, ph).map(|y| y.conj() * w)).collect::<Result<_>>()?
            };
            conj_targets.push(row);
        }
        let mut out = vec![vec![C64::default(); radii.len()]; targets.len()];
        let n_t = self.times.len() as f64;
        for (ir, (&rho, &(f, df))) in radii.iter().zip(radial).enumerate() {
            for &t in &self.times {
                let e = C64::from_polar(1.0, -omega * t);
                let s = sphere_scale(self.gen, t, rho);
                let mut ang = vec![C64::default(); targets.len()];
                for (ia, &(th, ph, _)) in nodes.iter().enumerate() {
                    let c = killing_components(self.gen, &SpacetimePoint::from_angles(t, rho, th, ph))?;
                    let (y, dy) = ys[ia];
                    let minus_k = -e * (c.dt * C64::new(0.0, -omega) * y * f + c.drho * y * df + s * dy * f);
                    for (a, row) in ang.iter_mut().zip(&conj_targets) {
                        *a += row[ia] * minus_k;
                    }
                }
                for ((o, a), &(dw, _)) in out.iter_mut().zip(&ang).zip(targets) {
                    o[ir] += C64::from_polar(1.0, (omega + dw as f64) * t) * a / n_t;
                }
            }
        }
        Ok(out)
    }
}

/// Converts a projection onto a shift target into the shift coefficient.
fn to_coefficient(gen: GeneratorId, raising: bool, proj: C64) -> C64 {
    match gen {
        GeneratorId::Boost0(_) => -2.0 * I * proj,
        _ if raising => -2.0 * proj,
        _ => 2.0 * proj,
    }
}

const FIT_RADII: [f64; 2] = [0.4, 0.9];
const CHECK_RADII: [f64; 2] = [0.65, 1.0];
const LEAK_TOL: f64 = 1e-6;
/// Leakage is measured against the source mode when the boost nearly annihilates it.
const SOURCE_FLOOR: f64 = 1e-3;

fn leakage_targets() -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for dw in -2..=2 {
        for dl in -2..=2 {
            v.push((dw, dl));
        }
    }
    v
}

fn extract_tube(gen: GeneratorId, grid: OmegaGrid, window: &TubeWindow, params: &AdsParams) -> Result<BoostCoeffTable> {
    let space = LabelSpace::Tube { grid, window: *window };
    let sh = shifts(&space)?;
    let radii = [FIT_RADII[0], FIT_RADII[1], CHECK_RADII[0], CHECK_RADII[1]];
    let targets = leakage_targets();
    let proj = BoostProjector::new(gen, window.l_max);
    let mut coeffs = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for (k, l, m) in window.labels() {
        let w = grid.omega(k);
        let mut set = RadialSet::new(w, l, params);
        for (channel, kind) in [(Channel::A, RadialKind::Sa), (Channel::B, RadialKind::Sb)] {
            let radial: Vec<(f64, f64)> = radii.iter().map(|&r| set.eval(kind, r)).collect::<Result<_>>()?;
            let p = proj.project(w, l, m, &radii, &radial, &targets)?;
            let mut scale: f64 = 0.0;
            let mut leak: f64 = 0.0;
            let mut row = [C64::default(); 4];
            for (&(dw, dl), vals) in targets.iter().zip(&p) {
                let slot = sh.iter().position(|s| s.dk.signum() == dw.signum() as i64 && dw.abs() == 1 && s.dl == dl);
                let lt = l as i32 + dl;
                let Some(slot) = slot.filter(|_| lt >= m.abs()) else {
                    leak = leak.max(vals.iter().map(|v| v.norm()).fold(0.0, f64::max));
                    continue;
                };
                let mut tset = RadialSet::new(w + dw as f64, lt as u32, params);
                let basis: Vec<(f64, f64)> = radii
                    .iter()
                    .map(|&r| Ok((tset.eval(RadialKind::Sa, r)?.0, tset.eval(RadialKind::Sb, r)?.0)))
                    .collect::<Result<_>>()?;
                let det = basis[0].0 * basis[1].1 - basis[0].1 * basis[1].0;
                let ca = (vals[0] * basis[1].1 - vals[1] * basis[0].1) / det;
                let cb = (vals[1] * basis[0].0 - vals[0] * basis[1].0) / det;
                for (v, b) in vals.iter().zip(&basis).skip(2) {
                    leak = leak.max((v - ca * b.0 - cb * b.1).norm());
                }
                let (same, other, other_scale) = match channel {
                    Channel::A => (ca, cb, basis.iter().map(|b| b.1.abs()).fold(0.0, f64::max)),
                    _ => (cb, ca, basis.iter().map(|b| b.0.abs()).fold(0.0, f64::max)),
                };
                leak = leak.max(other.norm() * other_scale);
                scale = scale.max(vals.iter().map(|v| v.norm()).fold(0.0, f64::max));
                row[slot] = to_coefficient(gen, sh[slot].raising, same);
            }
            let src = radial.iter().map(|(f, df)| (1.0 + w.abs()) * f.abs() + df.abs()).fold(0.0, f64::max);
            let rel = leak / scale.max(SOURCE_FLOOR * src);
            if rel > LEAK_TOL {
                return Err(Error::ProjectionResidual { residual: rel, tol: LEAK_TOL });
            }
            worst = worst.max(rel);
            coeffs.insert((channel, k, l, m), row);
        }
    }
    Ok(BoostCoeffTable { space, coeffs, max_leakage: worst })
}

/// Radial rule for slice projections.
fn slice_projection_rule() -> crate::quadrature::Rule {
    tanh_sinh(0.0, PI / 2.0, 1.0 / 32.0, 4.0)
}

fn extract_slice(gen: GeneratorId, cut: SliceCutoffs, params: &AdsParams) -> Result<BoostCoeffTable> {
    let space = LabelSpace::Slice(cut);
    let sh = shifts(&space)?;
    let rule = slice_projection_rule();
    let weights: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(r, w)| w * r.tan().powi(params.d as i32 - 1)).collect();
    let l2 = |v: &[C64]| v.iter().zip(&weights).map(|(x, w)| w * x.norm_sqr()).sum::<f64>().sqrt();
    let targets: Vec<(i32, i32)> = leakage_targets().into_iter().filter(|t| t.0.abs() <= 1).collect();
    let proj = BoostProjector::new(gen, cut.l_max);
    let mut coeffs = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for n in 0..=cut.n_max {
        for l in 0..=cut.l_max {
            let w = magic_frequency(Branch::Plus, n, l, params);
            let radial: Vec<(f64, f64)> = rule.nodes.iter().map(|&r| jacobi_radial_with_deriv(Branch::Plus, n, l, r, params)).collect::<Result<_>>()?;
            for m in -(l as i32)..=l as i32 {
                let p = proj.project(w, l, m, &rule.nodes, &radial, &targets)?;
                let mut scale: f64 = 0.0;
                let mut leak: f64 = 0.0;
                let mut row = [C64::default(); 4];
                for (&(dw, dl), vals) in targets.iter().zip(&p) {
                    let lt = l as i32 + dl;
                    // a frequency step dw at angular step dl lands on n + (dw - dl) / 2
                    let slot = sh.iter().position(|s| s.dl == dl && s.dk == ((dw - dl) / 2) as i64 && dw.abs() == 1 && (dw - dl) % 2 == 0);
                    let nt = n as i64 + ((dw - dl) / 2) as i64;
                    let valid = lt >= m.abs() && nt >= 0;
                    let Some(slot) = slot.filter(|_| valid) else {
                        leak = leak.max(l2(vals));
                        continue;
                    };
                    let jt: Vec<f64> = rule.nodes.iter().map(|&r| crate::modes::jacobi_radial(Branch::Plus, nt as u32, lt as u32, r, params)).collect::<Result<_>>()?;
                    let num: C64 = vals.iter().zip(&jt).zip(&weights).map(|((v, j), w)| v * j * w).sum();
                    let den: f64 = jt.iter().zip(&weights).map(|(j, w)| j * j * w).sum();
                    let c = num / den;
                    let resid: Vec<C64> = vals.iter().zip(&jt).map(|(v, j)| v - c * j).collect();
                    leak = leak.max(l2(&resid));
                    scale = scale.max(l2(vals));
                    row[slot] = to_coefficient(gen, sh[slot].raising, c);
                }
                let src: Vec<C64> = radial.iter().map(|(f, df)| C64::from((1.0 + w) * f.abs() + df.abs())).collect();
                let rel = leak / scale.max(SOURCE_FLOOR * l2(&src));
                if rel > LEAK_TOL {
                    return Err(Error::ProjectionResidual { residual: rel, tol: LEAK_TOL });
                }
                worst = worst.max(rel);
                coeffs.insert((Channel::Plus, n as i64, l, m), row);
            }
        }
    }
    Ok(BoostCoeffTable { space, coeffs, max_leakage: worst })
}

/// Extracts the boost shift coefficients by applying the Killing vector to
/// every single mode of the label space and projecting onto contiguous modes.
pub fn extract_boost_coeffs(space: LabelSpace, gen: GeneratorId, params: &AdsParams) -> Result<BoostCoeffTable> {
    require_d_boost(gen, params)?;
    match space {
        LabelSpace::Tube { grid, window } => extract_tube(gen, grid, &window, params),
        LabelSpace::Slice(cut) => extract_slice(gen, cut, params),
    }
}

// ---------------------------------------------------------------------------
// Boost actions

/// Weight of a shift term in K |> rep.
fn action_weight(gen: GeneratorId, raising: bool) -> C64 {
    match gen {
        GeneratorId::Boost0(_) => 0.5 * I,
        _ if raising => C64::new(-0.5, 0.0),
        _ => C64::new(0.5, 0.0),
    }
}

fn overflow(what: String) -> Error {
    Error::WindowOverflow(what)
}

/// K |> rep for a slice rep.
pub fn boost_slice(rep: &SliceRep, gen: GeneratorId, table: &BoostCoeffTable) -> Result<SliceRep> {
    let LabelSpace::Slice(cut) = table.space else { return Err(Error::BasisMismatch) };
    let sh = shifts(&table.space)?;
    let mut out = SliceRep::new();
    for (&(n, l, m), &(p, mc)) in &rep.coeffs {
        if n + 1 > cut.n_max || l + 1 > cut.l_max {
            return Err(overflow(format!("slice label ({n}, {l}, {m}) needs n < {} and l < {}", cut.n_max, cut.l_max)));
        }
        let z = table.coeffs.get(&(Channel::Plus, n as i64, l, m)).ok_or_else(|| overflow(format!("({n}, {l}, {m})")))?;
        for (s, &zv) in sh.iter().zip(z) {
            let (nt, lt) = (n as i64 + s.dk, l as i32 + s.dl);
            if nt < 0 || lt < m.abs() {
                continue;
            }
            let wgt = action_weight(gen, s.raising) * zv;
            let e = out.coeffs.entry((nt as u32, lt as u32, m)).or_default();
            e.0 += wgt * p;
            e.1 += wgt.conj() * mc;
        }
    }
    Ok(out)
}

/// K |> rep for an S-basis tube rep.
pub fn boost_tube(rep: &TubeRep, gen: GeneratorId, table: &BoostCoeffTable) -> Result<TubeRep> {
    let LabelSpace::Tube { grid, window } = table.space else { return Err(Error::BasisMismatch) };
    if rep.basis != TubeBasis::S || rep.grid != grid {
        return Err(Error::BasisMismatch);
    }
    let sh = shifts(&table.space)?;
    let s = grid.unit_steps()?;
    let mut out = TubeRep::new(grid, TubeBasis::S);
    for (&(k, l, m), &(a, b)) in &rep.coeffs {
        if k - s < window.k_min || k + s > window.k_max || l + 1 > window.l_max {
            return Err(overflow(format!("tube label ({k}, {l}, {m}) too close to the window edge")));
        }
        let za = table.coeffs.get(&(Channel::A, k, l, m)).ok_or_else(|| overflow(format!("({k}, {l}, {m})")))?;
        let zb = table.coeffs.get(&(Channel::B, k, l, m)).ok_or_else(|| overflow(format!("({k}, {l}, {m})")))?;
        for ((sft, &va), &vb) in sh.iter().zip(za).zip(zb) {
            let lt = l as i32 + sft.dl;
            if lt < m.abs() {
                continue;
            }
            let wgt = action_weight(gen, sft.raising);
            let e = out.coeffs.entry((k + sft.dk, lt as u32, m)).or_default();
            e.0 += wgt * va * a;
            e.1 += wgt * vb * b;
        }
    }
    Ok(out)
}

/// K |> rep for any representation; C-basis reps pass through the S basis.
pub fn boost_generator(rep: &AnyRep, gen: GeneratorId, table: &BoostCoeffTable, params: &AdsParams) -> Result<AnyRep> {
    require_d_boost(gen, params)?;
    Ok(match rep {
        AnyRep::Slice(r) => AnyRep::Slice(boost_slice(r, gen, table)?),
        AnyRep::Tube(r) if r.basis == TubeBasis::C => AnyRep::Tube(s_to_c(&boost_tube(&c_to_s(r, params)?, gen, table)?, params)?),
        AnyRep::Tube(r) => AnyRep::Tube(boost_tube(r, gen, table)?),
        AnyRep::Rod(r) => {
            let t = boost_tube(&r.to_tube(), gen, table)?;
            let mut out = crate::expansions::RodRep::new(r.grid);
            out.coeffs = t.coeffs.into_iter().map(|(k, v)| (k, v.0)).collect();
            AnyRep::Rod(out)
        }
    })
}

fn add_scaled(rep: &AnyRep, eps: C64, other: &AnyRep) -> Result<AnyRep> {
    let one = C64::new(1.0, 0.0);
    Ok(match (rep, other) {
        (AnyRep::Slice(a), AnyRep::Slice(b)) => AnyRep::Slice(a.combine(one, b, eps)),
        (AnyRep::Tube(a), AnyRep::Tube(b)) => AnyRep::Tube(a.combine(one, b, eps)?),
        (AnyRep::Rod(a), AnyRep::Rod(b)) => {
            let mut out = a.clone();
            for (&key, &v) in &b.coeffs {
                *out.coeffs.entry(key).or_default() += eps * v;
            }
            AnyRep::Rod(out)
        }
        _ => return Err(Error::BasisMismatch),
    })
}

/// rep + epsilon (K |> rep).
pub fn act_boost(rep: &AnyRep, gen: GeneratorId, epsilon: f64, table: &BoostCoeffTable, params: &AdsParams) -> Result<AnyRep> {
    add_scaled(rep, C64::new(epsilon, 0.0), &boost_generator(rep, gen, table, params)?)
}

/// Z |> rep with Z = K_0d + i K_{d+1,d} (lowering) or its conjugate
/// K_0d - i K_{d+1,d} (raising). Needs tables for both d-boosts.
pub fn z_generator(rep: &AnyRep, raising: bool, k0: &BoostCoeffTable, kd1: &BoostCoeffTable, params: &AdsParams) -> Result<AnyRep> {
    let a = boost_generator(rep, GeneratorId::Boost0(3), k0, params)?;
    let b = boost_generator(rep, GeneratorId::BoostD1(3), kd1, params)?;
    let sign = if raising { -I } else { I };
    match (&a, &b) {
        (AnyRep::Slice(x), AnyRep::Slice(y)) => Ok(AnyRep::Slice(x.combine(C64::new(1.0, 0.0), y, sign))),
        (AnyRep::Tube(x), AnyRep::Tube(y)) => Ok(AnyRep::Tube(x.combine(C64::new(1.0, 0.0), y, sign)?)),
        _ => Err(Error::BasisMismatch),
    }
}

// ---------------------------------------------------------------------------
// Coefficient identities

fn identity_gap(lhs: C64, rhs: C64, scale: f64) -> f64 {
    (lhs - rhs).norm() / scale.max(1e-300)
}

fn table_scale(t: &BoostCoeffTable) -> f64 {
    t.coeffs.values().flatten().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest violation, relative to the largest coefficient, of the four tube
/// identities relating a- and b-channel coefficients.
pub fn tube_identities(table: &BoostCoeffTable, params: &AdsParams) -> Result<f64> {
    let LabelSpace::Tube { grid, window } = table.space else { return Err(Error::BasisMismatch) };
    let s = grid.unit_steps()?;
    let d = params.dim();
    let scale = table_scale(table);
    let mut worst: f64 = 0.0;
    for &(ch, k, l, m) in table.coeffs.keys() {
        if ch != Channel::B || k - s < window.k_min || k + s > window.k_max || l + 1 > window.l_max {
            continue;
        }
        let (li, lf) = (l as i64, l as f64);
        let up = (2.0 * lf + d) / (2.0 * lf + d - 2.0);
        let down = (2.0 * lf + d - 4.0) / (2.0 * lf + d - 2.0);
        let g = |ch, k, l, name| table.get(ch, k, l, m, name);
        let pairs = [
            (g(Channel::A, k - s, li + 1, "zt+-")?, up * g(Channel::B, k, li, "z-+")?),
            (g(Channel::A, k - s, li - 1, "zt++")?, down * g(Channel::B, k, li, "z--")?),
            (g(Channel::A, k + s, li + 1, "z--")?, up * g(Channel::B, k, li, "zt++")?),
            (g(Channel::A, k + s, li - 1, "z-+")?, down * g(Channel::B, k, li, "zt+-")?),
        ];
        for (a, b) in pairs {
            worst = worst.max(identity_gap(a, b, scale));
        }
    }
    Ok(worst)
}

/// Largest relative violation of the two slice identities
/// w N z0-_{n,l+1} = w' N' zt0+_{nl} and w N z-+_{n+1,l-1} = w' N' zt+-_{nl}.
pub fn slice_identities(table: &BoostCoeffTable, params: &AdsParams) -> Result<f64> {
    let LabelSpace::Slice(cut) = table.space else { return Err(Error::BasisMismatch) };
    let wn = |n: u32, l: u32| -> Result<f64> { Ok(magic_frequency(Branch::Plus, n, l, params) * norm_constant(Branch::Plus, n, l, params)?) };
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut pairs = Vec::new();
    for &(_, n, l, m) in table.coeffs.keys() {
        let nu = n as u32;
        if l < cut.l_max && (m.unsigned_abs() <= l) {
            let lhs = wn(nu, l)? * table.get(Channel::Plus, n, l as i64 + 1, m, "z0-")?;
            let rhs = wn(nu, l + 1)? * table.get(Channel::Plus, n, l as i64, m, "zt0+")?;
            pairs.push((lhs, rhs));
        }
        if l >= 1 && nu < cut.n_max && m.unsigned_abs() < l {
            let lhs = wn(nu, l)? * table.get(Channel::Plus, n + 1, l as i64 - 1, m, "z-+")?;
            let rhs = wn(nu + 1, l - 1)? * table.get(Channel::Plus, n, l as i64, m, "zt+-")?;
            pairs.push((lhs, rhs));
        }
    }
    for &(a, b) in &pairs {
        scale = scale.max(a.norm()).max(b.norm());
    }
    for (a, b) in pairs {
        worst = worst.max(identity_gap(a, b, scale));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Invariance of symplectic structures

/// How an isometry acts on a representation type.
pub enum Action<'a, R> {
    /// k^{-1} |> rep for a finite isometry k.
    Finite(Box<dyn Fn(&R) -> Result<R> + 'a>),
    /// K |> rep for a generator K.
    Infinitesimal(Box<dyn Fn(&R) -> Result<R> + 'a>),
}

/// Finite: max |w(k^{-1} eta, k^{-1} zeta) - w(eta, zeta)|. Infinitesimal:
/// max |w(-K eta, zeta) + w(eta, -K zeta)|.
pub fn invariance_suite<R>(omega_fn: impl Fn(&R, &R) -> Result<C64>, pairs: &[(R, R)], action: &Action<R>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (eta, zeta) in pairs {
        let v = match action {
            Action::Finite(k) => omega_fn(&k(eta)?, &k(zeta)?)? - omega_fn(eta, zeta)?,
            Action::Infinitesimal(k) => -(omega_fn(&k(eta)?, zeta)? + omega_fn(eta, &k(zeta)?)?),
        };
        worst = worst.max(v.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::{synth, RodRep};
    use crate::fixtures;
    use crate::geometry::{killing_apply, killing_flow};
    use crate::symplectic::{omega_slice_momentum, omega_slice_quadrature, omega_tube_momentum, omega_tube_quadrature};

    fn slice_of(r: AnyRep) -> SliceRep {
        match r {
            AnyRep::Slice(s) => s,
            _ => unreachable!(),
        }
    }

    fn tube_of(r: AnyRep) -> TubeRep {
        match r {
            AnyRep::Tube(t) => t,
            _ => unreachable!(),
        }
    }

    fn test_window() -> (OmegaGrid, TubeWindow) {
        (OmegaGrid::new(0.5).unwrap(), TubeWindow { k_min: -8, k_max: 8, l_max: 3 })
    }

    #[test]
    fn time_translation() {
        let p = AdsParams::new(3, 1.0, 0.3).unwrap();
        let mut rng = fixtures::rng(61);
        let (grid, w) = test_window();
        let reps = [
            AnyRep::Slice(fixtures::slice_rep(&mut rng, 5, SliceCutoffs { n_max: 2, l_max: 2 }, false)),
            AnyRep::Tube(fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 5, false)),
            AnyRep::Rod(fixtures::rod_rep(&mut rng, grid, &w, 5)),
        ];
        for rep in &reps {
            assert_eq!(&act_time_translation(rep, 0.0, &p), rep);
            let a = act_time_translation(&act_time_translation(rep, 0.3, &p), 0.45, &p);
            let b = act_time_translation(rep, 0.75, &p);
            let diff = match (&a, &b) {
                (AnyRep::Slice(x), AnyRep::Slice(y)) => x.max_abs_diff(y),
                (AnyRep::Tube(x), AnyRep::Tube(y)) => x.max_abs_diff(y),
                (AnyRep::Rod(x), AnyRep::Rod(y)) => x.max_abs_diff(y),
                _ => unreachable!(),
            };
            assert!(diff < 1e-14);
            for _ in 0..5 {
                let q = fixtures::point(&mut rng, (-1.0, 1.0), (0.2, 1.0));
                let shifted = SpacetimePoint { t: q.t - 0.75, ..q };
                let lhs = synth(&b, &q, &p).unwrap();
                let rhs = synth(rep, &shifted, &p).unwrap();
                assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn rotation_pullback_and_unitarity() {
        let p = AdsParams::new(3, 1.0, -0.5).unwrap();
        let mut rng = fixtures::rng(67);
        let (grid, w) = test_window();
        let ang = EulerAngles::new(0.4, 1.1, -0.7);
        let zero = EulerAngles::new(0.0, 0.0, 0.0);
        let slice = fixtures::slice_rep(&mut rng, 6, SliceCutoffs { n_max: 2, l_max: 3 }, true);
        let reps = [AnyRep::Slice(slice), AnyRep::Tube(fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 6, true)), AnyRep::Rod(fixtures::rod_rep(&mut rng, grid, &w, 6))];
        for rep in &reps {
            let rot = act_rotation(rep, ang, &p).unwrap();
            let same = act_rotation(rep, zero, &p).unwrap();
            for _ in 0..6 {
                let q = fixtures::point(&mut rng, (-1.0, 1.0), (0.2, 1.0));
                let back = SpacetimePoint { xi: ang.inverse().rotate(q.xi), ..q };
                let lhs = synth(&rot, &q, &p).unwrap();
                assert!((lhs - synth(rep, &back, &p).unwrap()).norm() < 1e-9);
                assert!((synth(&same, &q, &p).unwrap() - synth(rep, &q, &p).unwrap()).norm() < 1e-12);
            }
        }
        // per-block norm and reality
        let AnyRep::Slice(s) = &reps[0] else { unreachable!() };
        let rs = slice_of(act_rotation(&reps[0], ang, &p).unwrap());
        assert!(rs.is_real(1e-12));
        let block = |r: &SliceRep, n: u32, l: u32| r.coeffs.iter().filter(|(k, _)| k.0 == n && k.1 == l).map(|(_, v)| v.0.norm_sqr()).sum::<f64>();
        for &(n, l, _) in s.coeffs.keys() {
            assert!((block(s, n, l) - block(&rs, n, l)).abs() < 1e-12);
        }
        let rt = tube_of(act_rotation(&reps[1], ang, &p).unwrap());
        assert!(rt.is_real(1e-12));
        let mut d3 = AdsParams::new(5, 1.0, 0.0).unwrap();
        d3.m_sq = 0.0;
        assert!(matches!(act_rotation(&reps[0], ang, &d3), Err(Error::UnsupportedDimension(5))));
    }

    #[test]
    fn finite_isometries_preserve_symplectic_structures() {
        let p = AdsParams::new(3, 1.2, 0.4).unwrap();
        let mut rng = fixtures::rng(71);
        let (grid, w) = test_window();
        let cut = SliceCutoffs { n_max: 2, l_max: 3 };
        let slice_pairs: Vec<(SliceRep, SliceRep)> = (0..3).map(|_| (fixtures::slice_rep(&mut rng, 6, cut, false), fixtures::slice_rep(&mut rng, 6, cut, false))).collect();
        let mut tube_pairs = Vec::new();
        for _ in 0..3 {
            let a = fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 6, true);
            let b = fixtures::tube_rep(&mut rng, grid, TubeBasis::S, &w, 6, true);
            tube_pairs.push((a, b));
        }
        let ang = EulerAngles::new(-0.3, 0.8, 1.9);
        let pp = &p;
        let slice_t = Action::Finite(Box::new(move |r: &SliceRep| Ok(slice_of(act_time_translation(&AnyRep::Slice(r.clone()), -0.7, pp)))));
        let slice_r = Action::Finite(Box::new(move |r: &SliceRep| Ok(slice_of(act_rotation(&AnyRep::Slice(r.clone()), ang.inverse(), pp)?))));
        let tube_t = Action::Finite(Box::new(move |r: &TubeRep| Ok(tube_of(act_time_translation(&AnyRep::Tube(r.clone()), -0.7, pp)))));
        let tube_r = Action::Finite(Box::new(move |r: &TubeRep| Ok(tube_of(act_rotation(&AnyRep::Tube(r.clone()), ang.inverse(), pp)?))));
        let om_s = |a: &SliceRep, b: &SliceRep| omega_slice_momentum(a, b, pp);
        let om_t = |a: &TubeRep, b: &TubeRep| omega_tube_momentum(a, b, pp);
        assert!(invariance_suite(om_s, &slice_pairs, &slice_t).unwrap() < 1e-12);
        assert!(invariance_suite(om_s, &slice_pairs, &slice_r).unwrap() < 1e-12);
        assert!(invariance_suite(om_t, &tube_pairs, &tube_t).unwrap() < 1e-12);
        assert!(invariance_suite(om_t, &tube_pairs, &tube_r).unwrap() < 1e-12);
        // quadrature forms too
        let qs = |a: &SliceRep, b: &SliceRep| omega_slice_quadrature(a, b, 0.2, pp);
        let qt = |a: &TubeRep, b: &TubeRep| omega_tube_quadrature(a, b, 0.8, pp);
        assert!(invariance_suite(qs, &slice_pairs[..1], &slice_r).unwrap() < 1e-8);
        assert!(invariance_suite(qt, &tube_pairs[..1], &tube_t).unwrap() < 1e-8);
    }

    #[test]
    fn boost_projection_matches_finite_difference_operator() {
        // analytic -K mu used in extraction agrees with the generic operator
        let p = AdsParams::new(3, 1.0, 0.0).unwrap();
        let mut rep = TubeRep::new(OmegaGrid::new(0.5).unwrap(), TubeBasis::S);
        rep.insert(5, 2, 1, C64::new(1.0, 0.0), C64::default()).unwrap();
        let field = |q: &SpacetimePoint| crate::expansions::synth_tube(&rep, q, &p).unwrap();
        let q = SpacetimePoint::from_angles(0.3, 0.7, 1.1, 0.4);
        for gen in [GeneratorId::Boost0(3), GeneratorId::BoostD1(3)] {
            let c = killing_components(gen, &q).unwrap();
            let jet = crate::expansions::tube_jet(&rep, &q, &p).unwrap();
            let (th, ph) = q.angles();
            let y = sph_harm(AngularLabel::new(2, 1).unwrap(), th, ph).unwrap();
            let dy = sph_harm_sin2_dcos(AngularLabel::new(2, 1).unwrap(), th, ph).unwrap();
            let tang = sphere_scale(gen, q.t, q.rho) * dy / y * jet.value;
            let analytic = c.dt * jet.dt + c.drho * jet.drho + tang;
            let fd = killing_apply(gen, &field, &q).unwrap();
            assert!((analytic - fd).norm() < 1e-9, "{gen:?}: {analytic} vs {fd}");
        }
    }

    #[test]
    fn tube_boost_tables() {
        let p = AdsParams::new(3, 1.0, 0.6).unwrap();
        let (grid, w) = test_window();
        let space = LabelSpace::Tube { grid, window: w };
        let k0 = extract_boost_coeffs(space, GeneratorId::Boost0(3), &p).unwrap();
        let kd = extract_boost_coeffs(space, GeneratorId::BoostD1(3), &p).unwrap();
        assert!(k0.max_leakage < 1e-9 && kd.max_leakage < 1e-9, "{} {}", k0.max_leakage, kd.max_leakage);
        // both generators determine the same coefficients
        let scale = table_scale(&k0);
        for (key, a) in &k0.coeffs {
            for (x, y) in a.iter().zip(&kd.coeffs[key]) {
                assert!((x - y).norm() < 1e-9 * scale);
            }
        }
        assert!(tube_identities(&k0, &p).unwrap() < 1e-8);
        assert_eq!(k0.get(Channel::A, 0, -1, 0, "z--").unwrap(), C64::default());
        // l = 0 has no l - 1 targets
        assert_eq!(k0.coeffs[&(Channel::A, 0, 0, 0)][0], C64::default());
        let csv = k0.to_csv().unwrap();
        assert!(csv.starts_with("kind,channel,coeff,k_or_n,l,m,re,im\n"));
        assert_eq!(csv.lines().count(), 1 + 4 * k0.coeffs.len());
    }

    #[test]
    fn slice_boost_tables() {
        let p = AdsParams::new(3, 1.0, -1.2).unwrap();
        let cut = SliceCutoffs { n_max: 3, l_max: 3 };
        let k0 = extract_boost_coeffs(LabelSpace::Slice(cut), GeneratorId::Boost0(3), &p).unwrap();
        let kd = extract_boost_coeffs(LabelSpace::Slice(cut), GeneratorId::BoostD1(3), &p).unwrap();
        assert!(k0.max_leakage < 1e-9, "{}", k0.max_leakage);
        let scale = table_scale(&k0);
        for (key, a) in &k0.coeffs {
            for (x, y) in a.iter().zip(&kd.coeffs[key]) {
                assert!((x - y).norm() < 1e-9 * scale);
            }
        }
        assert!(slice_identities(&k0, &p).unwrap() < 1e-8);
        // real coefficients: conjugate weights reproduce the displayed channel signs
        assert!(k0.coeffs.values().flatten().all(|z| z.im.abs() < 1e-12 * scale));
        assert_eq!(k0.get(Channel::Plus, -1, 0, 0, "z0-").unwrap(), C64::default());
        // n = 0 sources have no (n - 1, l + 1) target
        assert_eq!(k0.coeffs[&(Channel::Plus, 0, 1, 0)][1], C64::default());
    }

    #[test]
    fn boost_invariance_and_structure() {
        let p = AdsParams::new(3, 1.0, 0.6).unwrap();
        let mut rng = fixtures::rng(73);
        let (grid, w) = test_window();
        let space = LabelSpace::Tube { grid, window: w };
        let inner = TubeWindow { k_min: -6, k_max: 6, l_max: 2 };
        let tables = [GeneratorId::Boost0(3), GeneratorId::BoostD1(3)].map(|g| (g, extract_boost_coeffs(space, g, &p).unwrap()));
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
        for (gen, table) in &tables {
            let act = Action::Infinitesimal(Box::new(|r: &TubeRep| boost_tube(r, *gen, table)));
            let v = invariance_suite(|a, b| omega_tube_momentum(a, b, &p), &pairs, &act).unwrap();
            assert!(v < 1e-9, "{gen:?}: {v}");
            for (a, _) in &pairs {
                let out = boost_tube(a, *gen, table).unwrap();
                assert!(out.is_real(1e-8));
                assert!(boost_tube(a, *gen, table).unwrap().coeffs.keys().all(|&(k, _, _)| (k - a.coeffs.keys().next().unwrap().0).abs() <= 20));
            }
        }
        // Z generator lowers frequency without touching the raising family
        let mut single = TubeRep::new(grid, TubeBasis::S);
        single.insert(3, 1, 0, C64::new(1.0, 0.0), C64::new(0.4, 0.2)).unwrap();
        let z = tube_of(z_generator(&AnyRep::Tube(single.clone()), false, &tables[0].1, &tables[1].1, &p).unwrap());
        let zb = tube_of(z_generator(&AnyRep::Tube(single.clone()), true, &tables[0].1, &tables[1].1, &p).unwrap());
        let big = z.coeffs.values().map(|v| v.0.norm().max(v.1.norm())).fold(0.0, f64::max);
        assert!(big > 1e-3);
        for (&(k, _, _), v) in &z.coeffs {
            if k != 1 {
                assert!(v.0.norm().max(v.1.norm()) < 1e-8 * big);
            }
        }
        for (&(k, _, _), v) in &zb.coeffs {
            if k != 5 {
                assert!(v.0.norm().max(v.1.norm()) < 1e-8 * big);
            }
        }
        // window overflow
        let mut edge = TubeRep::new(grid, TubeBasis::S);
        edge.insert(8, 1, 0, C64::new(1.0, 0.0), C64::default()).unwrap();
        assert!(matches!(boost_tube(&edge, tables[0].0, &tables[0].1), Err(Error::WindowOverflow(_))));
        // epsilon = 0 is the identity
        let same = tube_of(act_boost(&AnyRep::Tube(single.clone()), tables[0].0, 0.0, &tables[0].1, &p).unwrap());
        assert_eq!(same.max_abs_diff(&single), 0.0);
    }

    #[test]
    fn slice_boost_invariance_and_linearization() {
        let p = AdsParams::new(3, 1.0, 0.0).unwrap();
        let mut rng = fixtures::rng(79);
        let cut = SliceCutoffs { n_max: 3, l_max: 3 };
        let inner = SliceCutoffs { n_max: 2, l_max: 2 };
        for gen in [GeneratorId::Boost0(3), GeneratorId::BoostD1(3)] {
            let table = extract_boost_coeffs(LabelSpace::Slice(cut), gen, &p).unwrap();
            let pairs: Vec<(SliceRep, SliceRep)> = (0..3).map(|_| (fixtures::slice_rep(&mut rng, 6, inner, false), fixtures::slice_rep(&mut rng, 6, inner, false))).collect();
            let act = Action::Infinitesimal(Box::new(|r: &SliceRep| boost_slice(r, gen, &table)));
            assert!(invariance_suite(|a, b| omega_slice_momentum(a, b, &p), &pairs, &act).unwrap() < 1e-9);
            assert!(invariance_suite(|a, b| omega_slice_quadrature(a, b, 0.3, &p), &pairs[..1], &act).unwrap() < 1e-7);
            // pullback linearization against the Killing flow
            let rep = AnyRep::Slice(pairs[0].0.clone());
            for _ in 0..3 {
                let q = fixtures::point(&mut rng, (-1.0, 1.0), (0.3, 1.1));
                let err = |eps: f64| {
                    let lin = synth(&act_boost(&rep, gen, eps, &table, &p).unwrap(), &q, &p).unwrap();
                    let exact = synth(&rep, &killing_flow(gen, &q, -eps, 20).unwrap(), &p).unwrap();
                    (lin - exact).norm()
                };
                let ratio = err(1e-3) / err(1e-4);
                assert!((80.0..=120.0).contains(&ratio), "{gen:?}: ratio {ratio}");
            }
        }
    }

    #[test]
    fn slice_and_tube_boosts_commute_with_inclusion() {
        let p = AdsParams::new(3, 1.0, 0.0).unwrap();
        let grid = OmegaGrid::new(0.5).unwrap();
        let window = TubeWindow { k_min: -16, k_max: 16, l_max: 3 };
        let cut = SliceCutoffs { n_max: 3, l_max: 3 };
        let mut rng = fixtures::rng(83);
        let gen = GeneratorId::Boost0(3);
        let tt = extract_boost_coeffs(LabelSpace::Tube { grid, window }, gen, &p).unwrap();
        let st = extract_boost_coeffs(LabelSpace::Slice(cut), gen, &p).unwrap();
        // magic frequencies up to 7 stay inside the window after a unit shift
        let rep = fixtures::slice_rep(&mut rng, 5, SliceCutoffs { n_max: 1, l_max: 2 }, false);
        let via_slice = boost_slice(&rep, gen, &st).unwrap().to_tube(grid, &p).unwrap();
        let via_tube = boost_tube(&rep.to_tube(grid, &p).unwrap(), gen, &tt).unwrap();
        let scale = via_slice.coeffs.values().map(|v| v.0.norm()).fold(0.0, f64::max);
        assert!(via_slice.max_abs_diff(&via_tube) < 1e-6 * scale);
    }

    #[test]
    fn rod_boost_stays_in_rod_space() {
        let p = AdsParams::new(3, 1.0, 0.6).unwrap();
        let (grid, w) = test_window();
        let table = extract_boost_coeffs(LabelSpace::Tube { grid, window: w }, GeneratorId::BoostD1(3), &p).unwrap();
        let mut rod = RodRep::new(grid);
        rod.insert(2, 1, 1, C64::new(0.3, -0.4)).unwrap();
        let out = boost_generator(&AnyRep::Rod(rod), GeneratorId::BoostD1(3), &table, &p).unwrap();
        let AnyRep::Rod(r) = out else { panic!() };
        // l - 1 = 0 cannot carry m = 1
        assert_eq!(r.coeffs.keys().copied().collect::<Vec<_>>(), vec![(0, 2, 1), (4, 2, 1)]);
    }
}

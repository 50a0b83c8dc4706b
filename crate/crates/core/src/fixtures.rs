//! Seeded random representations and points used by the verification suites.

use crate::expansions::{OmegaGrid, RodRep, SliceCutoffs, SliceRep, TubeBasis, TubeRep, TubeWindow};
use crate::geometry::SpacetimePoint;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Slice rep with `count` distinct labels inside the cutoffs. A real rep has
/// conj(phi^-) = conj(phi^+) on every label.
pub fn slice_rep(rng: &mut StdRng, count: usize, cut: SliceCutoffs, real: bool) -> SliceRep {
    let mut rep = SliceRep::new();
    while rep.coeffs.len() < count {
        let n = rng.gen_range(0..=cut.n_max);
        let l = rng.gen_range(0..=cut.l_max);
        let m = rng.gen_range(-(l as i32)..=l as i32);
        let p = complex(rng);
        let mc = if real { p.conj() } else { complex(rng) };
        rep.coeffs.insert((n, l, m), (p, mc));
    }
    rep
}

fn tube_key(rng: &mut StdRng, w: &TubeWindow) -> (i64, u32, i32) {
    let k = rng.gen_range(w.k_min..=w.k_max);
    let l = rng.gen_range(0..=w.l_max);
    let m = rng.gen_range(-(l as i32)..=l as i32);
    (k, l, m)
}

/// Tube rep with `count` labels in the window. A real rep also carries the
/// conjugate partner (-k, l, -m) of each label, which must lie in the window.
pub fn tube_rep(rng: &mut StdRng, grid: OmegaGrid, basis: TubeBasis, w: &TubeWindow, count: usize, real: bool) -> TubeRep {
    let mut rep = TubeRep::new(grid, basis);
    while rep.coeffs.len() < count {
        let (k, l, m) = tube_key(rng, w);
        let (a, b) = (complex(rng), complex(rng));
        rep.coeffs.insert((k, l, m), (a, b));
        if real {
            if k == 0 && m == 0 {
                rep.coeffs.insert((k, l, m), (Complex64::from(a.re), Complex64::from(b.re)));
            } else {
                rep.coeffs.insert((-k, l, -m), (a.conj(), b.conj()));
            }
        }
    }
    rep
}

pub fn rod_rep(rng: &mut StdRng, grid: OmegaGrid, w: &TubeWindow, count: usize) -> RodRep {
    let mut rep = RodRep::new(grid);
    while rep.coeffs.len() < count {
        let key = tube_key(rng, w);
        rep.coeffs.insert(key, complex(rng));
    }
    rep
}

/// Uniform point with rho in the given window and a random direction.
pub fn point(rng: &mut StdRng, t: (f64, f64), rho: (f64, f64)) -> SpacetimePoint {
    let theta = rng.gen_range(-1.0f64..1.0).acos();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    SpacetimePoint::from_angles(rng.gen_range(t.0..t.1), rng.gen_range(rho.0..rho.1), theta, phi)
}

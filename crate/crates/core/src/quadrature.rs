//! Quadrature rules: Gauss-Legendre, tanh-sinh and a product rule on the
//! two-sphere.

use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// n-point Gauss-Legendre rule on [a, b], nodes found by Newton iteration.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_deriv(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = w * half;
        weights[n - 1 - i] = w * half;
    }
    Rule { nodes, weights }
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh (double exponential) rule on [a, b] with step h, truncated at
/// |t| <= t_max. Tolerates integrable algebraic endpoint singularities.
pub fn tanh_sinh(a: f64, b: f64, h: f64, t_max: f64) -> Rule {
    let half = (b - a) / 2.0;
    let kmax = (t_max / h).floor() as i64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = PI / 2.0 * t.sinh();
        // distance from the nearer endpoint in units of half, computed without cancellation
        let comp = 2.0 / (1.0 + (2.0 * u.abs()).exp());
        let w = h * PI / 2.0 * t.cosh() / u.cosh().powi(2) * half;
        let x = if u >= 0.0 { b - half * comp } else { a + half * comp };
        if !(x > a && x < b) || w == 0.0 {
            continue;
        }
        nodes.push(x);
        weights.push(w);
    }
    Rule { nodes, weights }
}

/// Default radial rule on [0, pi/2) used for slice integrals.
pub fn radial_rule() -> Rule {
    tanh_sinh(0.0, PI / 2.0, 1.0 / 32.0, 3.5)
}

/// Product rule on the two-sphere: Gauss-Legendre in cos(theta) times the
/// trapezoid rule in phi. Integrates Y_l^m products exactly for
/// l + l' < 2 n_theta and |m| < n_phi.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Weight of node (i, j) is w_theta[i] * w_phi.
    pub w_theta: Vec<f64>,
    pub w_phi: f64,
}

impl AngularGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let gl = gauss_legendre(n_theta, -1.0, 1.0);
        let theta = gl.nodes.iter().map(|c| c.acos()).collect();
        let phi = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        AngularGrid { theta, phi, w_theta: gl.weights, w_phi: 2.0 * PI / n_phi as f64 }
    }

    /// Smallest grid exact for angular momenta up to l_max.
    pub fn for_lmax(l_max: u32) -> Self {
        AngularGrid::new(l_max as usize + 2, 2 * l_max as usize + 3)
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates (theta, phi, weight) over all nodes, theta-major.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.theta.iter().zip(&self.w_theta).flat_map(move |(&t, &wt)| {
            self.phi.iter().map(move |&p| (t, p, wt * self.w_phi))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        let r = gauss_legendre(8, -1.0, 2.0);
        for k in 0..16 {
            let exact = (2f64.powi(k + 1) - (-1f64).powi(k + 1)) / (k + 1) as f64;
            assert!((r.integrate(|x| x.powi(k)) - exact).abs() < 1e-13 * exact.abs().max(1.0), "k={k}");
        }
        let big = gauss_legendre(128, 0.0, 1.0);
        assert!((big.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        let r = tanh_sinh(0.0, 1.0, 1.0 / 32.0, 4.5);
        // int_0^1 x^{-1/2} dx = 2, int_0^1 (1-x)^{1.5} dx = 0.4
        assert!((r.integrate(|x| x.powf(-0.5)) - 2.0).abs() < 1e-11);
        assert!((r.integrate(|x| (1.0 - x).powf(1.5)) - 0.4).abs() < 1e-14);
        let rr = radial_rule();
        assert!((rr.integrate(|x| x.sin() * x.cos().powf(0.3)) - 1.0 / 1.3).abs() < 1e-13);
    }

    #[test]
    fn sphere_rule_integrates_harmonic_products() {
        let g = AngularGrid::new(4, 7);
        let total: f64 = g.nodes().map(|(_, _, w)| w).sum();
        assert!((total - 4.0 * PI).abs() < 1e-13);
        // int cos^6(theta) dOmega = 4 pi / 7
        let v: f64 = g.nodes().map(|(t, _, w)| w * t.cos().powi(6)).sum();
        assert!((v - 4.0 * PI / 7.0).abs() < 1e-13);
        let v: f64 = g.nodes().map(|(t, p, w)| w * (t.sin() * p.cos()).powi(2)).sum();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}

//! One-dimensional Gaussian quadrature.
//!
//! [`GaussLegendre`] panels are the workhorse: expectations under a normal
//! density are integrated on a composite grid that is refined around any
//! known sharp feature of the integrand. [`GaussHermite`] is kept for smooth
//! integrands, where it converges spectrally with few nodes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n`-point Gauss–Hermite rule for the weight `e^{-x²}`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0f64;
        // Largest roots first, initial guesses as in the classical recurrence-based scheme.
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                let (p, d) = hermite_normalized(n, z);
                pp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = hermite_normalized(n, z);
            if d != 0.0 {
                pp = d;
            }
            nodes[i] = z;
            weights[i] = 2.0 / (pp * pp);
        }
        for i in 0..n / 2 {
            nodes[n - 1 - i] = -nodes[i];
            weights[n - 1 - i] = weights[i];
        }
        nodes.reverse();
        weights.reverse();
        GaussHermite { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E[f(X)]` for `X ~ N(0, std²)`.
    pub fn normal_expectation<F: FnMut(f64) -> f64>(&self, std: f64, mut f: F) -> f64 {
        let scale = std::f64::consts::SQRT_2 * std;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(scale * x);
        }
        acc / PI.sqrt()
    }
}

// Orthonormal Hermite recurrence; returns (p_n, p_n') in the normalization where the weight is 2/p'^2.
fn hermite_normalized(n: usize, z: f64) -> (f64, f64) {
    let pim4 = PI.powf(-0.25);
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Composite Gauss–Legendre integration against the standard-normal-type density.
///
/// The integration range is `[-12σ, 12σ]`, split into panels no wider than
/// `σ/2`; panels are refined to `width/4` within `±8·width` of each feature.
#[derive(Clone, Debug)]
pub struct NormalQuadrature {
    rule: GaussLegendre,
}

/// A sharp feature of an integrand: location and length scale.
#[derive(Clone, Copy, Debug)]
pub struct Feature {
    pub at: f64,
    pub width: f64,
}

impl NormalQuadrature {
    pub fn new(nodes_per_panel: usize) -> Self {
        NormalQuadrature {
            rule: GaussLegendre::new(nodes_per_panel),
        }
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.rule.len()
    }

    fn edges(std: f64, features: &[Feature]) -> Vec<f64> {
        let lo = -12.0 * std;
        let hi = 12.0 * std;
        let mut edges: Vec<f64> = (0..=48).map(|k| lo + (hi - lo) * k as f64 / 48.0).collect();
        for f in features {
            let h = f.width / 4.0;
            if !(h > 0.0) || !h.is_finite() {
                continue;
            }
            let steps = ((8.0 * f.width) / h).ceil() as i64;
            edges.extend(
                (-steps..=steps)
                    .map(|k| f.at + k as f64 * h)
                    .filter(|&x| x > lo && x < hi),
            );
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * std);
        edges
    }

    /// `E[g(X)]` for `X ~ N(0, std²)`.
    pub fn expectation<G: FnMut(f64) -> f64>(&self, std: f64, features: &[Feature], mut g: G) -> f64 {
        let edges = Self::edges(std, features);
        let norm = 1.0 / (std * (2.0 * PI).sqrt());
        let inv2var = 0.5 / (std * std);
        edges
            .windows(2)
            .map(|w| {
                self.rule
                    .integrate(w[0], w[1], |x| g(x) * norm * (-x * x * inv2var).exp())
            })
            .sum()
    }
}

/// Upper tail `P(Z > x)` of the standard normal, accurate in relative terms far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `ln P(Z ≤ x)`, accurate for large positive `x`.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-normal_sf(x)).ln_1p()
    } else {
        normal_sf(-x).ln()
    }
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(15) + 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        let w: f64 = GaussLegendre::new(64).integrate(0.0, PI, f64::sin);
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_moments() {
        for n in [8, 64, 128] {
            let rule = GaussHermite::new(n);
            let m0 = rule.normal_expectation(1.0, |_| 1.0);
            let m2 = rule.normal_expectation(1.0, |x| x * x);
            let m4 = rule.normal_expectation(2.0, |x| x.powi(4));
            assert!((m0 - 1.0).abs() < 1e-13, "n={n} m0={m0}");
            assert!((m2 - 1.0).abs() < 1e-12, "n={n} m2={m2}");
            assert!((m4 - 48.0).abs() < 1e-10, "n={n} m4={m4}");
        }
    }

    #[test]
    fn hermite_matches_composite_rule_on_smooth_integrands() {
        let gh = GaussHermite::new(64);
        let q = NormalQuadrature::new(32);
        let g = |x: f64| (0.3 * x).cos() / (1.0 + 0.1 * x * x);
        let a = gh.normal_expectation(1.5, g);
        let b = q.expectation(1.5, &[], g);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn composite_rule_resolves_steps() {
        let q = NormalQuadrature::new(16);
        // P(X > 3) for X ~ N(0, 2) via a smoothed step of width 1e-3
        let w = 1e-3;
        let v = q.expectation(2f64.sqrt(), &[Feature { at: 3.0, width: w }], |x| {
            1.0 / (1.0 + (-(x - 3.0) / w).exp())
        });
        let exact = 0.5 * erfc(3.0 / 2.0);
        assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn normal_tail_helpers() {
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_sf(1.959963984540054) - 0.025).abs() < 1e-15);
        // far tail keeps relative accuracy
        let t = normal_sf(10.0);
        assert!((t / 7.619853024160527e-24 - 1.0).abs() < 1e-12);
        assert!((ln_normal_cdf(10.0) + 7.619853024160527e-24).abs() < 1e-36);
        assert!((ln_normal_cdf(-10.0) - t.ln()).abs() < 1e-12);
    }
}

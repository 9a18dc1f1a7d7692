//! Expectations over the `B`-dimensional standard Gaussian measure `Dz̄`.
//!
//! Density evolution and the replica potential both reduce to three
//! integrals of one section posterior evaluated at effective noise `Σ`:
//!
//! * the mean squared error of the posterior mean (`mse`),
//! * the non-trivial part of the log partition function (`log_partition`),
//! * the probability that a wrong position wins the argmax (`ser`).
//!
//! Writing `t_k = (z_k − z_1)/Σ − 1/Σ²` for the wrong positions `k ≥ 2`, the
//! posterior of a section is `p_1 = 1/(1 + Σ_k e^{t_k})`, `p_k = e^{t_k} p_1`,
//! and the log partition function is `1/(2Σ²) + z_1/Σ + ln(1 + Σ_k e^{t_k})`.
//! The `z_1/Σ` term has zero mean and is integrated exactly.
//!
//! For `B = 2` every integrand depends on `z` only through `u = z_2 − z_1 ~ N(0, 2)`
//! and is integrated by quadrature. The SER reduces to a one-dimensional
//! integral for every `B`: `P(max_{k≥2} z_k − z_1 > 1/Σ) = E_{z_1}[1 − Φ(z_1 + 1/Σ)^{B−1}]`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Feature, NormalQuadrature};
use crate::rng;

/// A numerical estimate with its Monte Carlo standard error (zero for quadrature).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0 }
    }
}

const CHUNK: usize = 4096;

/// A fixed block of i.i.d. `N(0, I_B)` vectors.
///
/// Sample chunk `c` (of 4096 vectors) is drawn from the stream `(seed, "mc", c)`,
/// so the block is the same however it is sharded. The same block is reused
/// for every `Σ` (common random numbers), which makes all Monte Carlo curves
/// smooth in `Σ`.
#[derive(Clone, Debug)]
pub struct GaussianSamples {
    b: usize,
    seed: u64,
    data: Vec<f64>,
}

impl GaussianSamples {
    pub fn new(b: usize, n: usize, seed: u64) -> Result<Self> {
        if b < 2 {
            return Err(Error::Parameter(format!("section size must be at least 2, got {b}")));
        }
        if n < 2 {
            return Err(Error::Parameter(format!("need at least 2 Monte Carlo samples, got {n}")));
        }
        let mut data = vec![0.0; n * b];
        for (c, chunk) in data.chunks_mut(CHUNK * b).enumerate() {
            let mut rng = rng::stream(seed, "mc", c as u64);
            for x in chunk.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
        }
        Ok(GaussianSamples { b, seed, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.b
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn section_size(&self) -> usize {
        self.b
    }

    pub fn vectors(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.b)
    }

    fn mean<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Estimate {
        let (mut s, mut s2) = (0.0, 0.0);
        for z in self.vectors() {
            let x = f(z);
            s += x;
            s2 += x * x;
        }
        let n = self.len() as f64;
        let mean = s / n;
        let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
        Estimate { value: mean, stderr: (var / n).sqrt() }
    }

    /// Monte Carlo `E[(1 − p_1)² + Σ_{k≥2} p_k²]`.
    pub fn mse(&self, sigma: f64) -> Estimate {
        let inv = 1.0 / sigma;
        let shift = inv * inv;
        self.mean(|z| {
            let z1 = z[0];
            let m = z[1..]
                .iter()
                .map(|&zk| (zk - z1) * inv - shift)
                .fold(0.0f64, f64::max);
            let (mut s, mut s2) = (0.0, 0.0);
            for &zk in &z[1..] {
                let e = ((zk - z1) * inv - shift - m).exp();
                s += e;
                s2 += e * e;
            }
            let d = (-m).exp() + s;
            (s * s + s2) / (d * d)
        })
    }

    /// Monte Carlo `E[ln(1 + Σ_{k≥2} e^{t_k})]`.
    pub fn log_partition(&self, sigma: f64) -> Estimate {
        let inv = 1.0 / sigma;
        let shift = inv * inv;
        self.mean(|z| {
            let z1 = z[0];
            let m = z[1..]
                .iter()
                .map(|&zk| (zk - z1) * inv - shift)
                .fold(0.0f64, f64::max);
            let s: f64 = z[1..]
                .iter()
                .map(|&zk| ((zk - z1) * inv - shift - m).exp())
                .sum();
            if m == 0.0 {
                s.ln_1p()
            } else {
                m + ((-m).exp() + s).ln()
            }
        })
    }

    /// Monte Carlo `P(∃ k ≥ 2: z_k − z_1 > 1/Σ)`.
    pub fn ser(&self, sigma: f64) -> Estimate {
        let gap = 1.0 / sigma;
        self.mean(|z| {
            let z1 = z[0];
            if z[1..].iter().any(|&zk| zk - z1 > gap) {
                1.0
            } else {
                0.0
            }
        })
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Quadrature forms of the `B = 2` integrals over `u = z_2 − z_1 ~ N(0, 2)`.
pub mod binary {
    use super::*;

    fn feature(sigma: f64) -> [Feature; 1] {
        [Feature { at: 1.0 / sigma, width: sigma }]
    }

    pub fn mse(quad: &NormalQuadrature, sigma: f64) -> f64 {
        let inv = 1.0 / sigma;
        quad.expectation(std::f64::consts::SQRT_2, &feature(sigma), |u| {
            let p = logistic(u * inv - inv * inv);
            2.0 * p * p
        })
    }

    pub fn log_partition(quad: &NormalQuadrature, sigma: f64) -> f64 {
        let inv = 1.0 / sigma;
        quad.expectation(std::f64::consts::SQRT_2, &feature(sigma), |u| {
            softplus(u * inv - inv * inv)
        })
    }

    /// `½·erfc(1/(2Σ))`.
    pub fn ser(sigma: f64) -> f64 {
        0.5 * quadrature::erfc(0.5 / sigma)
    }
}

/// `P(max_{k≥2} z_k − z_1 > 1/Σ)` by one-dimensional quadrature over `z_1`.
pub fn ser_quadrature(quad: &NormalQuadrature, b: usize, sigma: f64) -> f64 {
    let gap = 1.0 / sigma;
    let wrong = (b - 1) as f64;
    quad.expectation(1.0, &[Feature { at: -gap, width: 1.0 }], |z1| {
        -(wrong * quadrature::ln_normal_cdf(z1 + gap)).exp_m1()
    })
}

/// How the `B`-dimensional integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Integration {
    /// Quadrature when `B = 2`, Monte Carlo with the given sample count otherwise.
    Auto { mc_samples: usize, seed: u64 },
    /// Monte Carlo for every `B`.
    MonteCarlo { mc_samples: usize, seed: u64 },
}

impl Integration {
    pub fn mc_samples(&self) -> usize {
        match *self {
            Integration::Auto { mc_samples, .. } | Integration::MonteCarlo { mc_samples, .. } => {
                mc_samples
            }
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            Integration::Auto { seed, .. } | Integration::MonteCarlo { seed, .. } => seed,
        }
    }
}

/// Default nodes per panel of the composite quadrature.
pub const QUADRATURE_NODES: usize = 64;

/// Evaluator for the section integrals at a fixed `B`.
#[derive(Clone, Debug)]
pub struct SectionMeasure {
    b: usize,
    quad: NormalQuadrature,
    samples: Option<GaussianSamples>,
}

impl SectionMeasure {
    pub fn new(b: usize, integration: Integration) -> Result<Self> {
        if b < 2 {
            return Err(Error::Parameter(format!("section size must be at least 2, got {b}")));
        }
        let samples = match integration {
            Integration::Auto { .. } if b == 2 => None,
            Integration::Auto { mc_samples, seed } | Integration::MonteCarlo { mc_samples, seed } => {
                Some(GaussianSamples::new(b, mc_samples, seed)?)
            }
        };
        Ok(SectionMeasure {
            b,
            quad: NormalQuadrature::new(QUADRATURE_NODES),
            samples,
        })
    }

    /// Quadrature-only evaluator for `B = 2`, with a custom node count per panel.
    pub fn binary_quadrature(nodes_per_panel: usize) -> Self {
        SectionMeasure {
            b: 2,
            quad: NormalQuadrature::new(nodes_per_panel),
            samples: None,
        }
    }

    pub fn section_size(&self) -> usize {
        self.b
    }

    pub fn samples(&self) -> Option<&GaussianSamples> {
        self.samples.as_ref()
    }

    pub fn uses_quadrature(&self) -> bool {
        self.samples.is_none()
    }

    fn check(sigma: f64) -> Result<()> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(())
        } else {
            Err(Error::NumericDomain(format!("effective noise Σ must be positive, got {sigma}")))
        }
    }

    pub fn mse(&self, sigma: f64) -> Result<Estimate> {
        Self::check(sigma)?;
        Ok(match &self.samples {
            Some(s) => s.mse(sigma),
            None => Estimate::exact(binary::mse(&self.quad, sigma)),
        })
    }

    pub fn log_partition(&self, sigma: f64) -> Result<Estimate> {
        Self::check(sigma)?;
        Ok(match &self.samples {
            Some(s) => s.log_partition(sigma),
            None => Estimate::exact(binary::log_partition(&self.quad, sigma)),
        })
    }

    /// Section error probability; always evaluated by the exact one-dimensional reduction.
    pub fn ser(&self, sigma: f64) -> Result<Estimate> {
        Self::check(sigma)?;
        Ok(Estimate::exact(if self.b == 2 {
            binary::ser(sigma)
        } else {
            ser_quadrature(&self.quad, self.b, sigma)
        }))
    }

    /// Section error probability by Monte Carlo over the stored sample block.
    pub fn ser_monte_carlo(&self, sigma: f64) -> Result<Estimate> {
        Self::check(sigma)?;
        self.samples
            .as_ref()
            .map(|s| s.ser(sigma))
            .ok_or_else(|| Error::Parameter("no Monte Carlo samples configured".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_standard() {
        let a = GaussianSamples::new(3, 10_000, 4).unwrap();
        let b = GaussianSamples::new(3, 10_000, 4).unwrap();
        assert_eq!(a.data, b.data);
        let n = a.data.len() as f64;
        let mean = a.data.iter().sum::<f64>() / n;
        let var = a.data.iter().map(|x| x * x).sum::<f64>() / n;
        assert!(mean.abs() < 4.0 / n.sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
    }

    #[test]
    fn chunked_generation_is_prefix_stable() {
        let small = GaussianSamples::new(2, 5000, 9).unwrap();
        let large = GaussianSamples::new(2, 9000, 9).unwrap();
        assert_eq!(small.data[..], large.data[..small.data.len()]);
    }

    #[test]
    fn binary_ser_reduction_matches_general_quadrature() {
        let quad = NormalQuadrature::new(32);
        for sigma in [0.1, 0.25, 0.5, 1.0, 3.0] {
            let a = binary::ser(sigma);
            let b = ser_quadrature(&quad, 2, sigma);
            assert!((a - b).abs() < 1e-12 * a.max(1e-300) + 1e-300, "Σ={sigma}: {a} vs {b}");
        }
    }

    #[test]
    fn ser_limits() {
        let quad = NormalQuadrature::new(32);
        for b in [2usize, 4, 8] {
            let wide = ser_quadrature(&quad, b, 1e3);
            assert!((wide - (1.0 - 1.0 / b as f64)).abs() < 2e-3, "B={b}: {wide}");
            assert!(ser_quadrature(&quad, b, 0.05) < 1e-20);
        }
    }

    #[test]
    fn rejects_non_positive_sigma() {
        let m = SectionMeasure::binary_quadrature(16);
        assert!(matches!(m.mse(0.0), Err(Error::NumericDomain(_))));
        assert!(matches!(m.ser(-1.0), Err(Error::NumericDomain(_))));
        assert!(m.ser_monte_carlo(1.0).is_err());
    }
}

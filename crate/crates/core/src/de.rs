//! Density evolution of the AMP decoder.
//!
//! In the large-size limit the decoder's rescaled MSE `E^t` follows a scalar
//! recursion: the section posterior at iteration `t` is that of a Gaussian
//! channel with effective noise `Σ(E^{t−1}) = sqrt((1/snr + E^{t−1})·R/log2 B)`,
//! and `E^t` is the expected squared error of its mean. Starting from
//! `E^0 = 1` (all-zero estimate) the recursion either reaches a low-error
//! fixed point or stalls at a high-error one; the largest rate for which it
//! reaches low error is the BP threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Estimate, Integration, SectionMeasure};

/// Effective noise `Σ(E) = sqrt((1/snr + E)·R/log2 B)`.
pub fn sigma_eff(e: f64, b: usize, r: f64, snr: f64) -> f64 {
    ((snr.recip() + e) * r / (b as f64).log2()).sqrt()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && !sigma.is_nan() {
        Ok(())
    } else {
        Err(Error::NumericDomain(format!("Σ must be positive, got {sigma}")))
    }
}

// softmax weight of `target` among `exponents`, max-subtracted
fn softmax_at(exponents: &[f64], target: usize) -> f64 {
    let m = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = exponents.iter().map(|&x| (x - m).exp()).sum();
    (exponents[target] - m).exp() / denom
}

/// Posterior weight of the true position (index 0) of a section observed at noise `Σ`.
pub fn f1(sigma: f64, z: &[f64]) -> Result<f64> {
    check_sigma(sigma)?;
    if z.is_empty() {
        return Err(Error::Dimension("empty section".into()));
    }
    let shift = sigma.powi(-2);
    let exps: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(k, &zk)| if k == 0 { 0.0 } else { (zk - z[0]) / sigma - shift })
        .collect();
    Ok(softmax_at(&exps, 0))
}

/// Posterior weight of the wrong position `i` when the true position is `j` (0-based).
pub fn f0(sigma: f64, z: &[f64], i: usize, j: usize) -> Result<f64> {
    check_sigma(sigma)?;
    if i == j || i >= z.len() || j >= z.len() {
        return Err(Error::Parameter(format!(
            "f0 needs distinct positions within the section, got i={i}, j={j}"
        )));
    }
    let shift = sigma.powi(-2);
    let exps: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(k, &zk)| {
            let base = (zk - z[i]) / sigma;
            if k == j {
                base + shift
            } else {
                base
            }
        })
        .collect();
    Ok(softmax_at(&exps, i))
}

/// Density evolution settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub b: usize,
    pub r: f64,
    pub snr: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Use Monte Carlo even where quadrature is available (`B = 2`).
    pub monte_carlo: bool,
}

impl DeParams {
    pub const DEFAULT_MC_SAMPLES: usize = 10_000_000;
    pub const DEFAULT_MAX_ITER: usize = 200;
    pub const DEFAULT_TOL: f64 = 1e-9;

    pub fn new(b: usize, r: f64, snr: f64) -> Self {
        DeParams {
            b,
            r,
            snr,
            mc_samples: Self::DEFAULT_MC_SAMPLES,
            seed: 0,
            max_iter: Self::DEFAULT_MAX_ITER,
            tol: Self::DEFAULT_TOL,
            monte_carlo: false,
        }
    }

    pub fn with_mc_samples(mut self, n: usize) -> Self {
        self.mc_samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn integration(&self) -> Integration {
        if self.monte_carlo {
            Integration::MonteCarlo { mc_samples: self.mc_samples, seed: self.seed }
        } else {
            Integration::Auto { mc_samples: self.mc_samples, seed: self.seed }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.b < 2 {
            return Err(Error::Parameter(format!("B must be at least 2, got {}", self.b)));
        }
        if !(self.r > 0.0) || !(self.snr > 0.0) {
            return Err(Error::Parameter(format!(
                "rate and snr must be positive (R={}, snr={})",
                self.r, self.snr
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// One iteration of the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DePoint {
    pub t: usize,
    pub e: f64,
    /// SER of the estimate produced at this iteration.
    pub ser: f64,
    pub stderr_e: f64,
    pub stderr_ser: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeTrajectory {
    pub points: Vec<DePoint>,
    pub converged: bool,
    pub fixed_point_e: f64,
}

impl DeTrajectory {
    pub fn final_point(&self) -> &DePoint {
        self.points.last().expect("trajectory always holds the initial point")
    }

    pub fn final_ser(&self) -> f64 {
        self.final_point().ser
    }

    /// SER at iteration `t`, holding the final value once the recursion has stopped.
    pub fn ser_at(&self, t: usize) -> f64 {
        self.points.get(t).unwrap_or_else(|| self.final_point()).ser
    }

    /// CSV with columns `t,E,SER,stderr_E,stderr_SER`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,E,SER,stderr_E,stderr_SER\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                p.t, p.e, p.ser, p.stderr_e, p.stderr_ser
            ));
        }
        out
    }
}

/// Density evolution for fixed `B` and `snr`, reusable across rates.
///
/// The Monte Carlo sample block is drawn once and reused for every `E` and
/// every rate, so trajectories at neighbouring rates differ only through the
/// rate itself.
#[derive(Clone, Debug)]
pub struct DeEngine {
    measure: SectionMeasure,
    snr: f64,
    max_iter: usize,
    tol: f64,
    mc_samples: usize,
    seed: u64,
}

impl DeEngine {
    pub fn new(p: &DeParams) -> Result<Self> {
        p.validate()?;
        Ok(DeEngine {
            measure: SectionMeasure::new(p.b, p.integration())?,
            snr: p.snr,
            max_iter: p.max_iter,
            tol: p.tol,
            mc_samples: p.mc_samples,
            seed: p.seed,
        })
    }

    pub fn from_measure(measure: SectionMeasure, snr: f64, max_iter: usize, tol: f64) -> Self {
        let (mc_samples, seed) = measure
            .samples()
            .map(|s| (s.len(), s.seed()))
            .unwrap_or((0, 0));
        DeEngine { measure, snr, max_iter, tol, mc_samples, seed }
    }

    pub fn measure(&self) -> &SectionMeasure {
        &self.measure
    }

    pub fn section_size(&self) -> usize {
        self.measure.section_size()
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn sigma(&self, e: f64, r: f64) -> f64 {
        sigma_eff(e, self.section_size(), r, self.snr)
    }

    /// `E' = ∫Dz̄ ([f1 − 1]² + (B−1)·f0²)` at `Σ(E)`.
    pub fn step(&self, e: f64, r: f64) -> Result<Estimate> {
        if !(e >= 0.0) {
            return Err(Error::NumericDomain(format!("E must be non-negative, got {e}")));
        }
        self.measure.mse(self.sigma(e, r))
    }

    /// SER of an estimate formed at effective noise `Σ(E)`.
    pub fn ser_from_e(&self, e: f64, r: f64) -> Result<Estimate> {
        if !(e >= 0.0) {
            return Err(Error::NumericDomain(format!("E must be non-negative, got {e}")));
        }
        self.measure.ser(self.sigma(e, r))
    }

    /// Iterates from `E^0 = 1` until `|E^t − E^{t−1}| < tol` or `max_iter`.
    ///
    /// Point `t ≥ 1` carries `E^t` together with the SER of the `t`-th
    /// estimate, which is formed at `Σ(E^{t−1})`. Point 0 is the all-zero
    /// start, for which every section counts as undecoded (`SER^0 = 1`).
    pub fn run(&self, r: f64) -> Result<DeTrajectory> {
        self.run_capped(r, self.max_iter)
    }

    pub fn run_capped(&self, r: f64, max_iter: usize) -> Result<DeTrajectory> {
        let mut points = vec![DePoint { t: 0, e: 1.0, ser: 1.0, stderr_e: 0.0, stderr_ser: 0.0 }];
        let mut e = 1.0;
        let mut converged = false;
        for t in 1..=max_iter {
            let next = self.step(e, r)?;
            let ser = self.ser_from_e(e, r)?;
            points.push(DePoint {
                t,
                e: next.value,
                ser: ser.value,
                stderr_e: next.stderr,
                stderr_ser: ser.stderr,
            });
            let delta = (next.value - e).abs();
            e = next.value;
            if delta < self.tol {
                converged = true;
                break;
            }
        }
        Ok(DeTrajectory { points, converged, fixed_point_e: e })
    }

    /// `0.05·(1 − 1/B)`: SER below this counts as successful decoding.
    pub fn ser_cut(&self) -> f64 {
        0.05 * (1.0 - 1.0 / self.section_size() as f64)
    }

    fn decodes(&self, r: f64) -> Result<bool> {
        Ok(self.run(r)?.final_ser() < self.ser_cut())
    }

    /// Bisection on the rate for the DE success/failure boundary.
    pub fn bp_threshold(&self, r_lo: f64, r_hi: f64, tol_r: f64) -> Result<ThresholdReport> {
        if !(r_lo > 0.0 && r_hi > r_lo) || !(tol_r > 0.0) {
            return Err(Error::Parameter(format!(
                "need 0 < r_lo < r_hi and tol_r > 0, got [{r_lo}, {r_hi}], tol {tol_r}"
            )));
        }
        let (lo_ok, hi_ok) = (self.decodes(r_lo)?, self.decodes(r_hi)?);
        if lo_ok == hi_ok {
            return Err(Error::Bracketing(format!(
                "density evolution {} at both R={r_lo} and R={r_hi}",
                if lo_ok { "succeeds" } else { "fails" }
            )));
        }
        if !lo_ok {
            return Err(Error::Bracketing(format!(
                "density evolution fails at R={r_lo} but succeeds at R={r_hi}"
            )));
        }
        let (mut lo, mut hi) = (r_lo, r_hi);
        while hi - lo > tol_r {
            let mid = 0.5 * (lo + hi);
            if self.decodes(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(ThresholdReport {
            snr: self.snr,
            b: self.section_size(),
            r_bp: 0.5 * (lo + hi),
            tol_r,
            ser_cut: self.ser_cut(),
            mc_samples: self.mc_samples,
            seed: self.seed,
        })
    }
}

/// JSON record of a threshold computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub snr: f64,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "R_bp")]
    pub r_bp: f64,
    pub tol_r: f64,
    pub ser_cut: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

/// One step of the recursion for the rate in `p`.
pub fn de_step(e: f64, p: &DeParams, measure: &SectionMeasure) -> Result<Estimate> {
    if !(e >= 0.0) {
        return Err(Error::NumericDomain(format!("E must be non-negative, got {e}")));
    }
    measure.mse(sigma_eff(e, p.b, p.r, p.snr))
}

pub fn ser_from_e(e: f64, p: &DeParams, measure: &SectionMeasure) -> Result<Estimate> {
    if !(e >= 0.0) {
        return Err(Error::NumericDomain(format!("E must be non-negative, got {e}")));
    }
    measure.ser(sigma_eff(e, p.b, p.r, p.snr))
}

pub fn run_de(p: &DeParams) -> Result<DeTrajectory> {
    DeEngine::new(p)?.run(p.r)
}

/// DE-based BP threshold at `(snr, B)` with the sampling settings of `p`.
pub fn bp_threshold_de(p: &DeParams, r_lo: f64, r_hi: f64, tol_r: f64) -> Result<ThresholdReport> {
    DeEngine::new(p)?.bp_threshold(r_lo, r_hi, tol_r)
}

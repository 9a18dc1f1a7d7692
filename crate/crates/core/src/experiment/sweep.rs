//! Threshold sweeps across section sizes or signal-to-noise ratios.

use serde::{Deserialize, Serialize};

use crate::channel::{capacity, gap_to_capacity_db};
use crate::de::{DeEngine, DeParams};
use crate::error::{Error, Result};
use crate::measure::Integration;
use crate::replica::{asymptotic_bp_rate, PotentialEvaluator};

/// Lower end of every threshold bracket.
pub const RATE_FLOOR: f64 = 0.2;

/// One row of a phase diagram. A missing optimal threshold means the
/// potential never has two maxima below capacity (no transition).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    #[serde(rename = "B")]
    pub b: usize,
    pub snr: f64,
    #[serde(rename = "R_bp")]
    pub r_bp: Option<f64>,
    #[serde(rename = "R_opt")]
    pub r_opt: Option<f64>,
    pub capacity: f64,
    #[serde(rename = "R_bp_asymptotic")]
    pub r_bp_asymptotic: f64,
    pub gap_db_bp: Option<f64>,
    pub gap_db_opt: Option<f64>,
}

impl PhasePoint {
    pub fn transition(&self) -> bool {
        self.r_opt.is_some()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepSettings {
    pub mc_samples: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol_r: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { mc_samples: 1_000_000, seed: 0, max_iter: DeParams::DEFAULT_MAX_ITER, tol_r: 0.005 }
    }
}

fn bracketing_as_none<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Bracketing(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// DE BP threshold and replica optimal threshold at one `(B, snr)`.
pub fn phase_point(b: usize, snr: f64, s: &SweepSettings) -> Result<PhasePoint> {
    let cap = capacity(snr)?;
    let mut p = DeParams::new(b, 1.0, snr).with_mc_samples(s.mc_samples).with_seed(s.seed);
    p.max_iter = s.max_iter;
    let engine = DeEngine::new(&p)?;
    let r_bp = bracketing_as_none(engine.bp_threshold(RATE_FLOOR, cap, s.tol_r))?.map(|t| t.r_bp);
    let eval = PotentialEvaluator::from_measure(engine.measure().clone(), snr);
    let lo = r_bp.map_or(RATE_FLOOR, |r| (r - 0.1).max(RATE_FLOOR));
    let r_opt = bracketing_as_none(eval.optimal_threshold(lo, cap * 0.999, s.tol_r))?;
    Ok(PhasePoint {
        b,
        snr,
        r_bp,
        r_opt,
        capacity: cap,
        r_bp_asymptotic: asymptotic_bp_rate(snr)?,
        gap_db_bp: r_bp.map(|r| gap_to_capacity_db(snr, r)),
        gap_db_opt: r_opt.map(|r| gap_to_capacity_db(snr, r)),
    })
}

/// Phase diagram at fixed `snr` over section sizes.
pub fn phase_diagram_b(snr: f64, b_list: &[usize], s: &SweepSettings) -> Result<Vec<PhasePoint>> {
    if b_list.is_empty() {
        return Err(Error::Parameter("empty list of section sizes".into()));
    }
    b_list.iter().map(|&b| phase_point(b, snr, s)).collect()
}

/// Phase diagram at fixed `B` over signal-to-noise ratios, with gaps to capacity in dB.
pub fn phase_diagram_snr(b: usize, snr_list: &[f64], s: &SweepSettings) -> Result<Vec<PhasePoint>> {
    if snr_list.is_empty() {
        return Err(Error::Parameter("empty list of snr values".into()));
    }
    snr_list.iter().map(|&snr| phase_point(b, snr, s)).collect()
}

/// CSV with columns `B,snr,R_bp,R_opt,capacity,R_bp_asymptotic,gap_db_bp,gap_db_opt,transition`.
pub fn phase_csv(rows: &[PhasePoint]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from("B,snr,R_bp,R_opt,capacity,R_bp_asymptotic,gap_db_bp,gap_db_opt,transition\n");
    for p in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.b,
            p.snr,
            opt(p.r_bp),
            opt(p.r_opt),
            p.capacity,
            p.r_bp_asymptotic,
            opt(p.gap_db_bp),
            opt(p.gap_db_opt),
            if p.transition() { "yes" } else { "no_transition" }
        ));
    }
    out
}

/// Integration settings matching a sweep.
pub fn integration(s: &SweepSettings) -> Integration {
    Integration::Auto { mc_samples: s.mc_samples, seed: s.seed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_point_at_high_snr_has_a_transition() {
        let s = SweepSettings { tol_r: 0.01, ..Default::default() };
        let p = phase_point(2, 30.0, &s).unwrap();
        let (bp, opt) = (p.r_bp.unwrap(), p.r_opt.unwrap());
        assert!(bp < opt && opt < p.capacity);
        assert!(p.gap_db_opt.unwrap() > 0.0);
    }

    #[test]
    fn binary_point_at_low_snr_has_none() {
        let s = SweepSettings { tol_r: 0.02, ..Default::default() };
        let p = phase_point(2, 10.0, &s).unwrap();
        assert!(!p.transition());
        assert!(phase_csv(&[p]).contains("no_transition"));
    }
}

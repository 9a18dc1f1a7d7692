//! Replica free-entropy potential `Φ_B(E)` and the thresholds it defines.
//!
//! The potential is known up to an additive constant that depends on
//! `(B, R, snr)`, so only its argmax and height differences at fixed
//! parameters carry meaning. Values are never compared across parameter sets.
//!
//! The typical error of optimal decoding sits at the global maximum. For
//! small rates there is a single maximum; past the BP threshold a second,
//! high-error maximum appears, and past the optimal threshold it becomes the
//! global one.

use serde::{Deserialize, Serialize};

use crate::de::sigma_eff;
use crate::error::{Error, Result};
use crate::measure::{Estimate, Integration, SectionMeasure};

/// Number of log-spaced grid points used to locate maxima.
pub const GRID_POINTS: usize = 200;
pub const GRID_E_MIN: f64 = 1e-8;
pub const GRID_E_MAX: f64 = 1.0;

/// `[(1/snr + 1)·2·ln 2]⁻¹`, the `B → ∞` limit of the BP threshold.
pub fn asymptotic_bp_rate(snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::Parameter(format!("snr must be positive, got {snr}")));
    }
    Ok(1.0 / ((1.0 / snr + 1.0) * 2.0 * std::f64::consts::LN_2))
}

/// Log-spaced grid of `points` values in `[e_min, e_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { e_min: GRID_E_MIN, e_max: GRID_E_MAX, points: GRID_POINTS }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.e_min.ln(), self.e_max.ln());
        let n = self.points.max(2);
        (0..n)
            .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub e: f64,
    pub ser: f64,
    pub phi: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub e: f64,
    pub phi: f64,
    pub ser: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub snr: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

/// Sampled potential with its local maxima, sorted by increasing `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialCurve {
    pub grid: Vec<CurvePoint>,
    pub maxima: Vec<Maximum>,
    pub params: CurveParams,
}

impl PotentialCurve {
    /// The global maximum.
    pub fn dominant(&self) -> Maximum {
        *self
            .maxima
            .iter()
            .max_by(|a, b| a.phi.total_cmp(&b.phi))
            .expect("a continuous function on a closed grid has a maximum")
    }

    /// CSV with columns `E,SER,phi,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("E,SER,phi,stderr\n");
        for p in &self.grid {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", p.e, p.ser, p.phi, p.stderr));
        }
        out
    }
}

/// Evaluates `Φ_B` for fixed `B` and `snr` at any `(E, R)`.
#[derive(Clone, Debug)]
pub struct PotentialEvaluator {
    measure: SectionMeasure,
    snr: f64,
    grid: GridSpec,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

impl PotentialEvaluator {
    pub fn new(b: usize, snr: f64, integration: Integration) -> Result<Self> {
        if !(snr > 0.0) {
            return Err(Error::Parameter(format!("snr must be positive, got {snr}")));
        }
        Ok(Self::from_measure(SectionMeasure::new(b, integration)?, snr))
    }

    pub fn from_measure(measure: SectionMeasure, snr: f64) -> Self {
        PotentialEvaluator { measure, snr, grid: GridSpec::default() }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn section_size(&self) -> usize {
        self.measure.section_size()
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn measure(&self) -> &SectionMeasure {
        &self.measure
    }

    /// `Φ_B(E)` at rate `r`.
    ///
    /// Uses the rearrangement `Φ = −c·ln(Δ+E) + c·E/(Δ+E) + ∫Dz̄ ln(1 + Σ_{k≥2} e^{t_k})`
    /// with `c = log2(B)/(2R)` and `Δ = 1/snr`, which is the potential with its
    /// `1/(2Σ²)` and zero-mean `z_1/Σ` terms integrated in closed form.
    pub fn phi(&self, e: f64, r: f64) -> Result<Estimate> {
        if !(e >= 0.0) {
            return Err(Error::NumericDomain(format!("E must be non-negative, got {e}")));
        }
        if !(r > 0.0) {
            return Err(Error::Parameter(format!("rate must be positive, got {r}")));
        }
        let b = self.section_size();
        let c = (b as f64).log2() / (2.0 * r);
        let total = 1.0 / self.snr + e;
        let j = self.measure.log_partition(sigma_eff(e, b, r, self.snr))?;
        Ok(Estimate {
            value: -c * total.ln() + c * e / total + j.value,
            stderr: j.stderr,
        })
    }

    pub fn ser(&self, e: f64, r: f64) -> Result<f64> {
        Ok(self
            .measure
            .ser(sigma_eff(e, self.section_size(), r, self.snr))?
            .value)
    }

    fn golden_max(&self, mut lo: f64, mut hi: f64, r: f64) -> Result<(f64, f64)> {
        let f = |e: f64| self.phi(e, r).map(|p| p.value);
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        for _ in 0..200 {
            if hi - lo <= 1e-9 * hi.max(1e-300) {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = f(x2)?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = f(x1)?;
            }
        }
        Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
    }

    /// Samples `Φ` on the grid and locates all local maxima at rate `r`.
    pub fn find_maxima(&self, r: f64) -> Result<PotentialCurve> {
        let es = self.grid.values();
        let mut grid = Vec::with_capacity(es.len());
        for &e in &es {
            let phi = self.phi(e, r)?;
            grid.push(CurvePoint { e, ser: self.ser(e, r)?, phi: phi.value, stderr: phi.stderr });
        }
        let n = grid.len();
        let mut maxima = Vec::new();
        for i in 0..n {
            let left = i == 0 || grid[i].phi > grid[i - 1].phi;
            let right = i + 1 == n || grid[i].phi >= grid[i + 1].phi;
            if !(left && right) {
                continue;
            }
            let (e, phi) = if i == 0 || i + 1 == n {
                (grid[i].e, grid[i].phi)
            } else {
                self.golden_max(grid[i - 1].e, grid[i + 1].e, r)?
            };
            maxima.push(Maximum { e, phi, ser: self.ser(e, r)? });
        }
        let (mc_samples, seed) = self
            .measure
            .samples()
            .map(|s| (s.len(), s.seed()))
            .unwrap_or((0, 0));
        Ok(PotentialCurve {
            grid,
            maxima,
            params: CurveParams { b: self.section_size(), r, snr: self.snr, mc_samples, seed },
        })
    }

    /// Rate at which a second maximum of `Φ` appears.
    pub fn bp_threshold_appearance(&self, r_lo: f64, r_hi: f64, tol_r: f64) -> Result<f64> {
        check_bracket(r_lo, r_hi, tol_r)?;
        let two = |r: f64| self.find_maxima(r).map(|c| c.maxima.len() >= 2);
        let (lo2, hi2) = (two(r_lo)?, two(r_hi)?);
        if lo2 || !hi2 {
            return Err(Error::Bracketing(format!(
                "need a single maximum at R={r_lo} and two at R={r_hi} (found {} and {})",
                if lo2 { "two" } else { "one" },
                if hi2 { "two" } else { "one" }
            )));
        }
        let (mut lo, mut hi) = (r_lo, r_hi);
        while hi - lo > tol_r {
            let mid = 0.5 * (lo + hi);
            if two(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Rate at which the low- and high-error maxima of `Φ` have equal height.
    ///
    /// Fails with a bracketing error when no rate in `[r_lo, r_hi]` shows two
    /// maxima, which happens below the snr where the transition ends.
    pub fn optimal_threshold(&self, r_lo: f64, r_hi: f64, tol_r: f64) -> Result<f64> {
        check_bracket(r_lo, r_hi, tol_r)?;
        let lo_curve = self.find_maxima(r_lo)?;
        let hi_curve = self.find_maxima(r_hi)?;
        // a rate with coexisting maxima fixes where "low" ends and "high" begins
        let mut split = [&lo_curve, &hi_curve]
            .into_iter()
            .find(|c| c.maxima.len() >= 2)
            .map(split_point);
        if split.is_none() {
            for k in 1..16 {
                let r = r_lo + (r_hi - r_lo) * k as f64 / 16.0;
                let c = self.find_maxima(r)?;
                if c.maxima.len() >= 2 {
                    split = Some(split_point(&c));
                    break;
                }
            }
        }
        let split = split.ok_or_else(|| {
            Error::Bracketing(format!(
                "Φ never has two maxima for R in [{r_lo}, {r_hi}] at snr={} (no transition)",
                self.snr
            ))
        })?;
        let low_wins = |c: &PotentialCurve| c.dominant().e < split;
        if !low_wins(&lo_curve) || low_wins(&hi_curve) {
            return Err(Error::Bracketing(format!(
                "the low-error maximum must dominate at R={r_lo} and lose at R={r_hi}"
            )));
        }
        let (mut lo, mut hi) = (r_lo, r_hi);
        while hi - lo > tol_r {
            let mid = 0.5 * (lo + hi);
            if low_wins(&self.find_maxima(mid)?) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn split_point(c: &PotentialCurve) -> f64 {
    let low = c.maxima.first().unwrap().e;
    let high = c.maxima.last().unwrap().e;
    (low * high).sqrt()
}

fn check_bracket(r_lo: f64, r_hi: f64, tol_r: f64) -> Result<()> {
    if r_lo > 0.0 && r_hi > r_lo && tol_r > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "need 0 < r_lo < r_hi and tol_r > 0, got [{r_lo}, {r_hi}], tol {tol_r}"
        )))
    }
}

/// What `optimal_ser_curve` sweeps over at fixed rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    SectionSizes { snr: f64, sizes: Vec<usize> },
    Snrs { b: usize, snrs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerCurve {
    pub r: f64,
    /// `(x, E*, SER*)` per sweep point.
    pub points: Vec<(f64, f64, f64)>,
    /// Least-squares slope of `ln SER*` against `ln x`.
    pub exponent: f64,
}

/// Optimal SER at the dominant maximum of `Φ` along a sweep, with a power-law fit.
pub fn optimal_ser_curve(r: f64, sweep: &Sweep, mc_samples: usize, seed: u64) -> Result<SerCurve> {
    let settings: Vec<(usize, f64, f64)> = match sweep {
        Sweep::SectionSizes { snr, sizes } => sizes.iter().map(|&b| (b, *snr, b as f64)).collect(),
        Sweep::Snrs { b, snrs } => snrs.iter().map(|&s| (*b, s, s)).collect(),
    };
    if settings.len() < 2 {
        return Err(Error::Parameter("a sweep needs at least two points".into()));
    }
    let mut points = Vec::with_capacity(settings.len());
    for (b, snr, x) in settings {
        let eval = PotentialEvaluator::new(b, snr, Integration::Auto { mc_samples, seed })?;
        let star = eval.find_maxima(r)?.dominant();
        points.push((x, star.e, star.ser));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, _, s)| (x.ln(), s.ln())).collect();
    Ok(SerCurve { r, points, exponent: fit_slope(&logs) })
}

pub fn fit_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(snr: f64) -> PotentialEvaluator {
        PotentialEvaluator::new(2, snr, Integration::Auto { mc_samples: 0, seed: 0 }).unwrap()
    }

    #[test]
    fn asymptotic_rate_values() {
        assert!((asymptotic_bp_rate(15.0).unwrap() - 0.6763).abs() < 5e-5);
        let lim = 1.0 / (2.0 * std::f64::consts::LN_2);
        assert!((asymptotic_bp_rate(1e12).unwrap() - lim).abs() < 1e-9);
        assert!((lim - 0.7213).abs() < 5e-5);
        let mut last = 0.0;
        for k in 1..50 {
            let v = asymptotic_bp_rate(k as f64).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn grid_is_increasing() {
        let g = GridSpec::default().values();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-8).abs() < 1e-20 && (g[199] - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn maxima_count_follows_the_rate() {
        let eval = binary(30.0);
        assert_eq!(eval.find_maxima(1.5).unwrap().maxima.len(), 1);
        let mid = eval.find_maxima(1.72).unwrap();
        assert_eq!(mid.maxima.len(), 2);
        assert!(mid.maxima[0].phi > mid.maxima[1].phi);
        let high = eval.find_maxima(1.85).unwrap();
        assert_eq!(high.maxima.len(), 2);
        assert!(high.maxima[1].phi > high.maxima[0].phi);
        assert!(high.dominant().e > 0.1);
    }

    #[test]
    fn no_transition_at_low_snr() {
        let eval = binary(15.0);
        assert!(matches!(eval.optimal_threshold(1.0, 1.99, 0.01), Err(Error::Bracketing(_))));
    }

    #[test]
    fn potential_is_stationary_at_density_evolution_fixed_points() {
        let eval = binary(30.0);
        let engine = crate::de::DeEngine::new(&crate::de::DeParams::new(2, 1.5, 30.0)).unwrap();
        let fp = engine.run(1.5).unwrap();
        assert!(fp.converged);
        let curve = eval.find_maxima(1.5).unwrap();
        let star = curve.dominant();
        assert!((star.e - fp.fixed_point_e).abs() < 1e-6 * fp.fixed_point_e.max(1e-3));
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0].iter().map(|&x| (x.ln(), -3.0 * x.ln() + 1.0)).collect();
        assert!((fit_slope(&pts) + 3.0).abs() < 1e-12);
    }
}

//! Ground truth for tests: exhaustive ML decoding and `B = 2` reference integrals.

use serde::{Deserialize, Serialize};

use crate::de::{f0, f1, sigma_eff};
use crate::error::{Error, Result};
use crate::experiment::Instance;
use crate::model::{encode, section_encode, CodeParams, CodingMatrix, Message, SparseSignal};
use crate::quadrature::{erfc, GaussLegendre};

/// Largest number of candidate messages `ml_decode` will enumerate.
pub const ENUMERATION_BUDGET: u128 = 1 << 20;

/// A complete small instance: code, message, signal, channel output.
#[derive(Clone, Debug)]
pub struct TinyInstance {
    pub params: CodeParams,
    pub f: CodingMatrix,
    pub message: Message,
    pub x: SparseSignal,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl TinyInstance {
    pub fn generate(params: CodeParams, seed: u64) -> Result<Self> {
        candidates(&params)?;
        let Instance { f, message, x, y, .. } = Instance::generate(params, seed)?;
        Ok(TinyInstance { params, f, message, x, y, seed })
    }
}

fn candidates(params: &CodeParams) -> Result<u128> {
    let mut count: u128 = 1;
    for _ in 0..params.l {
        count = count.saturating_mul(params.b as u128);
        if count > ENUMERATION_BUDGET {
            return Err(Error::Enumeration(
                (params.b as u128).checked_pow(params.l as u32).unwrap_or(u128::MAX),
            ));
        }
    }
    Ok(count)
}

/// Squared residual `‖y − F·section_encode(m)‖²`.
pub fn residual_norm(f: &CodingMatrix, y: &[f64], msg: &Message) -> Result<f64> {
    let x = section_encode(msg, f.cols() / msg.len())?;
    let c = encode(f, &x)?;
    Ok(y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Digits (least significant first) of the `n`-th word of the reflected `B`-ary Gray code.
fn gray_digits(mut n: u128, b: u128, out: &mut [usize]) {
    for d in out.iter_mut() {
        let digit = n % b;
        n /= b;
        *d = if n % 2 == 1 { (b - 1 - digit) as usize } else { digit as usize };
    }
}

/// Maximum-likelihood message by exhaustive search.
///
/// Messages are visited in reflected Gray-code order so each step changes a
/// single section and the residual is updated with two column operations; it
/// is recomputed from scratch every 4096 steps. Ties go to the
/// lexicographically smallest message.
pub fn ml_decode(f: &CodingMatrix, y: &[f64], params: &CodeParams) -> Result<Message> {
    let count = candidates(params)?;
    let (l, b, m) = (params.l, params.b, params.m);
    if f.rows() != m || f.cols() != params.n || y.len() != m {
        return Err(Error::Dimension(format!(
            "F is {} x {}, y has {} entries, parameters say {m} x {}",
            f.rows(),
            f.cols(),
            y.len(),
            params.n
        )));
    }
    let columns: Vec<Vec<f64>> = (0..params.n).map(|i| f.column(i)).collect();
    let fresh = |digits: &[usize]| -> Vec<f64> {
        let mut r = y.to_vec();
        for (sec, &d) in digits.iter().enumerate() {
            for (ri, c) in r.iter_mut().zip(&columns[sec * b + d]) {
                *ri -= c;
            }
        }
        r
    };
    let mut digits = vec![0usize; l];
    let mut next = vec![0usize; l];
    let mut resid = fresh(&digits);
    let mut best_norm = resid.iter().map(|x| x * x).sum::<f64>();
    let mut best = digits.clone();
    for n in 1..count {
        gray_digits(n, b as u128, &mut next);
        if n % 4096 == 0 {
            resid = fresh(&next);
        } else {
            let sec = (0..l).find(|&s| next[s] != digits[s]).expect("Gray neighbours differ");
            let (old, new) = (&columns[sec * b + digits[sec]], &columns[sec * b + next[sec]]);
            for ((ri, o), c) in resid.iter_mut().zip(old).zip(new) {
                *ri += o - c;
            }
        }
        std::mem::swap(&mut digits, &mut next);
        let norm = resid.iter().map(|x| x * x).sum::<f64>();
        if norm < best_norm || (norm == best_norm && digits < best) {
            best_norm = norm;
            best = digits.clone();
        }
    }
    Message::new(best.iter().map(|d| d + 1).collect(), b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadKind {
    DeStep,
    Ser,
    Phi,
}

/// Nodes per panel used by [`quad_reference_b2`].
pub const REFERENCE_NODES: usize = 64;

/// `B = 2` reference value of a density evolution step, SER or potential at `(E, R, snr)`.
pub fn quad_reference_b2(kind: QuadKind, e: f64, r: f64, snr: f64) -> Result<f64> {
    quad_reference_b2_with(kind, e, r, snr, REFERENCE_NODES)
}

/// As [`quad_reference_b2`], with `nodes` Gauss–Legendre nodes on each panel.
///
/// The integrals run over `u = z_2 − z_1 ~ N(0, 2)` on a uniform panel grid
/// covering ±12 standard deviations with panels no wider than `Σ/2`; the
/// integrands are evaluated through the section posterior functions of
/// density evolution rather than their `B = 2` simplifications.
pub fn quad_reference_b2_with(kind: QuadKind, e: f64, r: f64, snr: f64, nodes: usize) -> Result<f64> {
    if !(e >= 0.0) || !(r > 0.0) || !(snr > 0.0) {
        return Err(Error::Parameter(format!("need E ≥ 0, R > 0, snr > 0 (E={e}, R={r}, snr={snr})")));
    }
    let sigma = sigma_eff(e, 2, r, snr);
    let rule = GaussLegendre::new(nodes);
    let std = std::f64::consts::SQRT_2;
    let half = 12.0 * std;
    let width = (sigma / 2.0).min(0.25);
    let panels = (2.0 * half / width).ceil() as usize;
    let h = 2.0 * half / panels as f64;
    let density = |u: f64| (-u * u / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt();
    let integrate = |g: &dyn Fn(f64) -> f64| -> f64 {
        (0..panels)
            .map(|k| {
                let a = -half + k as f64 * h;
                rule.integrate(a, a + h, |u| g(u) * density(u))
            })
            .sum()
    };
    Ok(match kind {
        QuadKind::DeStep => integrate(&|u| {
            let z = [0.0, u];
            let p1 = f1(sigma, &z).unwrap();
            let p0 = f0(sigma, &z, 1, 0).unwrap();
            (p1 - 1.0).powi(2) + p0 * p0
        }),
        QuadKind::Ser => {
            // the indicator u > 1/Σ, integrated on its own range
            let gap = 1.0 / sigma;
            if gap >= half {
                0.5 * erfc(gap / 2.0)
            } else {
                let n = ((half - gap) / width).ceil().max(1.0) as usize;
                let step = (half - gap) / n as f64;
                (0..n)
                    .map(|k| rule.integrate(gap + k as f64 * step, gap + (k + 1) as f64 * step, density))
                    .sum::<f64>()
                    + 0.5 * erfc(half / 2.0)
            }
        }
        QuadKind::Phi => {
            let c = 1.0 / (2.0 * r);
            let delta = 1.0 / snr;
            let s2 = sigma * sigma;
            // ln(e^{1/(2Σ²)+z_1/Σ} + e^{−1/(2Σ²)+z_2/Σ}) with z_1 integrated out
            let bracket = integrate(&|u| {
                let hi = 0.5 / s2;
                let lo = -0.5 / s2 + u / sigma;
                let m = hi.max(lo);
                m + ((hi - m).exp() + (lo - m).exp()).ln()
            });
            -c * ((delta + e).ln() + (1.0 - e) / (delta + e)) + bracket
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Integration, SectionMeasure};
    use crate::model::sample_coding_matrix;
    use crate::replica::PotentialEvaluator;

    #[test]
    fn gray_code_changes_one_digit_by_one() {
        for b in [2usize, 3, 4] {
            let l = 4;
            let total = (b as u128).pow(l as u32);
            let mut prev = vec![0; l];
            let mut cur = vec![0; l];
            let mut seen = std::collections::HashSet::new();
            gray_digits(0, b as u128, &mut prev);
            seen.insert(prev.clone());
            for n in 1..total {
                gray_digits(n, b as u128, &mut cur);
                let diff: Vec<usize> = (0..l).filter(|&k| cur[k] != prev[k]).collect();
                assert_eq!(diff.len(), 1);
                assert_eq!(cur[diff[0]].abs_diff(prev[diff[0]]), 1);
                assert!(seen.insert(cur.clone()));
                std::mem::swap(&mut prev, &mut cur);
            }
            assert_eq!(seen.len() as u128, total);
        }
    }

    #[test]
    fn noiseless_instances_decode_exactly() {
        for seed in 0..5 {
            let p = CodeParams::new(5, 4, 1.0, 1e12).unwrap();
            let inst = TinyInstance::generate(p, seed).unwrap();
            assert_eq!(ml_decode(&inst.f, &inst.y, &p).unwrap(), inst.message);
        }
    }

    #[test]
    fn ml_minimises_the_residual() {
        let p = CodeParams::new(4, 3, 0.8, 2.0).unwrap();
        let inst = TinyInstance::generate(p, 11).unwrap();
        let ml = ml_decode(&inst.f, &inst.y, &p).unwrap();
        let best = residual_norm(&inst.f, &inst.y, &ml).unwrap();
        let mut digits = vec![0usize; 4];
        for n in 0..81u128 {
            gray_digits(n, 3, &mut digits);
            let m = Message::new(digits.iter().map(|d| d + 1).collect(), 3).unwrap();
            assert!(residual_norm(&inst.f, &inst.y, &m).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = CodeParams::new(21, 2, 1.0, 15.0).unwrap();
        let f = sample_coding_matrix(0, &p).unwrap();
        let y = vec![0.0; p.m];
        assert!(matches!(ml_decode(&f, &y, &p), Err(Error::Enumeration(n)) if n == 1 << 21));
        assert!(TinyInstance::generate(p, 0).is_err());
    }

    #[test]
    fn pure_noise_gives_chance_level_errors() {
        let p = CodeParams::new(6, 2, 1.0, 0.01).unwrap();
        let mut wrong = 0usize;
        let trials = 300;
        for seed in 0..trials {
            let inst = TinyInstance::generate(p, seed).unwrap();
            let ml = ml_decode(&inst.f, &inst.y, &p).unwrap();
            wrong += ml.sections().iter().zip(inst.message.sections()).filter(|(a, b)| a != b).count();
        }
        let ser = wrong as f64 / (trials as usize * p.l) as f64;
        assert!((ser - 0.5).abs() < 0.05, "ser {ser}");
    }

    #[test]
    fn reference_values() {
        // Σ² = (1/snr)·R = 0.25
        let (e, r, snr) = (0.0, 0.125, 0.5);
        let sigma = sigma_eff(e, 2, r, snr);
        assert!((sigma - 0.5).abs() < 1e-15);
        let ser = quad_reference_b2(QuadKind::Ser, e, r, snr).unwrap();
        assert!((ser - 0.5 * erfc(1.0)).abs() < 1e-12);
        assert!((ser - 0.0786).abs() < 5e-5);
        let tiny = quad_reference_b2(QuadKind::DeStep, 0.0, 0.01, 1e4).unwrap();
        assert!(tiny < 1e-12);
    }

    #[test]
    fn node_count_converged() {
        for kind in [QuadKind::DeStep, QuadKind::Ser, QuadKind::Phi] {
            for &(e, r, snr) in &[(0.3, 1.5, 30.0), (1e-6, 1.0, 15.0), (1.0, 1.9, 15.0)] {
                let a = quad_reference_b2_with(kind, e, r, snr, 64).unwrap();
                let b = quad_reference_b2_with(kind, e, r, snr, 128).unwrap();
                assert!((a - b).abs() < 1e-9, "{kind:?} at E={e}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn library_integrals_match_the_reference() {
        let measure = SectionMeasure::new(2, Integration::Auto { mc_samples: 0, seed: 0 }).unwrap();
        let eval = PotentialEvaluator::new(2, 30.0, Integration::Auto { mc_samples: 0, seed: 0 }).unwrap();
        for &e in &[1e-7, 1e-3, 0.05, 0.3, 1.0] {
            let r = 1.5;
            let sigma = sigma_eff(e, 2, r, 30.0);
            let step = quad_reference_b2(QuadKind::DeStep, e, r, 30.0).unwrap();
            assert!((measure.mse(sigma).unwrap().value - step).abs() < 1e-10);
            let ser = quad_reference_b2(QuadKind::Ser, e, r, 30.0).unwrap();
            assert!((measure.ser(sigma).unwrap().value - ser).abs() < 1e-10);
            let phi = quad_reference_b2(QuadKind::Phi, e, r, 30.0).unwrap();
            assert!((eval.phi(e, r).unwrap().value - phi).abs() < 1e-9);
        }
    }

    #[test]
    fn phi_matches_monte_carlo() {
        let mc = PotentialEvaluator::new(2, 30.0, Integration::MonteCarlo { mc_samples: 1_000_000, seed: 3 }).unwrap();
        for &e in &[0.3, 0.02, 0.7] {
            let est = mc.phi(e, 1.5).unwrap();
            let exact = quad_reference_b2(QuadKind::Phi, e, 1.5, 30.0).unwrap();
            assert!((est.value - exact).abs() < 3.0 * est.stderr.max(1e-12), "E={e}: {} ± {} vs {exact}", est.value, est.stderr);
        }
    }
}

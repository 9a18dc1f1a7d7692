//! Bayesian approximate message passing decoder.
//!
//! Each iteration makes one pass over the rows of `F` for the `(F·a, F²·v)`
//! products and one for `(Fᵀ·r, F²ᵀ·q)`, where `F²` is the elementwise square,
//! then applies the sectionwise posterior-mean denoiser. `F²` is formed on the
//! fly from the stored entries, so memory stays at one copy of `F`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{section_decode, section_error_rate, biased_mse, CodeParams, CodingMatrix, Message, SparseSignal};

/// How the initial posterior variances `v⁰` are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InitialVariance {
    /// `v⁰ = 1/B`: the prior variance of each component, so that `V⁰ ≈ E⁰ = 1`.
    #[default]
    Prior,
    /// `v⁰ = 1/(B·snr)`.
    NoiseScaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmpOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub initial_variance: InitialVariance,
}

impl Default for AmpOptions {
    fn default() -> Self {
        AmpOptions { max_iter: 50, tol: 1e-8, initial_variance: InitialVariance::Prior }
    }
}

/// One row of the decoder trace. `e` and `ser` are known only when the
/// transmitted signal is supplied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: usize,
    pub e: Option<f64>,
    pub ser: Option<f64>,
    /// `Σ_i v_i / L`, the decoder's own estimate of `E`.
    pub mse_estimate: f64,
    pub diverged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmpState {
    pub b: usize,
    pub a: Vec<f64>,
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    /// `V_μ`.
    pub var_m: Vec<f64>,
    /// `R_i`.
    pub fields: Vec<f64>,
    /// `Σ_i²`.
    pub sigma2: Vec<f64>,
    pub t: usize,
    pub trace: Vec<TracePoint>,
}

impl AmpState {
    /// `a⁰ = 0`, `ω⁰ = y`, `V⁰ = F²·v⁰`.
    pub fn initial(f: &CodingMatrix, y: &[f64], b: usize, v0: f64) -> Result<Self> {
        let (m, n) = (f.rows(), f.cols());
        if y.len() != m {
            return Err(Error::Dimension(format!("y has {} entries, F has {m} rows", y.len())));
        }
        if b < 2 || n % b != 0 {
            return Err(Error::Dimension(format!("{n} columns do not split into sections of {b}")));
        }
        let a = vec![0.0; n];
        let v = vec![v0; n];
        let mut fa = vec![0.0; m];
        let mut var_m = vec![0.0; m];
        f.forward(&a, &v, &mut fa, &mut var_m);
        Ok(AmpState {
            b,
            a,
            v,
            omega: y.to_vec(),
            var_m,
            fields: vec![0.0; n],
            sigma2: vec![f64::INFINITY; n],
            t: 0,
            trace: Vec::new(),
        })
    }

    pub fn sections(&self) -> usize {
        self.a.len() / self.b
    }

    pub fn mse_estimate(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.sections() as f64
    }

    pub fn message(&self) -> Result<Message> {
        section_decode(&self.a, self.b)
    }

    fn record(&mut self, truth: Option<&SparseSignal>, diverged: bool) -> Result<()> {
        let (e, ser) = match truth {
            Some(x) => (Some(biased_mse(&self.a, x)?.1), Some(section_error_rate(&self.a, x)?)),
            None => (None, None),
        };
        self.trace.push(TracePoint { t: self.t, e, ser, mse_estimate: self.mse_estimate(), diverged });
        Ok(())
    }

    /// CSV with columns `t,E,SER,mse_estimate,diverged`; `E` and `SER` are
    /// empty when the decoder ran without the true signal.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,E,SER,mse_estimate,diverged\n");
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for p in &self.trace {
            out.push_str(&format!(
                "{},{},{},{:e},{}\n",
                p.t,
                opt(p.e),
                opt(p.ser),
                p.mse_estimate,
                u8::from(p.diverged)
            ));
        }
        out
    }
}

/// Posterior means and variances of one section under the one-hot prior.
pub fn denoise_section(sigma2: &[f64], fields: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if sigma2.len() != fields.len() {
        return Err(Error::Dimension(format!(
            "{} variances for {} fields",
            sigma2.len(),
            fields.len()
        )));
    }
    let mut a = vec![0.0; fields.len()];
    let mut v = vec![0.0; fields.len()];
    denoise_into(sigma2, fields, &mut a, &mut v)?;
    Ok((a, v))
}

fn denoise_into(sigma2: &[f64], fields: &[f64], a: &mut [f64], v: &mut [f64]) -> Result<()> {
    if let Some(bad) = sigma2.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::NumericDomain(format!("Σ² must be positive, got {bad}")));
    }
    for ((x, &s), &r) in a.iter_mut().zip(sigma2).zip(fields) {
        *x = (2.0 * r - 1.0) / (2.0 * s);
    }
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for x in a.iter_mut() {
        *x = (*x - max).exp();
        z += *x;
    }
    for (x, w) in a.iter_mut().zip(v.iter_mut()) {
        *x /= z;
        *w = *x * (1.0 - *x);
    }
    Ok(())
}

/// One AMP iteration, in place.
pub fn amp_step(state: &mut AmpState, f: &CodingMatrix, y: &[f64], snr: f64) -> Result<()> {
    let (m, n) = (f.rows(), f.cols());
    if state.a.len() != n || state.omega.len() != m || y.len() != m {
        return Err(Error::Dimension(format!(
            "state ({} x {}) does not match F ({m} x {n})",
            state.omega.len(),
            state.a.len()
        )));
    }
    let delta = 1.0 / snr;
    let iteration = state.t + 1;

    let mut fa = vec![0.0; m];
    let mut var_new = vec![0.0; m];
    f.forward(&state.a, &state.v, &mut fa, &mut var_new);
    let mut q = vec![0.0; m];
    let mut resid = vec![0.0; m];
    for mu in 0..m {
        let onsager = (y[mu] - state.omega[mu]) * var_new[mu] / (delta + state.var_m[mu]);
        let omega = fa[mu] - onsager;
        state.omega[mu] = omega;
        q[mu] = 1.0 / (delta + var_new[mu]);
        resid[mu] = (y[mu] - omega) * q[mu];
    }
    state.var_m = var_new;

    let mut ftr = vec![0.0; n];
    let mut f2tq = vec![0.0; n];
    f.backward(&resid, &q, &mut ftr, &mut f2tq);
    for i in 0..n {
        let s2 = 1.0 / f2tq[i];
        state.sigma2[i] = s2;
        state.fields[i] = state.a[i] + s2 * ftr[i];
    }
    if state.fields.iter().chain(&state.sigma2).chain(&state.omega).any(|x| !x.is_finite()) {
        return Err(Error::Divergence { iteration });
    }
    let b = state.b;
    for (((s2, r), a), v) in state
        .sigma2
        .chunks_exact(b)
        .zip(state.fields.chunks_exact(b))
        .zip(state.a.chunks_exact_mut(b))
        .zip(state.v.chunks_exact_mut(b))
    {
        denoise_into(s2, r, a, v).map_err(|_| Error::Divergence { iteration })?;
    }
    if state.a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence { iteration });
    }
    state.t = iteration;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmpOutcome {
    pub message: Message,
    pub state: AmpState,
    pub converged: bool,
    pub diverged: bool,
}

/// Runs AMP until the self-estimated MSE changes by less than `opts.tol` or
/// `opts.max_iter` iterations have been made.
///
/// With `truth` supplied, every trace row carries the true `E^t` and `SER^t`.
/// If the iteration blows up, the best state seen so far (lowest true SER when
/// known, lowest self-estimated MSE otherwise) is returned with `diverged` set.
pub fn run_amp(
    f: &CodingMatrix,
    y: &[f64],
    params: &CodeParams,
    opts: &AmpOptions,
    truth: Option<&SparseSignal>,
) -> Result<AmpOutcome> {
    if f.rows() != params.m || f.cols() != params.n {
        return Err(Error::Dimension(format!(
            "F is {} x {}, parameters say {} x {}",
            f.rows(),
            f.cols(),
            params.m,
            params.n
        )));
    }
    if let Some(x) = truth {
        if x.values().len() != params.n {
            return Err(Error::Dimension(format!(
                "signal has {} entries, expected {}",
                x.values().len(),
                params.n
            )));
        }
    }
    let b = params.b;
    let v0 = match opts.initial_variance {
        InitialVariance::Prior => 1.0 / b as f64,
        InitialVariance::NoiseScaled => 1.0 / (b as f64 * params.snr),
    };
    let mut state = AmpState::initial(f, y, b, v0)?;
    state.record(truth, false)?;

    let score = |s: &AmpState| -> f64 {
        match s.trace.last() {
            Some(TracePoint { ser: Some(ser), .. }) => *ser,
            _ => s.mse_estimate(),
        }
    };
    let mut best: Option<AmpState> = None;
    let mut converged = false;
    let mut diverged = false;
    let mut last = state.mse_estimate();
    for _ in 0..opts.max_iter {
        let before = state.clone();
        match amp_step(&mut state, f, y, params.snr) {
            Ok(()) => {}
            Err(Error::Divergence { iteration }) => {
                diverged = true;
                let mut keep = best.take().unwrap_or(before);
                keep.trace = state.trace.clone();
                keep.trace.push(TracePoint {
                    t: iteration,
                    e: None,
                    ser: None,
                    mse_estimate: f64::NAN,
                    diverged: true,
                });
                state = keep;
                break;
            }
            Err(e) => return Err(e),
        }
        state.record(truth, false)?;
        if best.as_ref().is_none_or(|bst| score(&state) <= score(bst)) {
            best = Some(state.clone());
        }
        let now = state.mse_estimate();
        if (now - last).abs() < opts.tol {
            converged = true;
            break;
        }
        last = now;
    }
    Ok(AmpOutcome { message: state.message()?, state, converged, diverged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::transmit;
    use crate::model::{encode, sample_coding_matrix, section_encode};
    use crate::rng;

    fn instance(l: usize, b: usize, r: f64, snr: f64, seed: u64) -> (CodeParams, CodingMatrix, SparseSignal, Vec<f64>) {
        let p = CodeParams::new(l, b, r, snr).unwrap();
        let f = sample_coding_matrix(seed, &p).unwrap();
        let msg = Message::random(l, b, &mut rng::stream(seed, "message", 0));
        let x = section_encode(&msg, b).unwrap();
        let y = transmit(&encode(&f, &x).unwrap(), snr, seed).unwrap().y;
        (p, f, x, y)
    }

    #[test]
    fn denoiser_examples() {
        let (a, v) = denoise_section(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((a[0] - 0.7311).abs() < 5e-5 && (a[1] - 0.2689).abs() < 5e-5);
        assert!((v[0] - 0.1966).abs() < 5e-5);
        let (a, _) = denoise_section(&[0.3; 4], &[0.2; 4]).unwrap();
        assert!(a.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert!(matches!(denoise_section(&[1.0, 0.0], &[0.0, 0.0]), Err(Error::NumericDomain(_))));
    }

    #[test]
    fn denoiser_is_stable_for_huge_exponents() {
        let (a, v) = denoise_section(&[1e-6, 1e-6, 1e-6], &[1.0, 0.99, -0.5]).unwrap();
        assert!(a.iter().all(|x| x.is_finite()));
        assert!((a[0] - 1.0).abs() < 1e-12 && v[0] >= 0.0);
        let (a, _) = denoise_section(&[1.0, 1.0], &[1e6, -1e6]).unwrap();
        assert_eq!(a, vec![1.0, 0.0]);
    }

    #[test]
    fn first_step_has_zero_omega() {
        let (p, f, _, y) = instance(64, 4, 1.0, 15.0, 3);
        let mut s = AmpState::initial(&f, &y, 4, 0.25).unwrap();
        amp_step(&mut s, &f, &y, p.snr).unwrap();
        assert!(s.omega.iter().all(|&w| w == 0.0));
        assert_eq!(s.t, 1);
    }

    #[test]
    fn truth_is_a_fixed_point_without_noise() {
        let snr = 1e6;
        let (p, f, x, y) = instance(32, 4, 1.0, snr, 5);
        let mut s = AmpState::initial(&f, &y, 4, 0.0).unwrap();
        s.a = x.values().to_vec();
        s.v = vec![0.0; p.n];
        s.var_m = vec![0.0; p.m];
        s.omega = encode(&f, &x).unwrap();
        amp_step(&mut s, &f, &y, snr).unwrap();
        for (a, t) in s.a.iter().zip(x.values()) {
            assert!((a - t).abs() < 1e-10, "{a} vs {t}");
        }
    }

    #[test]
    fn means_stay_on_the_simplex() {
        let (p, f, _, y) = instance(128, 8, 1.6, 15.0, 9);
        let mut s = AmpState::initial(&f, &y, 8, 1.0 / 8.0).unwrap();
        for _ in 0..10 {
            amp_step(&mut s, &f, &y, p.snr).unwrap();
            for block in s.a.chunks_exact(8) {
                assert!((block.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(block.iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
            for (a, v) in s.a.iter().zip(&s.v) {
                assert_eq!(*v, a * (1.0 - a));
            }
            assert!(s.var_m.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn low_rate_decodes_and_is_deterministic() {
        let (p, f, x, y) = instance(256, 2, 0.8, 15.0, 21);
        let opts = AmpOptions::default();
        let out = run_amp(&f, &y, &p, &opts, Some(&x)).unwrap();
        assert!(out.converged && !out.diverged);
        assert_eq!(out.state.trace.last().unwrap().ser, Some(0.0));
        let again = run_amp(&f, &y, &p, &opts, Some(&x)).unwrap();
        assert_eq!(out.state.trace, again.state.trace);
        assert_eq!(out.message, again.message);
    }

    #[test]
    fn far_above_capacity_stalls_at_high_error() {
        // density evolution puts the high-error fixed point at SER ≈ 0.44 for B = 4
        let (p, f, x, y) = instance(512, 4, 3.0, 15.0, 2);
        let out = run_amp(&f, &y, &p, &AmpOptions::default(), Some(&x)).unwrap();
        let ser = out.state.trace.last().unwrap().ser.unwrap();
        assert!((ser - 0.44).abs() < 0.05, "SER {ser}");
    }

    #[test]
    fn self_estimate_tracks_true_error() {
        // E is carried by a few dozen wrong sections late in the run, so pool a few instances
        let iters = 8;
        let mut e = vec![0.0; iters + 1];
        let mut est = vec![0.0; iters + 1];
        let mut ser = vec![0.0; iters + 1];
        for seed in [13, 14, 15] {
            let (p, f, x, y) = instance(4096, 2, 1.0, 15.0, seed);
            let out = run_amp(&f, &y, &p, &AmpOptions { max_iter: iters, tol: 0.0, ..Default::default() }, Some(&x)).unwrap();
            for tp in &out.state.trace {
                e[tp.t] += tp.e.unwrap() / 3.0;
                ser[tp.t] += tp.ser.unwrap() / 3.0;
                est[tp.t] += tp.mse_estimate / 3.0;
            }
        }
        let mut checked = 0;
        for t in 1..=iters {
            if ser[t] < 0.1 && e[t] > 1e-2 {
                assert!((est[t] / e[t] - 1.0).abs() < 0.15, "t={t} E={} estimate={}", e[t], est[t]);
                checked += 1;
            }
        }
        assert!(checked >= 2);
    }

    #[test]
    fn permuting_a_section_permutes_the_estimate() {
        let (p, f, x, y) = instance(16, 4, 1.0, 15.0, 17);
        let perm = [2usize, 0, 3, 1];
        let mut g = f.clone();
        let mut xp = x.values().to_vec();
        for k in 0..4 {
            // section 0 column k moves to position perm[k]
            for mu in 0..p.m {
                g.set_entry(mu, perm[k], f.entry(mu, k) as f32);
            }
            xp[perm[k]] = x.values()[k];
        }
        let xp = SparseSignal::from_dense(xp, 4).unwrap();
        let opts = AmpOptions { max_iter: 5, ..Default::default() };
        let a = run_amp(&f, &y, &p, &opts, Some(&x)).unwrap().state.a;
        let ap = run_amp(&g, &y, &p, &opts, Some(&xp)).unwrap().state.a;
        for k in 0..4 {
            assert!((a[k] - ap[perm[k]]).abs() < 1e-9);
        }
        assert!((a[4..].iter().zip(&ap[4..]).map(|(u, w)| (u - w).abs()).fold(0.0, f64::max)) < 1e-9);
    }

    #[test]
    fn trace_csv_layout() {
        let (p, f, _, y) = instance(16, 2, 1.0, 15.0, 1);
        let out = run_amp(&f, &y, &p, &AmpOptions { max_iter: 2, ..Default::default() }, None).unwrap();
        let csv = out.state.trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,E,SER,mse_estimate,diverged");
        assert!(lines[1].starts_with("0,,,"));
        assert_eq!(lines.len(), 1 + out.state.trace.len());
    }
}

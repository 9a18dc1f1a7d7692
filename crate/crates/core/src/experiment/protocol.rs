//! Finite-size decoding experiments.
//!
//! A trial draws a coding matrix, a uniform message and channel noise from
//! its own seed and runs AMP against the known signal. Trial seeds depend on
//! the master seed and the trial index only, so the same messages and noise
//! are reused at every rate; matrix rows are seeded per row, so the matrix at
//! a lower rate (more rows) extends the one at a higher rate.

use serde::{Deserialize, Serialize};

use crate::amp::{run_amp, AmpOptions};
use crate::channel::transmit;
use crate::error::{Error, Result};
use crate::model::{encode, sample_coding_matrix, section_encode, CodeParams, CodingMatrix, Message, SparseSignal};
use crate::rng;

/// Sections with SER above this count as a failed decoding.
pub const FAILURE_SER: f64 = 0.1;

/// Consecutive successes protocol 2 requires.
pub const PROTOCOL2_RUN: usize = 10;

#[derive(Clone, Debug)]
pub struct Instance {
    pub params: CodeParams,
    pub f: CodingMatrix,
    pub message: Message,
    pub x: SparseSignal,
    pub codeword: Vec<f64>,
    pub y: Vec<f64>,
}

impl Instance {
    /// Matrix, message and noise drawn from the streams `(seed, "matrix")`,
    /// `(seed, "message")` and `(seed, "noise")`.
    pub fn generate(params: CodeParams, seed: u64) -> Result<Self> {
        let message = Message::random(params.l, params.b, &mut rng::stream(seed, "message", 0));
        Self::with_message(params, seed, message)
    }

    pub fn with_message(params: CodeParams, seed: u64, message: Message) -> Result<Self> {
        if message.len() != params.l {
            return Err(Error::Encoding(format!(
                "message has {} sections, L={}",
                message.len(),
                params.l
            )));
        }
        let f = sample_coding_matrix(rng::derive_seed(seed, "matrix", 0), &params)?;
        let x = section_encode(&message, params.b)?;
        let codeword = encode(&f, &x)?;
        let y = transmit(&codeword, params.snr, rng::derive_seed(seed, "noise", 0))?.y;
        Ok(Instance { params, f, message, x, codeword, y })
    }
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    rng::derive_seed(master, "trial", index)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub ser: f64,
    pub iterations: usize,
    pub diverged: bool,
}

impl TrialOutcome {
    pub fn failed(&self) -> bool {
        self.ser > FAILURE_SER
    }
}

pub fn run_trial(params: &CodeParams, seed: u64, opts: &AmpOptions) -> Result<TrialOutcome> {
    let inst = Instance::generate(*params, seed)?;
    let out = run_amp(&inst.f, &inst.y, params, opts, Some(&inst.x))?;
    let ser = inst
        .message
        .sections()
        .iter()
        .zip(out.message.sections())
        .filter(|(a, b)| a != b)
        .count() as f64
        / params.l as f64;
    Ok(TrialOutcome { ser, iterations: out.state.t, diverged: out.diverged })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R_eff")]
    pub r_eff: f64,
    pub trials: usize,
    pub failures: usize,
    pub p_epsilon: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub protocol: u8,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub snr: f64,
    pub master_seed: u64,
    pub records: Vec<ProtocolRecord>,
    /// Largest passing rate on the grid.
    pub threshold: Option<f64>,
}

impl ProtocolResult {
    fn new(protocol: u8, l: usize, b: usize, snr: f64, master_seed: u64, records: Vec<ProtocolRecord>) -> Self {
        let threshold = records.iter().filter(|r| r.pass).map(|r| r.r).fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        });
        ProtocolResult { protocol, l, b, snr, master_seed, records, threshold }
    }

    /// CSV with columns `R,R_eff,trials,failures,p_epsilon,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,R_eff,trials,failures,p_epsilon,pass\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.r,
                r.r_eff,
                r.trials,
                r.failures,
                r.p_epsilon,
                u8::from(r.pass)
            ));
        }
        out
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::Parameter("empty rate grid".into()));
    }
    Ok(())
}

/// Protocol 1: at each rate decode `trials` fresh instances and pass when the
/// fraction with SER > 0.1 is below `p_cut`.
pub fn protocol1(
    l: usize,
    b: usize,
    snr: f64,
    r_grid: &[f64],
    trials: usize,
    master_seed: u64,
    p_cut: f64,
    opts: &AmpOptions,
) -> Result<ProtocolResult> {
    check_grid(r_grid)?;
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let params = CodeParams::new(l, b, r, snr)?;
        let mut failures = 0;
        for k in 0..trials {
            if run_trial(&params, trial_seed(master_seed, k as u64), opts)?.failed() {
                failures += 1;
            }
        }
        let p_epsilon = failures as f64 / trials as f64;
        records.push(ProtocolRecord {
            r,
            r_eff: params.r_eff,
            trials,
            failures,
            p_epsilon,
            pass: p_epsilon < p_cut,
        });
    }
    Ok(ProtocolResult::new(1, l, b, snr, master_seed, records))
}

/// Protocol 2: a rate passes when 10 consecutive fresh instances all decode
/// with SER < 0.1 at the first attempt. Stops at the first failure.
pub fn protocol2(
    l: usize,
    b: usize,
    snr: f64,
    r_grid: &[f64],
    master_seed: u64,
    opts: &AmpOptions,
) -> Result<ProtocolResult> {
    check_grid(r_grid)?;
    let mut records = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let params = CodeParams::new(l, b, r, snr)?;
        let mut tried = 0;
        let mut failures = 0;
        for k in 0..PROTOCOL2_RUN {
            tried += 1;
            if run_trial(&params, trial_seed(master_seed, k as u64), opts)?.failed() {
                failures = 1;
                break;
            }
        }
        records.push(ProtocolRecord {
            r,
            r_eff: params.r_eff,
            trials: tried,
            failures,
            p_epsilon: failures as f64 / tried as f64,
            pass: failures == 0,
        });
    }
    Ok(ProtocolResult::new(2, l, b, snr, master_seed, records))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedNRecord {
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "R_eff")]
    pub r_eff: f64,
    pub trials: usize,
    pub failures: usize,
    pub p_epsilon: f64,
}

/// Failure probability at fixed signal length `n` for each section size; `L = n/B`.
pub fn fixed_n_sweep(
    n: usize,
    b_list: &[usize],
    snr: f64,
    r: f64,
    trials: usize,
    master_seed: u64,
    opts: &AmpOptions,
) -> Result<Vec<FixedNRecord>> {
    if b_list.is_empty() || trials == 0 {
        return Err(Error::Parameter("need at least one section size and one trial".into()));
    }
    let mut rows = Vec::with_capacity(b_list.len());
    for &b in b_list {
        if b < 2 || n % b != 0 {
            return Err(Error::Parameter(format!("N={n} is not divisible by B={b}")));
        }
        let params = CodeParams::new(n / b, b, r, snr)?;
        let failures = (0..trials)
            .map(|k| run_trial(&params, trial_seed(master_seed, k as u64), opts).map(|o| o.failed()))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&f| f)
            .count();
        rows.push(FixedNRecord {
            b,
            l: params.l,
            r_eff: params.r_eff,
            trials,
            failures,
            p_epsilon: failures as f64 / trials as f64,
        });
    }
    Ok(rows)
}

pub fn fixed_n_csv(rows: &[FixedNRecord]) -> String {
    let mut out = String::from("B,L,R_eff,trials,failures,p_epsilon\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.b, r.l, r.r_eff, r.trials, r.failures, r.p_epsilon));
    }
    out
}

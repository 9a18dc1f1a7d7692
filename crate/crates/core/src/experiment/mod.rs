//! Batch experiments behind the command line tool.
//!
//! [`run`] turns a resolved [`ExperimentConfig`] into a [`Report`] holding both
//! a CSV table and a JSON document; [`Report::render`] adds the versioned
//! header. Output is a pure function of the configuration.

pub mod config;
pub mod protocol;
pub mod sweep;

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::amp::{run_amp, AmpOptions};
use crate::channel::capacity;
use crate::de::{DeEngine, DeParams};
use crate::error::{Error, Result};
use crate::measure::Integration;
use crate::model::{sample_coding_matrix, CodeParams, Message};
use crate::replica::{optimal_ser_curve, PotentialEvaluator, Sweep};
use crate::rng;

pub use config::{parse_config, ExperimentConfig, Format, Mode, SweepAxis};
pub use protocol::{fixed_n_sweep, protocol1, protocol2, Instance, ProtocolResult};
pub use sweep::{phase_diagram_b, phase_diagram_snr, PhasePoint, SweepSettings};

/// Version of the CSV and JSON layouts documented in `schemas.md`.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_REPLICA_MC_SAMPLES: usize = 1_000_000;
pub const DEFAULT_GRID_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub mode: Mode,
    pub config_hash: String,
    pub csv: String,
    pub json: Value,
}

impl Report {
    pub fn header(&self) -> String {
        format!("# sparc-schema={SCHEMA_VERSION} mode={} config={}", self.mode, self.config_hash)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}\n{}", self.header(), self.csv),
            Format::Json => {
                let doc = json!({
                    "schema": SCHEMA_VERSION,
                    "mode": self.mode.name(),
                    "config_hash": self.config_hash,
                    "data": self.json,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
                s.push('\n');
                s
            }
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn amp_options(cfg: &ExperimentConfig) -> AmpOptions {
    let d = AmpOptions::default();
    AmpOptions {
        max_iter: cfg.max_iter.unwrap_or(d.max_iter),
        tol: cfg.tol.unwrap_or(d.tol),
        initial_variance: cfg.initial_variance,
    }
}

fn code_params(cfg: &ExperimentConfig) -> Result<CodeParams> {
    CodeParams::new(cfg.l, cfg.b, cfg.r, cfg.snr)
}

fn de_params(cfg: &ExperimentConfig, b: usize, snr: f64) -> DeParams {
    let mut p = DeParams::new(b, cfg.r, snr).with_seed(cfg.seed);
    if let Some(n) = cfg.mc_samples {
        p.mc_samples = n;
    }
    if let Some(n) = cfg.max_iter {
        p.max_iter = n;
    }
    if let Some(t) = cfg.tol {
        p.tol = t;
    }
    p
}

fn sweep_settings(cfg: &ExperimentConfig) -> SweepSettings {
    let d = SweepSettings::default();
    SweepSettings {
        mc_samples: cfg.mc_samples.unwrap_or(d.mc_samples),
        seed: cfg.seed,
        max_iter: cfg.max_iter.unwrap_or(d.max_iter),
        tol_r: cfg.tol_r,
    }
}

fn message_for(cfg: &ExperimentConfig) -> Result<Option<Message>> {
    cfg.message
        .as_deref()
        .map(|m| Message::from_text(&m.replace(|c: char| c == ',' || c.is_whitespace(), "\n"), cfg.b))
        .transpose()
}

fn default_grid(snr: f64) -> Result<Vec<f64>> {
    let cap = capacity(snr)?;
    let n = ((cap - 0.5) / DEFAULT_GRID_STEP).floor().max(0.0) as usize;
    Ok((0..=n).map(|k| ((0.5 + k as f64 * DEFAULT_GRID_STEP) * 1e12).round() / 1e12).collect())
}

/// Reads channel outputs: one number per line, or a CSV whose header has a `y` column.
pub fn read_channel_output(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).peekable();
    let column = match lines.peek() {
        Some(first) if first.parse::<f64>().is_err() => {
            let col = first
                .split(',')
                .position(|c| c.trim() == "y")
                .ok_or_else(|| Error::Parse(format!("{}: no `y` column in header", path.display())))?;
            lines.next();
            col
        }
        _ => 0,
    };
    lines
        .enumerate()
        .map(|(k, line)| {
            line.split(',')
                .nth(column)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad value on data line {}", path.display(), k + 1)))
        })
        .collect()
}

/// Runs the experiment described by `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let (csv, json) = match cfg.mode {
        Mode::Encode => encode_mode(cfg)?,
        Mode::Decode => decode_mode(cfg)?,
        Mode::Simulate => simulate_mode(cfg)?,
        Mode::De => de_mode(cfg)?,
        Mode::Replica => replica_mode(cfg)?,
        Mode::PhaseDiagram => {
            let s = sweep_settings(cfg);
            let rows = if cfg.snr_list.is_empty() {
                let bs = if cfg.b_list.is_empty() { vec![2, 4, 8, 16] } else { cfg.b_list.clone() };
                phase_diagram_b(cfg.snr, &bs, &s)?
            } else {
                phase_diagram_snr(cfg.b, &cfg.snr_list, &s)?
            };
            (sweep::phase_csv(&rows), to_value(&rows)?)
        }
        Mode::Protocol1 | Mode::Protocol2 => {
            let grid = if cfg.r_grid.is_empty() { default_grid(cfg.snr)? } else { cfg.r_grid.clone() };
            let opts = amp_options(cfg);
            let res = if cfg.mode == Mode::Protocol1 {
                protocol1(cfg.l, cfg.b, cfg.snr, &grid, cfg.trials, cfg.seed, cfg.p_cut, &opts)?
            } else {
                protocol2(cfg.l, cfg.b, cfg.snr, &grid, cfg.seed, &opts)?
            };
            (res.to_csv(), to_value(&res)?)
        }
        Mode::SerCurve => {
            let sweep = match cfg.sweep {
                SweepAxis::B => Sweep::SectionSizes {
                    snr: cfg.snr,
                    sizes: if cfg.b_list.is_empty() { vec![2, 4, 8] } else { cfg.b_list.clone() },
                },
                SweepAxis::Snr => Sweep::Snrs {
                    b: cfg.b,
                    snrs: if cfg.snr_list.is_empty() { vec![15.0, 20.0, 25.0, 30.0] } else { cfg.snr_list.clone() },
                },
            };
            let mc = cfg.mc_samples.unwrap_or(DEFAULT_REPLICA_MC_SAMPLES);
            let curve = optimal_ser_curve(cfg.r, &sweep, mc, cfg.seed)?;
            let mut csv = String::from("x,E_star,SER_star\n");
            for (x, e, s) in &curve.points {
                csv.push_str(&format!("{x},{e:e},{s:e}\n"));
            }
            (csv, to_value(&curve)?)
        }
        Mode::FixedN => {
            let n = cfg.n.unwrap_or(4096);
            let bs = if cfg.b_list.is_empty() { vec![2, 4, 8, 16] } else { cfg.b_list.clone() };
            let rows = fixed_n_sweep(n, &bs, cfg.snr, cfg.r, cfg.trials, cfg.seed, &amp_options(cfg))?;
            (protocol::fixed_n_csv(&rows), to_value(&rows)?)
        }
    };
    Ok(Report { mode: cfg.mode, config_hash: cfg.hash(), csv, json })
}

fn encode_mode(cfg: &ExperimentConfig) -> Result<(String, Value)> {
    let params = code_params(cfg)?;
    let inst = match message_for(cfg)? {
        Some(m) => Instance::with_message(params, cfg.seed, m)?,
        None => Instance::generate(params, cfg.seed)?,
    };
    let mut csv = String::from("mu,codeword,y\n");
    for (mu, (c, y)) in inst.codeword.iter().zip(&inst.y).enumerate() {
        csv.push_str(&format!("{mu},{c:e},{y:e}\n"));
    }
    let json = json!({
        "params": params,
        "matrix": inst.f.header(),
        "message": inst.message.sections(),
        "codeword": inst.codeword,
        "y": inst.y,
    });
    Ok((csv, json))
}

fn decode_mode(cfg: &ExperimentConfig) -> Result<(String, Value)> {
    let params = code_params(cfg)?;
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Parameter("decode needs an input file of channel outputs".into()))?;
    let y = read_channel_output(path)?;
    if y.len() != params.m {
        return Err(Error::Dimension(format!(
            "{} channel outputs, but L={}, B={}, R={} needs M={}",
            y.len(),
            params.l,
            params.b,
            params.r,
            params.m
        )));
    }
    let f = sample_coding_matrix(rng::derive_seed(cfg.seed, "matrix", 0), &params)?;
    let out = run_amp(&f, &y, &params, &amp_options(cfg), None)?;
    let mut csv = String::from("section,symbol\n");
    for (l, s) in out.message.sections().iter().enumerate() {
        csv.push_str(&format!("{},{s}\n", l + 1));
    }
    let json = json!({
        "message": out.message.sections(),
        "converged": out.converged,
        "diverged": out.diverged,
        "trace": out.state.trace,
    });
    Ok((csv, json))
}

fn simulate_mode(cfg: &ExperimentConfig) -> Result<(String, Value)> {
    let params = code_params(cfg)?;
    let inst = match message_for(cfg)? {
        Some(m) => Instance::with_message(params, cfg.seed, m)?,
        None => Instance::generate(params, cfg.seed)?,
    };
    let out = run_amp(&inst.f, &inst.y, &params, &amp_options(cfg), Some(&inst.x))?;
    let ser = out.state.trace.iter().rev().find_map(|p| p.ser);
    let json = json!({
        "params": params,
        "message": inst.message.sections(),
        "decoded": out.message.sections(),
        "SER": ser,
        "converged": out.converged,
        "diverged": out.diverged,
        "trace": out.state.trace,
    });
    Ok((out.state.trace_csv(), json))
}

fn bracket(cfg: &ExperimentConfig, snr: f64) -> Result<(f64, f64)> {
    Ok((cfg.r_lo.unwrap_or(sweep::RATE_FLOOR), cfg.r_hi.unwrap_or(capacity(snr)?)))
}

fn de_mode(cfg: &ExperimentConfig) -> Result<(String, Value)> {
    let p = de_params(cfg, cfg.b, cfg.snr);
    let engine = DeEngine::new(&p)?;
    if cfg.threshold {
        let (lo, hi) = bracket(cfg, cfg.snr)?;
        let rep = engine.bp_threshold(lo, hi, cfg.tol_r)?;
        let csv = format!(
            "snr,B,R_bp,tol_r,ser_cut,mc_samples,seed\n{},{},{},{},{},{},{}\n",
            rep.snr, rep.b, rep.r_bp, rep.tol_r, rep.ser_cut, rep.mc_samples, rep.seed
        );
        Ok((csv, to_value(&rep)?))
    } else {
        let traj = engine.run(cfg.r)?;
        Ok((traj.to_csv(), to_value(&traj)?))
    }
}

fn replica_mode(cfg: &ExperimentConfig) -> Result<(String, Value)> {
    let mc = cfg.mc_samples.unwrap_or(DEFAULT_REPLICA_MC_SAMPLES);
    let eval = PotentialEvaluator::new(cfg.b, cfg.snr, Integration::Auto { mc_samples: mc, seed: cfg.seed })?;
    if cfg.threshold {
        let (lo, hi) = bracket(cfg, cfg.snr)?;
        let r_opt = eval.optimal_threshold(lo, hi * 0.999, cfg.tol_r)?;
        let r_app = eval.bp_threshold_appearance(lo, r_opt, cfg.tol_r)?;
        let mc_used = if eval.measure().uses_quadrature() { 0 } else { mc };
        let csv = format!(
            "snr,B,R_opt,R_bp_appearance,tol_r,mc_samples,seed\n{},{},{},{},{},{},{}\n",
            cfg.snr, cfg.b, r_opt, r_app, cfg.tol_r, mc_used, cfg.seed
        );
        let json = json!({
            "snr": cfg.snr,
            "B": cfg.b,
            "R_opt": r_opt,
            "R_bp_appearance": r_app,
            "tol_r": cfg.tol_r,
            "mc_samples": mc_used,
            "seed": cfg.seed,
        });
        Ok((csv, json))
    } else {
        let curve = eval.find_maxima(cfg.r)?;
        Ok((curve.to_csv(), to_value(&curve)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spacing() {
        let g = default_grid(15.0).unwrap();
        assert_eq!(g.first(), Some(&0.5));
        assert_eq!(g.last(), Some(&2.0));
        assert_eq!(g[3], 0.65);
    }

    #[test]
    fn header_carries_hash() {
        let mut cfg = ExperimentConfig::new(Mode::Simulate);
        cfg.l = 16;
        let rep = run(&cfg).unwrap();
        let text = rep.render(Format::Csv);
        assert!(text.starts_with(&format!("# sparc-schema=1 mode=simulate config={}\n", cfg.hash())));
        let doc: Value = serde_json::from_str(&rep.render(Format::Json)).unwrap();
        assert_eq!(doc["config_hash"], Value::String(cfg.hash()));
        assert_eq!(doc["schema"], 1);
    }
}

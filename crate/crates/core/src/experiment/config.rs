//! Experiment configuration: `key=value` files merged with command line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amp::InitialVariance;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Encode,
    Decode,
    Simulate,
    De,
    Replica,
    PhaseDiagram,
    Protocol1,
    Protocol2,
    SerCurve,
    FixedN,
}

impl Mode {
    pub const ALL: [Mode; 10] = [
        Mode::Encode,
        Mode::Decode,
        Mode::Simulate,
        Mode::De,
        Mode::Replica,
        Mode::PhaseDiagram,
        Mode::Protocol1,
        Mode::Protocol2,
        Mode::SerCurve,
        Mode::FixedN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Encode => "encode",
            Mode::Decode => "decode",
            Mode::Simulate => "simulate",
            Mode::De => "de",
            Mode::Replica => "replica",
            Mode::PhaseDiagram => "phase_diagram",
            Mode::Protocol1 => "protocol1",
            Mode::Protocol2 => "protocol2",
            Mode::SerCurve => "ser_curve",
            Mode::FixedN => "fixed_n",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Parameter(format!("unknown mode `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parameter(format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

/// What a `ser_curve` run sweeps over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    #[default]
    B,
    Snr,
}

/// Fully resolved experiment settings.
///
/// Every run is a deterministic function of this struct; [`ExperimentConfig::hash`]
/// identifies it in output headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub snr: f64,
    pub seed: u64,
    pub trials: usize,
    /// Monte Carlo sample count; `None` picks the mode default
    /// (10⁷ for density evolution, 10⁶ for the potential).
    pub mc_samples: Option<usize>,
    /// Iteration cap; `None` picks the mode default (50 for AMP, 200 for density evolution).
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(rename = "R_grid")]
    pub r_grid: Vec<f64>,
    #[serde(rename = "B_list")]
    pub b_list: Vec<usize>,
    pub snr_list: Vec<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Failure-probability cut for protocol 1 (10⁻² at desk scale, 10⁻³ at full scale).
    pub p_cut: f64,
    pub r_lo: Option<f64>,
    pub r_hi: Option<f64>,
    pub tol_r: f64,
    pub threshold: bool,
    pub sweep: SweepAxis,
    pub initial_variance: InitialVariance,
    pub message: Option<String>,
    pub input: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        ExperimentConfig {
            mode,
            l: 100,
            b: 2,
            r: 1.0,
            snr: 15.0,
            seed: 0,
            trials: 1000,
            mc_samples: None,
            max_iter: None,
            tol: None,
            out: None,
            format: Format::Csv,
            r_grid: Vec::new(),
            b_list: Vec::new(),
            snr_list: Vec::new(),
            n: None,
            p_cut: 1e-2,
            r_lo: None,
            r_hi: None,
            tol_r: 0.005,
            threshold: false,
            sweep: SweepAxis::B,
            initial_variance: InitialVariance::Prior,
            message: None,
            input: None,
        }
    }

    /// Builds a configuration from `key=value` pairs; `mode` must be present.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mode: Mode = pairs
            .get("mode")
            .ok_or_else(|| Error::Parameter("no mode given".into()))?
            .parse()?;
        let mut cfg = ExperimentConfig::new(mode);
        for (key, value) in pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "mode" => self.mode = v.parse()?,
            "L" => self.l = num(key, v)?,
            "B" => self.b = num(key, v)?,
            "R" => self.r = num(key, v)?,
            "snr" => self.snr = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "trials" => self.trials = num(key, v)?,
            "mc_samples" => self.mc_samples = Some(num::<f64>(key, v).and_then(|x| count(key, x))?),
            "max_iter" => self.max_iter = Some(num(key, v)?),
            "tol" => self.tol = Some(num(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            "R_grid" => self.r_grid = parse_grid(v)?,
            "B_list" => self.b_list = parse_list(key, v)?,
            "snr_list" => self.snr_list = parse_list(key, v)?,
            "N" => self.n = Some(num(key, v)?),
            "p_cut" => self.p_cut = num(key, v)?,
            "r_lo" => self.r_lo = Some(num(key, v)?),
            "r_hi" => self.r_hi = Some(num(key, v)?),
            "tol_r" => self.tol_r = num(key, v)?,
            "threshold" => self.threshold = num(key, v)?,
            "sweep" => {
                self.sweep = match v {
                    "B" | "b" => SweepAxis::B,
                    "snr" => SweepAxis::Snr,
                    _ => return Err(Error::Parameter(format!("sweep must be B or snr, got `{v}`"))),
                }
            }
            "initial_variance" => {
                self.initial_variance = match v {
                    "prior" => InitialVariance::Prior,
                    "noise_scaled" => InitialVariance::NoiseScaled,
                    _ => {
                        return Err(Error::Parameter(format!(
                            "initial_variance must be prior or noise_scaled, got `{v}`"
                        )))
                    }
                }
            }
            "message" => self.message = Some(v.to_string()),
            "input" => self.input = Some(PathBuf::from(v)),
            _ => return Err(Error::Parameter(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive, got {x}")))
            }
        };
        if self.l == 0 {
            return Err(Error::Parameter("L must be at least 1".into()));
        }
        if self.b < 2 || self.b_list.iter().any(|&b| b < 2) {
            return Err(Error::Parameter("section sizes must be at least 2".into()));
        }
        positive("R", self.r)?;
        positive("snr", self.snr)?;
        positive("tol_r", self.tol_r)?;
        for &r in &self.r_grid {
            positive("R_grid entry", r)?;
        }
        for &s in &self.snr_list {
            positive("snr_list entry", s)?;
        }
        if !(self.p_cut > 0.0 && self.p_cut <= 1.0) {
            return Err(Error::Parameter(format!("p_cut must lie in (0, 1], got {}", self.p_cut)));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if matches!(self.max_iter, Some(0)) {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if let Some(n) = self.mc_samples {
            if n < 2 {
                return Err(Error::Parameter("mc_samples must be at least 2".into()));
            }
        }
        Ok(())
    }

    /// Canonical `key=value` lines, sorted by key. Output paths are left out so
    /// that the same computation hashes the same wherever it is written.
    pub fn canonical(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let opt = |x: Option<String>| x.unwrap_or_default();
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("mode", self.mode.name().into());
        kv.insert("L", self.l.to_string());
        kv.insert("B", self.b.to_string());
        kv.insert("R", format!("{:?}", self.r));
        kv.insert("snr", format!("{:?}", self.snr));
        kv.insert("seed", self.seed.to_string());
        kv.insert("trials", self.trials.to_string());
        kv.insert("mc_samples", opt(self.mc_samples.map(|x| x.to_string())));
        kv.insert("max_iter", opt(self.max_iter.map(|x| x.to_string())));
        kv.insert("tol", opt(self.tol.map(|x| format!("{x:?}"))));
        kv.insert("format", format!("{:?}", self.format).to_lowercase());
        kv.insert("R_grid", list(&self.r_grid));
        kv.insert(
            "B_list",
            self.b_list.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
        );
        kv.insert("snr_list", list(&self.snr_list));
        kv.insert("N", opt(self.n.map(|x| x.to_string())));
        kv.insert("p_cut", format!("{:?}", self.p_cut));
        kv.insert("r_lo", opt(self.r_lo.map(|x| format!("{x:?}"))));
        kv.insert("r_hi", opt(self.r_hi.map(|x| format!("{x:?}"))));
        kv.insert("tol_r", format!("{:?}", self.tol_r));
        kv.insert("threshold", self.threshold.to_string());
        kv.insert("sweep", format!("{:?}", self.sweep));
        kv.insert("initial_variance", format!("{:?}", self.initial_variance));
        kv.insert("message", opt(self.message.clone()));
        kv.insert("input", opt(self.input.as_ref().map(|p| p.display().to_string())));
        kv.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of [`ExperimentConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parameter(format!("cannot parse `{v}` as a value for {key}")))
}

fn count(key: &str, x: f64) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
        Ok(x as usize)
    } else {
        Err(Error::Parameter(format!("{key} must be a whole number, got {x}")))
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// Either a comma separated list or `start:step:stop` (inclusive of `stop`).
pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) =
                (num("R_grid", start)?, num("R_grid", step)?, num("R_grid", stop)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::Parameter(format!("bad range {v}")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            // rounded to 12 digits so that 0.1 + 3·0.05 prints as 0.25
            Ok((0..=n)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => parse_list("R_grid", v),
        _ => Err(Error::Parameter(format!("bad grid `{v}`"))),
    }
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got `{line}`", no + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

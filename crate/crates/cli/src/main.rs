use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparc_core::experiment::{self, parse_config, ExperimentConfig, Mode};
use sparc_core::Error;

/// Sparse superposition codes over the AWGN channel: encoding, AMP decoding,
/// density evolution, replica thresholds and finite-size experiments.
#[derive(Parser, Debug)]
#[command(name = "sparc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a message (given or random) and pass it through the channel.
    Encode(Flags),
    /// Decode channel outputs read from --input with AMP.
    Decode(Flags),
    /// Generate one instance and decode it, printing the AMP trace.
    Simulate(Flags),
    /// Density evolution trajectory, or the BP threshold with --threshold.
    De(Flags),
    /// Replica potential curve, or the optimal and BP thresholds with --threshold.
    Replica(Flags),
    /// BP and optimal thresholds over --B-list (or over --snr-list at fixed --B).
    PhaseDiagram(Flags),
    /// Failure probability at each rate of --R-grid.
    Protocol1(Flags),
    /// Ten consecutive successful decodings at each rate of --R-grid.
    Protocol2(Flags),
    /// Optimal SER at the dominant potential maximum along a sweep.
    SerCurve(Flags),
    /// Failure probability at fixed signal length --N over --B-list.
    FixedN(Flags),
}

#[derive(clap::Args, Debug)]
struct Flags {
    /// key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sections.
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<String>,
    /// Section size.
    #[arg(long = "B", allow_hyphen_values = true)]
    b: Option<String>,
    /// Rate in bits per channel use.
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Master seed.
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    trials: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mc_samples: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    max_iter: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Comma separated rates or start:step:stop.
    #[arg(long = "R-grid")]
    r_grid: Option<String>,
    #[arg(long = "B-list")]
    b_list: Option<String>,
    #[arg(long)]
    snr_list: Option<String>,
    /// Signal length for fixed-n.
    #[arg(long = "N")]
    n: Option<String>,
    /// Failure-probability cut of protocol 1.
    #[arg(long, allow_hyphen_values = true)]
    p_cut: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r_lo: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r_hi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol_r: Option<String>,
    /// Compute thresholds instead of a single curve (de, replica).
    #[arg(long)]
    threshold: bool,
    /// Sweep axis for ser-curve: B or snr.
    #[arg(long)]
    sweep: Option<String>,
    /// prior (v = 1/B) or noise_scaled (v = 1/(B·snr)).
    #[arg(long)]
    initial_variance: Option<String>,
    /// Message as space separated symbols in 1..=B.
    #[arg(long)]
    message: Option<String>,
    /// Channel outputs for decode.
    #[arg(long)]
    input: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let opts = [
            ("L", &self.l),
            ("B", &self.b),
            ("R", &self.r),
            ("snr", &self.snr),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("mc_samples", &self.mc_samples),
            ("max_iter", &self.max_iter),
            ("tol", &self.tol),
            ("out", &self.out),
            ("format", &self.format),
            ("R_grid", &self.r_grid),
            ("B_list", &self.b_list),
            ("snr_list", &self.snr_list),
            ("N", &self.n),
            ("p_cut", &self.p_cut),
            ("r_lo", &self.r_lo),
            ("r_hi", &self.r_hi),
            ("tol_r", &self.tol_r),
            ("sweep", &self.sweep),
            ("initial_variance", &self.initial_variance),
            ("message", &self.message),
            ("input", &self.input),
        ];
        let mut out: Vec<(&'static str, String)> =
            opts.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        if self.threshold {
            out.push(("threshold", "true".into()));
        }
        out
    }
}

fn split(cmd: Command) -> (Mode, Flags) {
    match cmd {
        Command::Encode(f) => (Mode::Encode, f),
        Command::Decode(f) => (Mode::Decode, f),
        Command::Simulate(f) => (Mode::Simulate, f),
        Command::De(f) => (Mode::De, f),
        Command::Replica(f) => (Mode::Replica, f),
        Command::PhaseDiagram(f) => (Mode::PhaseDiagram, f),
        Command::Protocol1(f) => (Mode::Protocol1, f),
        Command::Protocol2(f) => (Mode::Protocol2, f),
        Command::SerCurve(f) => (Mode::SerCurve, f),
        Command::FixedN(f) => (Mode::FixedN, f),
    }
}

fn resolve(mode: Mode, flags: &Flags) -> Result<ExperimentConfig, Error> {
    let mut pairs: BTreeMap<String, String> = match &flags.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags.overrides() {
        pairs.insert(k.to_string(), v);
    }
    pairs.insert("mode".into(), mode.name().into());
    ExperimentConfig::from_pairs(&pairs)
}

fn execute(mode: Mode, flags: &Flags) -> Result<(), Error> {
    let cfg = resolve(mode, flags)?;
    let text = experiment::run(&cfg)?.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, flags) = split(cli.command);
    match execute(mode, &flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `cmvscatter gen|direct|inverse|roundtrip|check`: file-based pipelines over the
//! scattering library. Exit code 0 on success, 1 when a tolerance or numerical
//! stage fails, 2 on invalid input.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::{RunConfig, SequenceSpec};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Tolerance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Tolerance(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cmvscatter", version, about = "Direct and inverse scattering for CMV matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Arc parameter in (0, pi); the tail modulus is sin(xi0/2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    xi0: Option<f64>,
    /// Phase c of the right tail.
    #[arg(long, global = true, allow_hyphen_values = true)]
    phase: Option<f64>,
    /// Quadrature grid size M (power of two).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Polynomial basis degree D.
    #[arg(long, global = true)]
    basis: Option<usize>,
    /// Number of shifts L recovered by the inverse step.
    #[arg(long, global = true)]
    shifts: Option<usize>,
    /// Seed of the random window.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Refinement levels of the condition sweeps.
    #[arg(long, global = true)]
    levels: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct SequenceFlags {
    /// Constant coefficient, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["perturb", "soliton", "edge_resonant"])]
    constant: Option<String>,
    /// Random window of this many entries.
    #[arg(long)]
    perturb: Option<usize>,
    /// Amplitude of the random window.
    #[arg(long, default_value_t = cmvscatter::fixtures::PERTURB_AMPLITUDE)]
    amplitude: f64,
    /// One-entry step with one bound state.
    #[arg(long, conflicts_with_all = ["perturb", "edge_resonant"])]
    soliton: bool,
    /// Window with transmission nonzero at both arc edges.
    #[arg(long, conflicts_with = "perturb")]
    edge_resonant: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a Verblunsky sequence and its arc geometry.
    Gen(SequenceFlags),
    /// Direct scattering of a sequence file.
    Direct {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Recover coefficients from a scattering-data file.
    Inverse {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Generate, scatter, recover, and compare.
    Roundtrip(SequenceFlags),
    /// Condition report for a sequence or scattering-data file, or a power weight.
    Check {
        #[arg(long, conflicts_with = "weight_alpha")]
        input: Option<PathBuf>,
        /// Study the weight |x|^alpha on [-2, 2].
        #[arg(long, allow_hyphen_values = true)]
        weight_alpha: Option<f64>,
    },
}

fn parse_complex(s: &str) -> Result<[f64; 2], Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| Failure::Input(format!("--constant {s}: {e}")));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(Failure::Input(format!("--constant {s}: expected `re` or `re,im`"))),
    }
}

fn build_config(common: &Common, seq: Option<&SequenceFlags>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(common.config.as_ref())?;
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = common.$f.clone() { cfg.$f = v; })* };
    }
    set!(out, xi0, grid, basis, shifts, levels);
    if let Some(p) = common.phase {
        cfg.phase_c_plus = p;
    }
    if let Some(flags) = seq {
        if let Some(c) = &flags.constant {
            let a = parse_complex(c)?;
            let m = a[0].hypot(a[1]);
            if !(m > 0.0 && m < 1.0) {
                return Err(Failure::Input(format!("--constant {c}: modulus must lie in (0, 1)")));
            }
            let xi0 = 2.0 * m.asin();
            if common.xi0.is_some_and(|x| (x - xi0).abs() > 1e-12) {
                return Err(Failure::Input(format!("--constant {c} has arc parameter {xi0}, not --xi0")));
            }
            cfg.xi0 = xi0;
            cfg.phase_c_plus = a[1].atan2(a[0]);
            cfg.sequence = SequenceSpec::Constant { a: Some(a) };
        } else if let Some(count) = flags.perturb {
            cfg.sequence = SequenceSpec::Perturb { count, seed: common.seed.unwrap_or(7), amplitude: flags.amplitude };
        } else if flags.soliton {
            cfg.sequence = SequenceSpec::Soliton;
        } else if flags.edge_resonant {
            cfg.sequence = SequenceSpec::EdgeResonant;
        }
    }
    if let (Some(seed), SequenceSpec::Perturb { seed: s, .. }) = (common.seed, &mut cfg.sequence) {
        *s = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, Failure> {
    let flags = match &cli.command {
        Command::Gen(f) | Command::Roundtrip(f) => Some(f),
        _ => None,
    };
    let cfg = build_config(&cli.common, flags)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Failure::Input(format!("{}: {e}", cfg.out.display())))?;
    match cli.command {
        Command::Gen(_) => commands::gen(&cfg),
        Command::Direct { input } => commands::direct(&cfg, input),
        Command::Inverse { input } => commands::inverse(&cfg, input),
        Command::Roundtrip(_) => commands::roundtrip(&cfg),
        Command::Check { input, weight_alpha } => commands::check(&cfg, input, weight_alpha),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let msg = match &f {
                Failure::Input(m) => format!("input error: {m}"),
                Failure::Tolerance(m) => format!("fail: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(f.code())
        }
    }
}

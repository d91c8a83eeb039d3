//! Command-line surface: JSON in, canonical JSON out, deterministic for a
//! fixed (input, seed, N, D).
//!
//! Exit codes: 0 success, 1 domain error, 2 schema/usage violation,
//! 3 precision exhausted.

mod commands;
mod input;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::run_command;
use input::{Config, Failure};

#[derive(Parser)]
#[command(
    name = "iwalg",
    about = "Operator calculus on multivariate Iwasawa algebras",
    version
)]
struct Cli {
    /// Working precision N (p-adic digits); floor 4
    #[arg(long, global = true, env = "IWALG_PRECISION", default_value_t = 16)]
    precision: u32,
    /// Truncation degree D (total degree); floor 4
    #[arg(long, global = true, env = "IWALG_DEGREE", default_value_t = 24)]
    degree: u32,
    /// Seed for randomized searches
    #[arg(long, global = true, env = "IWALG_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long, global = true, env = "IWALG_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// mu-invariant of a series
    Mu { input: PathBuf },
    /// Sharp involution
    Sharp { input: PathBuf },
    /// Weierstrass preparation
    Prepare { input: PathBuf },
    /// Specialization along a quotient map
    Specialize { input: PathBuf },
    /// Twist by a finite-order character
    Twist { input: PathBuf },
    /// Norm descent to a finite-index subgroup
    Norm { input: PathBuf },
    /// Composite character map (twist then specialize)
    Chimap { input: PathBuf },
    /// Local theta factor of a place
    Theta { input: PathBuf },
    /// Global dagger element of a tower
    Dagger { input: PathBuf },
    /// Local diamond factor at a character
    Diamond { input: PathBuf },
    /// Star scalar of the tower
    Star { input: PathBuf },
    /// Interpolation series of an L-polynomial
    Cchi { input: PathBuf },
    /// Characteristic ideal of an elementary module
    Charideal { input: PathBuf },
    /// Functional-equation (sharp-associates) check
    FeCheck { input: PathBuf },
    /// Two-variable comparison along roots of unity
    RootLemma { input: PathBuf },
    /// Valuation-count sampler over character images
    Monsky { input: PathBuf },
    /// Semistable-locus membership of a Weierstrass pair
    ModuliMember { input: PathBuf },
    /// Per-fiber reduction types
    ModuliClassify { input: PathBuf },
    /// Random search for an everywhere-semistable pair
    ModuliConstruct { input: PathBuf },
    /// Run a directory of JSON scenarios, TAP report
    Suite { dir: PathBuf },
}

impl Cmd {
    fn name_and_input(&self) -> (&'static str, &PathBuf) {
        match self {
            Cmd::Mu { input } => ("mu", input),
            Cmd::Sharp { input } => ("sharp", input),
            Cmd::Prepare { input } => ("prepare", input),
            Cmd::Specialize { input } => ("specialize", input),
            Cmd::Twist { input } => ("twist", input),
            Cmd::Norm { input } => ("norm", input),
            Cmd::Chimap { input } => ("chimap", input),
            Cmd::Theta { input } => ("theta", input),
            Cmd::Dagger { input } => ("dagger", input),
            Cmd::Diamond { input } => ("diamond", input),
            Cmd::Star { input } => ("star", input),
            Cmd::Cchi { input } => ("cchi", input),
            Cmd::Charideal { input } => ("charideal", input),
            Cmd::FeCheck { input } => ("fe-check", input),
            Cmd::RootLemma { input } => ("root-lemma", input),
            Cmd::Monsky { input } => ("monsky", input),
            Cmd::ModuliMember { input } => ("moduli-member", input),
            Cmd::ModuliClassify { input } => ("moduli-classify", input),
            Cmd::ModuliConstruct { input } => ("moduli-construct", input),
            Cmd::Suite { dir } => ("suite", dir),
        }
    }
}

fn error_name(e: &iwalg::Error) -> &'static str {
    use iwalg::Error::*;
    match e {
        NotAUnit => "NotAUnit",
        NotOrdinary => "NotOrdinary",
        DenominatorNotCleared(_) => "DenominatorNotCleared",
        HypothesisFailed => "HypothesisFailed",
        PrecisionExhausted(_) => "PrecisionExhausted",
        InconsistentFlags(_) => "InconsistentFlags",
        DaggerVanishes => "DaggerVanishes",
        NotDivisibleBy12(_) => "NotDivisibleBy12",
        IntegralityViolation => "IntegralityViolation",
        SearchExhausted(_) => "SearchExhausted",
        CharTooSmall(_) => "CharTooSmall",
        MixedRings => "MixedRings",
        BadInput(_) => "BadInput",
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.precision < 4 {
        eprintln!("schema violation at /config/precision: N must be at least 4");
        return ExitCode::from(2);
    }
    if cli.degree < 4 {
        eprintln!("schema violation at /config/degree: D must be at least 4");
        return ExitCode::from(2);
    }
    let cfg = Config {
        precision: cli.precision,
        degree: cli.degree,
        seed: cli.seed,
    };

    let (name, path) = cli.cmd.name_and_input();

    if name == "suite" {
        return match suite::run_suite(path, &cfg) {
            Ok((report, all_ok)) => {
                if emit(&cli.out, &report).is_err() {
                    eprintln!("failed to write the report");
                    return ExitCode::from(1);
                }
                if all_ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("schema violation at /dir: {e}");
                ExitCode::from(2)
            }
        };
    }

    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("schema violation at /input: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("schema violation at /: invalid JSON: {e}");
            return ExitCode::from(2);
        }
    };

    match run_command(name, value, &cfg) {
        Ok(output) => {
            let mut doc = serde_json::to_string(&output).expect("serializable");
            doc.push('\n');
            if emit(&cli.out, &doc).is_err() {
                eprintln!("failed to write the report");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Schema(ptr, msg)) => {
            eprintln!("schema violation at {ptr}: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            if matches!(e, iwalg::Error::PrecisionExhausted(_)) {
                eprintln!(
                    "PrecisionExhausted: {e}; retry with --precision {}",
                    cfg.precision.saturating_mul(2)
                );
                ExitCode::from(3)
            } else {
                eprintln!("{}: {e}", error_name(&e));
                ExitCode::from(1)
            }
        }
    }
}

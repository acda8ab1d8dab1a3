//! Command line front end for the path-integral laboratory.
//!
//! One subcommand per experiment. Each run reads a TOML config (or the
//! built-in defaults), validates all of it up front, and writes CSV tables,
//! SVG plots, the effective config and a plain-text report into the output
//! directory.
//!
//! Exit codes: 0 success, 1 usage or I/O problem, 2 invalid configuration,
//! 3 numerical stability or accuracy failure, 4 sign collapse.

pub mod compare;
pub mod config;
pub mod run;
pub mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pathlab_core::Error;

pub use compare::{compare_densities, Comparison};
pub use config::{parse_config, parse_config_for, ConfigError, Experiment, RunConfig};
pub use run::{run_experiment, Artifact, RunFailure, RunOutput};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_STABILITY: i32 = 3;
pub const EXIT_SIGN_COLLAPSE: i32 = 4;

/// Exit code for an error surfaced by a run. Contract violations that a
/// config value provoked count as validation failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Configuration(_) | Error::Precondition(_) => EXIT_VALIDATION,
        Error::NumericalStability(_) | Error::Accuracy(_) => EXIT_STABILITY,
        Error::SignCollapse { .. } => EXIT_SIGN_COLLAPSE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "pathlab", version, about = "Path-integral laboratory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Langevin, Fokker-Planck and path-integral Brownian densities.
    BrownianTriple(RunArgs),
    /// Split-step and density-matrix path-integral quantum evolution.
    QuantumReference(RunArgs),
    /// Classical ensemble from the Wigner function vs quantum moments.
    ClassicalLimit(RunArgs),
    /// Signed-weight quasi-Langevin simulation with sign diagnostics.
    QuasiLangevin(RunArgs),
    /// Plot of the Airy function.
    AiryFigure(RunArgs),
    /// L1, L-infinity and KS distances between two density tables.
    CompareDensities {
        file_a: PathBuf,
        file_b: PathBuf,
        /// Directory for the per-bin difference table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config; omitted keys take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full effective config and exit.
    #[arg(long)]
    list_defaults: bool,
}

/// Writes every artifact plus `report.txt` into `dir`.
pub fn write_outputs(dir: &Path, artifacts: &[Artifact], report: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
    }
    fs::write(dir.join("report.txt"), report)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return if code == 0 { EXIT_SUCCESS } else { EXIT_USAGE };
        }
    };
    let (kind, args) = match cli.command {
        Command::BrownianTriple(a) => (Experiment::BrownianTriple, a),
        Command::QuantumReference(a) => (Experiment::QuantumReference, a),
        Command::ClassicalLimit(a) => (Experiment::ClassicalLimit, a),
        Command::QuasiLangevin(a) => (Experiment::QuasiLangevin, a),
        Command::AiryFigure(a) => (Experiment::AiryFigure, a),
        Command::CompareDensities { file_a, file_b, out: dir } => {
            return compare_files(&file_a, &file_b, dir.as_deref(), out, err)
        }
    };
    run_command(kind, args, out, err)
}

fn run_command(kind: Experiment, args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match &args.config {
        Some(p) => match fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "cannot read {}: {e}", p.display());
                return EXIT_USAGE;
            }
        },
        None => String::new(),
    };
    let mut cfg = match parse_config_for(kind, &text) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                let _ = writeln!(err, "config error: {e}");
            }
            return EXIT_VALIDATION;
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.to_string_lossy().into_owned();
    }
    if args.list_defaults {
        let _ = write!(out, "{}", cfg.to_toml());
        return EXIT_SUCCESS;
    }
    let dir = PathBuf::from(&cfg.output_dir);
    let (artifacts, report, code) = match run_experiment(&cfg) {
        Ok(o) => (o.artifacts, o.report, EXIT_SUCCESS),
        Err(f) => {
            let _ = writeln!(err, "{}", f.error);
            let config = Artifact {
                name: "config.toml".into(),
                contents: cfg.to_toml(),
            };
            (vec![config], f.report, exit_code(&f.error))
        }
    };
    if let Err(e) = write_outputs(&dir, &artifacts, &report) {
        let _ = writeln!(err, "cannot write outputs to {}: {e}", dir.display());
        return EXIT_USAGE;
    }
    let _ = write!(out, "{report}");
    code
}

fn compare_files(a: &Path, b: &Path, dir: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()));
    let (ta, tb) = match (read(a), read(b)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            let _ = writeln!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    let c = match compare_densities(&ta, &tb) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    if let Some(d) = dir {
        let dump = Artifact {
            name: "comparison.csv".into(),
            contents: c.dump(),
        };
        if let Err(e) = write_outputs(d, &[dump], &c.report()) {
            let _ = writeln!(err, "cannot write outputs to {}: {e}", d.display());
            return EXIT_USAGE;
        }
    }
    let _ = write!(out, "{}", c.report());
    EXIT_SUCCESS
}

//! Command-line front end: configuration loading, validation and artifact
//! writing for the `specdecomp` experiments.

pub mod config;
pub mod run;
pub mod source;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Command, ExperimentConfig, Overrides};
use run::CliError;
use source::Diagnostic;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "SPECDECOMP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "specdecomp", version, about = "Essential-spectrum decomposition experiments")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Debug, Args)]
struct OverrideArgs {
    /// Output directory (default: the config's `output`, else out/<command>).
    #[arg(short, long, visible_alias = "out", value_name = "DIR")]
    output: Option<String>,
    /// Brillouin-zone grid size per axis.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Replaces the largest certificate or Weyl box half-width.
    #[arg(long = "box", value_name = "L")]
    box_size: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Bloch spectrum of a periodic operator.
    PeriodicSpectrum(RunArgs),
    /// Essential spectrum of a half-space dislocation, with certificate.
    Dislocation(RunArgs),
    /// Essential spectrum of a two-strip cross model, with certificate.
    Cross(RunArgs),
    /// Localized versus bulk verdict for a spectral point.
    Weyl(RunArgs),
    /// Relative-bound certificate for a continuum kernel.
    Bounds(RunArgs),
    /// Table of hyperbolic kernel identities.
    HyperbolicCheck(RunArgs),
    /// Seeded pseudo-resolvent checks.
    PseudoresDemo(RunArgs),
    /// Runs the command named in the file.
    Run {
        #[arg(value_name = "FILE")]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Checks a configuration without running it.
    Validate {
        #[arg(value_name = "FILE")]
        config: PathBuf,
    },
}

fn overrides(command: Option<Command>, o: OverrideArgs) -> Overrides {
    Overrides {
        command,
        output: o.output,
        grid: o.grid,
        box_size: o.box_size,
    }
}

fn print_diagnostics(file: &str, diags: &[Diagnostic]) {
    eprintln!("error: {file}: invalid configuration");
    for d in diags {
        eprintln!("  {d}");
    }
}

fn load(file: Option<&PathBuf>, over: &Overrides) -> Result<(String, ExperimentConfig), (i32, String)> {
    let (name, text) = match file {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => (p.display().to_string(), t),
            Err(e) => return Err((1, format!("error: {}: {e}", p.display()))),
        },
        None => ("<defaults>".to_string(), String::new()),
    };
    match config::load(&text, over) {
        Ok(cfg) => Ok((name, cfg)),
        Err(diags) => {
            print_diagnostics(&name, &diags);
            Err((1, String::new()))
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("error: {THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err(format!("error: {THREADS_ENV} must be a positive integer, got `{raw}`"));
    }
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("{msg}");
        return 1;
    }
    let (file, over) = match cli.action {
        Action::Validate { config } => {
            return match load(Some(&config), &Overrides::default()) {
                Ok((name, cfg)) => {
                    println!("{name}: ok ({})", cfg.command.as_str());
                    0
                }
                Err((code, msg)) => {
                    if !msg.is_empty() {
                        eprintln!("{msg}");
                    }
                    code
                }
            };
        }
        Action::Run { config, overrides: o } => (Some(config), overrides(None, o)),
        Action::PeriodicSpectrum(a) => (a.config, overrides(Some(Command::PeriodicSpectrum), a.overrides)),
        Action::Dislocation(a) => (a.config, overrides(Some(Command::Dislocation), a.overrides)),
        Action::Cross(a) => (a.config, overrides(Some(Command::Cross), a.overrides)),
        Action::Weyl(a) => (a.config, overrides(Some(Command::Weyl), a.overrides)),
        Action::Bounds(a) => (a.config, overrides(Some(Command::Bounds), a.overrides)),
        Action::HyperbolicCheck(a) => (a.config, overrides(Some(Command::HyperbolicCheck), a.overrides)),
        Action::PseudoresDemo(a) => (a.config, overrides(Some(Command::PseudoresDemo), a.overrides)),
    };
    let cfg = match load(file.as_ref(), &over) {
        Ok((_, cfg)) => cfg,
        Err((code, msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            return code;
        }
    };
    match run::run(&cfg) {
        Ok(summary) => {
            println!("{}: {}", cfg.command.as_str(), summary.headline);
            for a in &summary.artifacts {
                println!("  wrote {}", summary.output.join(a).display());
            }
            0
        }
        Err(e) => {
            match &e {
                CliError::Invalid(d) => print_diagnostics("<config>", d),
                CliError::Numeric { detail, .. } => {
                    eprintln!("error: {e}");
                    eprintln!("  detail: {detail}");
                    eprintln!("  see {}", PathBuf::from(&cfg.output).join("error.json").display());
                }
                CliError::Io { .. } => eprintln!("error: {e}"),
            }
            e.exit_code()
        }
    }
}

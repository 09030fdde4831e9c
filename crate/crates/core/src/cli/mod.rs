//! Command-line surface: `beltrami <command> [--config FILE] [--out FILE]
//! [--csv FILE] [--seed N] [--tol X]`.
//!
//! Exit codes: 0 when every check passed, 1 on I/O failure, 2 on a
//! configuration error, 3 when a numeric check failed or a computation
//! could not be completed.
//!
//! `--tol` overrides `tolerances.residual` for `verify` and `tolerances.sup`
//! for every other command. `BELTRAMI_THREADS` caps the worker pool.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use commands::{cmd_bound, cmd_export, cmd_sharp, cmd_sweep_mbar, cmd_verify, Outcome, WEAK_MESHES};
pub use config::{
    BumpConfig, CoefficientConfig, Command, DomainConfig, ExportConfig, GridConfig, PairConfig, ProfileConfig,
    RunConfig, Tolerances,
};
pub use report::{Check, CsvTable, RunReport};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const THREADS_ENV: &str = "BELTRAMI_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "beltrami", version, about = "Hölder-exponent bounds for planar Beltrami equations")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the JSON report (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the CSV dump.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Reads the config file and applies the command-line overrides.
pub fn resolve_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != args.command {
            return Err(CliError::Config(format!(
                "config is for '{}' but '{}' was requested",
                c.name(),
                args.command.name()
            )));
        }
    }
    cfg.command = Some(args.command);
    if let Some(p) = &args.out {
        cfg.out = Some(p.display().to_string());
    }
    if let Some(p) = &args.csv {
        cfg.csv = Some(p.display().to_string());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--tol must be a non-negative number, got {t}")));
        }
        match args.command {
            Command::Verify => cfg.tolerances.residual = t,
            _ => cfg.tolerances.sup = t,
        }
    }
    cfg.validate_common().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Runs the command named in `cfg.command`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let command = cfg
        .command
        .ok_or_else(|| CliError::Config("no command given".into()))?;
    cfg.validate_common().map_err(|e| CliError::Config(e.to_string()))?;
    let start = Instant::now();
    let mut outcome = match command {
        Command::Bound => cmd_bound(cfg),
        Command::Sharp => cmd_sharp(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::SweepMbar => cmd_sweep_mbar(cfg),
        Command::Export => {
            if cfg.csv.is_none() {
                return Err(CliError::Config("the export command needs a CSV path".into()));
            }
            cmd_export(cfg)
        }
    }?;
    outcome.report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(outcome)
}

fn write_outputs(cfg: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let json = outcome.report.to_json();
    match &cfg.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| CliError::Io(format!("{path}: {e}")))?,
        None => println!("{json}"),
    }
    if let (Some(path), Some(table)) = (&cfg.csv, &outcome.csv) {
        let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        table.write_to(file).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    // A pool configured earlier in this process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads()
        .and_then(|_| resolve_config(&args))
        .and_then(|cfg| execute(&cfg).map(|o| (cfg, o)))
        .and_then(|(cfg, o)| write_outputs(&cfg, &o).map(|_| o));
    match result {
        Ok(outcome) => {
            for c in outcome.report.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance);
            }
            if outcome.report.passed {
                EXIT_OK
            } else {
                EXIT_NUMERIC
            }
        }
        Err(e) => {
            eprintln!("beltrami: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_maps_to_the_command_tolerance() {
        let args = Args::try_parse_from(["beltrami", "verify", "--tol", "1e-3"]).unwrap();
        assert_eq!(resolve_config(&args).unwrap().tolerances.residual, 1e-3);
        let args = Args::try_parse_from(["beltrami", "sweep-mbar", "--tol", "1e-3"]).unwrap();
        assert_eq!(resolve_config(&args).unwrap().tolerances.sup, 1e-3);
    }

    #[test]
    fn command_mismatch_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"command": "sharp", "M": 1.2}"#).unwrap();
        let args = Args::try_parse_from(["beltrami".as_ref(), "bound".as_ref(), "--config".as_ref(), p.as_os_str()]).unwrap();
        assert!(matches!(resolve_config(&args), Err(CliError::Config(_))));
    }
}

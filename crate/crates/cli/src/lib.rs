//! `piezobeam` command line: `check`, `simulate`, `sweep` and `report`.

mod output;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use piezobeam::scenario::{CheckOutcome, RunStatus};
use piezobeam::sweep::{self, SweepError, SweepSpec};
use piezobeam::{Scenario, ScenarioError};
use thiserror::Error;

pub use output::{format_float, trajectory_header, TRAJECTORY_COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Scenario {
        path: PathBuf,
        source: ScenarioError,
    },
    #[error("{path}: {source}")]
    Sweep { path: PathBuf, source: SweepError },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn malformed(path: &Path, message: impl Into<String>) -> Self {
        CliError::Malformed {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "piezobeam", version, about = "Piezoelectric beam with time-varying delay: certificate, simulation and decay checks")]
pub struct Cli {
    /// Reserved: nothing in the program is random.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the assumptions and print the stability certificate.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario and write trajectory.csv, fields_*.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a parameter grid and write one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Re-check a directory written by `simulate`.
    Report {
        /// Output directory of `simulate`.
        dir: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    Scenario::from_json(&read(path)?).map_err(|source| CliError::Scenario {
        path: path.to_path_buf(),
        source,
    })
}

fn print_check(out: &mut impl Write, check: &CheckOutcome) -> std::io::Result<()> {
    let report = &check.assumptions;
    writeln!(
        out,
        "assumptions: {} ({} samples on [0, {}])",
        if report.pass { "PASS" } else { "FAIL" },
        report.samples,
        report.horizon
    )?;
    for c in &report.checks {
        let margin = c.margin.map_or("-".to_string(), format_float);
        writeln!(
            out,
            "  {:<24} {}  margin={}  {}",
            c.condition.id(),
            if c.pass { "ok  " } else { "FAIL" },
            margin,
            c.statement
        )?;
    }
    let cert = &check.certificate;
    writeln!(
        out,
        "certificate: {}",
        if cert.valid { "VALID" } else { "INVALID" }
    )?;
    for (name, value) in [
        ("xi_bar", cert.xi_bar),
        ("lambda", cert.lambda),
        ("C1", cert.c1),
        ("C2", cert.c2),
        ("C3", cert.c3),
        ("C", cert.c),
    ] {
        writeln!(out, "  {name:<7} {}", format_float(value))?;
    }
    for v in &cert.violations {
        writeln!(out, "  violated {}: {}", v.id, v.detail)?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn cmd_check(config: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let scenario = load_scenario(config)?;
    let check = scenario.check().map_err(|source| CliError::Scenario {
        path: config.to_path_buf(),
        source,
    })?;
    print_check(&mut std::io::stdout().lock(), &check).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&check).expect("check serializes");
        write_file(path, &(json + "\n"))?;
    }
    if check.certificate.valid {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "infeasible certificate: {}",
            check.certificate.violation_ids().join(", ")
        );
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_simulate(config: &Path, dir: &Path) -> Result<i32, CliError> {
    let scenario = load_scenario(config)?;
    let sim = scenario.simulate().map_err(|source| CliError::Scenario {
        path: config.to_path_buf(),
        source,
    })?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    output::write_simulation(dir, &scenario, &sim)?;
    let summary = &sim.summary;
    if let Some(f) = &summary.failure {
        eprintln!("run diverged at step {} (t = {}): {}", f.step, f.t, f.message);
        return Ok(EXIT_DIVERGED);
    }
    if !summary.certificate.valid {
        eprintln!(
            "infeasible certificate: {}",
            summary.certificate.violation_ids().join(", ")
        );
        return Ok(EXIT_INFEASIBLE);
    }
    if !summary.verified() {
        eprintln!("verification failed; see {}", dir.join("summary.json").display());
        return Ok(EXIT_VERIFICATION);
    }
    debug_assert_eq!(summary.status, RunStatus::Ok);
    Ok(EXIT_OK)
}

fn cmd_sweep(config: &Path, out: &Path, threads: Option<usize>) -> Result<i32, CliError> {
    let sweep_err = |source| CliError::Sweep {
        path: config.to_path_buf(),
        source,
    };
    let spec = SweepSpec::from_json(&read(config)?).map_err(sweep_err)?;
    let dir = config.parent().unwrap_or(Path::new("."));
    let base = spec.base_scenario(dir).map_err(sweep_err)?;
    let points = sweep::expand(&spec, &base).map_err(sweep_err)?;
    let records = sweep::execute(points, threads.or(spec.threads)).map_err(sweep_err)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    output::write_sweep(out, &spec, &records)?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check { config, out } => cmd_check(config, out.as_deref()),
        Command::Simulate { config, out } => cmd_simulate(config, out),
        Command::Sweep {
            config,
            out,
            threads,
        } => cmd_sweep(config, out, *threads),
        Command::Report { dir } => report::cmd_report(dir),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

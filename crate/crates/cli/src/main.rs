//! `ncspectra`: closed-form and oracle spectra for noncommutativity-deformed
//! 2D central potentials.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand};
use ncspectra_core::report::{
    self, deform_tables, emit, fit_rows, fits_table, oracle_tables, rows_table, verify_tables, Mode, SplittingRow, Table,
};
use ncspectra_core::verify::{self, Fixture, RESIDUAL_TOL};
use ncspectra_core::{deform, oracle, Error, NcContext};

use config::{ConfigError, RunConfig, Settings, GRID_ENV};

#[derive(Parser)]
#[command(name = "ncspectra", version, about = "Bound-state spectra of noncommutativity-deformed 2D potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the deformed potential coefficients.
    Deform(Flags),
    /// Closed-form levels for every (theta, m), checked against the oracle.
    Spectrum(Flags),
    /// Evaluate each convention ambiguity both ways against the oracle.
    Verify(Flags),
    /// Theta/m sweep with splitting fits.
    Sweep(Flags),
    /// Finite-difference eigenvalues only.
    Oracle(Flags),
}

#[derive(clap::Args, Debug, Default)]
struct Flags {
    /// even | inverse
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Single value or comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Single value or comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    /// Even-family level.
    #[arg(long)]
    n: Option<String>,
    /// Inverse-family polynomial degree.
    #[arg(long)]
    degree: Option<String>,
    /// paper | rederived
    #[arg(long)]
    mode: Option<String>,
    /// on | off
    #[arg(long)]
    oracle: Option<String>,
    /// json | csv
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

impl Flags {
    fn settings(self) -> Result<Settings, ConfigError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        s.set("family", self.family);
        s.set("a", self.a);
        s.set("b", self.b);
        s.set("c", self.c);
        s.set("theta", self.theta);
        s.set("m", self.m);
        s.set("n", self.n);
        s.set("degree", self.degree);
        s.set("mode", self.mode);
        s.set("oracle", self.oracle);
        s.set("format", self.format);
        s.set("out", self.out.map(|p| p.display().to_string()));
        if self.no_timestamp {
            s.set("no-timestamp", Some("true".into()));
        }
        Ok(s)
    }
}

enum Failure {
    Config(String),
    Contract(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Contract(format!("{e:#}"))
    }
}

fn solver_failure(e: Error) -> Failure {
    match e {
        Error::InvalidInput(_)
        | Error::InvalidFamily { .. }
        | Error::NonConfining { .. }
        | Error::SingularAttraction { .. }
        | Error::DegenerateDeformation
        | Error::UnsupportedDegree(_)
        | Error::InvalidGrid(_) => Failure::Config(e.to_string()),
        _ => Failure::Contract(e.to_string()),
    }
}

fn generated(cfg: &RunConfig) -> Option<String> {
    cfg.timestamp.then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        format!("unix:{secs}")
    })
}

fn write(cfg: &RunConfig, tables: &[Table]) -> anyhow::Result<()> {
    let text = emit(tables, cfg.format, generated(cfg).as_deref());
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn contract(cfg: &RunConfig, rows: &[SplittingRow]) -> Result<(), Failure> {
    if cfg.options.mode != Mode::Rederived {
        return Ok(());
    }
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.status == "ok" && !r.ode_residual.is_some_and(|x| x <= RESIDUAL_TOL))
        .map(|r| format!("theta={} m={}", r.theta, r.m))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Contract(format!("rederived residual above {RESIDUAL_TOL:e} at {}", bad.join(", "))))
    }
}

fn warn_singular(rows: &[SplittingRow]) {
    for r in rows.iter().filter(|r| r.status == "singular-attraction") {
        eprintln!(
            "warning: theta={} m={}: attractive singular term, spectrum unbounded below (fall to the center)",
            r.theta, r.m
        );
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (name, flags) = match command {
        Command::Deform(f) => ("deform", f),
        Command::Spectrum(f) => ("spectrum", f),
        Command::Verify(f) => ("verify", f),
        Command::Sweep(f) => ("sweep", f),
        Command::Oracle(f) => ("oracle", f),
    };
    let grid_env = std::env::var(GRID_ENV).ok();
    let cfg = RunConfig::resolve(&flags.settings()?, grid_env.as_deref())?;
    match name {
        "deform" => {
            let (theta, m) = cfg.single()?;
            let problem = deform(cfg.spec, NcContext::new(theta, m)).map_err(|e| Failure::Config(e.to_string()))?;
            write(&cfg, &deform_tables(&problem))?;
        }
        "spectrum" => {
            let config = sweep_config(&cfg);
            let rows = report::spectrum_rows(&config).map_err(solver_failure)?;
            let mut tables = vec![rows_table(&rows)];
            if config.thetas.len() >= 2 {
                let mut ms = config.ms.clone();
                ms.sort_unstable();
                ms.dedup();
                let fits: Vec<_> = ms.iter().flat_map(|&m| fit_rows(&rows, m, None)).collect();
                tables.push(fits_table(&fits, cfg.spec.family));
            }
            write(&cfg, &tables)?;
            warn_singular(&rows);
            contract(&cfg, &rows)?;
        }
        "verify" => {
            let (theta, m) = cfg.single()?;
            if !cfg.options.oracle {
                return Err(Failure::Config("verify needs the oracle (--oracle on)".into()));
            }
            let fixture = Fixture { spec: cfg.spec, theta, m, level: cfg.level, grid_points: cfg.options.grid_points };
            let report = verify::verify(&fixture).map_err(solver_failure)?;
            write(&cfg, &verify_tables(&report))?;
            if !report.rederived_contract_holds() {
                return Err(Failure::Contract("a rederived reading fails its residual contract".into()));
            }
        }
        "sweep" => {
            let config = sweep_config(&cfg);
            let report = report::sweep(&config).map_err(solver_failure)?;
            write(&cfg, &report.tables())?;
            warn_singular(&report.rows);
            contract(&cfg, &report.rows)?;
        }
        _ => {
            let (theta, m) = cfg.single()?;
            let problem = deform(cfg.spec, NcContext::new(theta, m)).map_err(|e| Failure::Config(e.to_string()))?;
            let levels = cfg.level.max(2) + 4;
            let result = oracle::solve_auto(&problem, levels, cfg.options.grid_points).map_err(solver_failure)?;
            write(&cfg, &oracle_tables(&result))?;
        }
    }
    Ok(())
}

fn sweep_config(cfg: &RunConfig) -> report::SweepConfig {
    report::SweepConfig {
        spec: cfg.spec,
        thetas: cfg.thetas.clone(),
        ms: cfg.ms.clone(),
        level: cfg.level,
        options: cfg.options,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Contract(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

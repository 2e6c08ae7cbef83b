//! Spectrum rows, θ/m sweeps with splitting fits, and CSV/JSON export.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformation::{deform, DeformedRadialProblem, Family, NcContext, PotentialSpec};
use crate::error::{Error, Result};
use crate::evenpower::{closed_form_energy, solve_consistent_b, PrefactorExponents, SignMode};
use crate::invpower::{self, ConstraintForm};
use crate::numerics::{fit_line, fit_quadratic};
use crate::oracle::{auto_grid, match_level, ode_residual, solve_auto, OracleResult};
use crate::verify::{GAP_TOL, RESIDUAL_TOL};

pub const SCHEMA: u32 = 1;
pub const MIN_SWEEP_THETAS: usize = 3;
const SAME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Paper,
    #[default]
    Rederived,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Rederived => "rederived",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(Mode::Paper),
            "rederived" => Ok(Mode::Rederived),
            other => Err(Error::InvalidInput(format!("unknown mode '{other}', expected one of: paper, rederived"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: Mode,
    pub oracle: bool,
    pub grid_points: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { mode: Mode::Rederived, oracle: true, grid_points: crate::oracle::DEFAULT_POINTS }
    }
}

/// A θ × m grid of closed-form levels. `level` is `n` (even) or the degree (inverse).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub spec: PotentialSpec,
    pub thetas: Vec<f64>,
    pub ms: Vec<i32>,
    pub level: usize,
    pub options: RunOptions,
}

/// One (θ, m) entry of a spectrum or sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingRow {
    pub family: Family,
    pub theta: f64,
    pub m: i32,
    pub theta_m: f64,
    pub mode: Mode,
    pub level: usize,
    /// `ok` or the error code of the failed solve.
    pub status: String,
    /// `b` at which the closed-form level exists.
    pub b: Option<f64>,
    pub e_physical: Option<f64>,
    pub e_reduced: Option<f64>,
    pub shift: f64,
    pub e_paper: Option<f64>,
    pub e_rederived: Option<f64>,
    pub constraint_residual: Option<f64>,
    pub ode_residual: Option<f64>,
    pub oracle_e: Option<f64>,
    /// Relative gap to the nearest oracle level.
    pub gap: Option<f64>,
    pub nodes: Option<usize>,
    pub oracle_nodes: Option<usize>,
    pub oracle_verified: bool,
    /// Oracle level `level` at the configured `b`.
    pub oracle_fixed_e: Option<f64>,
    /// `;`-separated convention flags.
    pub flags: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSource {
    /// Closed-form energies, each at its own consistent `b`.
    ClosedForm,
    /// Oracle energies at the configured `b`.
    OracleFixed,
}

impl FitSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FitSource::ClosedForm => "closed-form",
            FitSource::OracleFixed => "oracle-fixed",
        }
    }
}

impl FromStr for FitSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(FitSource::ClosedForm),
            "oracle-fixed" => Ok(FitSource::OracleFixed),
            other => Err(Error::InvalidInput(format!("unknown fit source '{other}'"))),
        }
    }
}

/// Fit of `E` against `θm` for one `m`, and of `log|E(θ) - E(0)|` against `log θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingFit {
    pub m: i32,
    pub source: FitSource,
    pub points: usize,
    /// `dE/d(θm)`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub slope_r2: Option<f64>,
    /// Quadratic coefficient of `E` in `θm`.
    pub quadratic: Option<f64>,
    /// `|quadratic| max(θm)^2`.
    pub quadratic_bound: Option<f64>,
    /// `E(0)` for the exponent fit.
    pub reference: Option<f64>,
    pub exponent: Option<f64>,
    pub exponent_r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub rows: Vec<SplittingRow>,
    pub fits: Vec<SplittingFit>,
}

struct Level {
    problem: DeformedRadialProblem,
    energy: f64,
    constraint_residual: f64,
    nodes: usize,
    radial: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

fn even_level(base: &DeformedRadialProblem, n: usize, mode: SignMode) -> Result<Level> {
    let problem = solve_consistent_b(base, mode, n)?;
    let pre = PrefactorExponents::new(&problem, mode)?;
    let sol = closed_form_energy(&problem, &pre, n)?;
    Ok(Level {
        problem,
        energy: sol.energy_physical,
        constraint_residual: sol.constraint_residual,
        nodes: sol.node_count(),
        radial: Box::new(move |r| sol.radial(r)),
    })
}

fn inverse_level(base: &DeformedRadialProblem, degree: usize, form: ConstraintForm) -> Result<Level> {
    let sol = invpower::select(invpower::spectrum(base, degree, form)?, base.spec.b)
        .ok_or(Error::NoRealSolution { best_residual: f64::INFINITY })?;
    Ok(Level {
        problem: sol.problem(base),
        energy: sol.energy_physical,
        constraint_residual: sol.ansatz.max_residual(),
        nodes: sol.ansatz.node_count(),
        radial: Box::new(move |r| sol.ansatz.radial(r)),
    })
}

fn level(base: &DeformedRadialProblem, n: usize, mode: Mode) -> Result<Level> {
    match (base.family(), mode) {
        (Family::EvenPower, Mode::Paper) => even_level(base, n, SignMode::Paper),
        (Family::EvenPower, Mode::Rederived) => even_level(base, n, SignMode::Normalizable),
        (Family::InversePower, Mode::Paper) => inverse_level(base, n, ConstraintForm::Printed),
        (Family::InversePower, Mode::Rederived) => inverse_level(base, n, ConstraintForm::Rederived),
    }
}

fn oracle_levels(level: usize) -> usize {
    level.max(2) + 4
}

fn oracle(problem: &DeformedRadialProblem, level: usize, points: usize) -> Option<OracleResult> {
    solve_auto(problem, oracle_levels(level), points).ok()
}

/// Closed-form level at one (θ, m), checked against the oracle when enabled.
/// Solver failures become a status code instead of an error.
pub fn spectrum_row(spec: PotentialSpec, theta: f64, m: i32, level_index: usize, options: RunOptions) -> SplittingRow {
    let mut row = SplittingRow {
        family: spec.family,
        theta,
        m,
        theta_m: theta * f64::from(m),
        mode: options.mode,
        level: level_index,
        status: "ok".into(),
        b: None,
        e_physical: None,
        e_reduced: None,
        shift: 0.0,
        e_paper: None,
        e_rederived: None,
        constraint_residual: None,
        ode_residual: None,
        oracle_e: None,
        gap: None,
        nodes: None,
        oracle_nodes: None,
        oracle_verified: false,
        oracle_fixed_e: None,
        flags: String::new(),
    };
    let base = match deform(spec, NcContext::new(theta, m)) {
        Ok(base) => base,
        Err(e) => {
            row.status = e.code().into();
            return row;
        }
    };
    row.shift = base.energy_shift;

    let paper = level(&base, level_index, Mode::Paper);
    let rederived = level(&base, level_index, Mode::Rederived);
    row.e_paper = paper.as_ref().ok().map(|l| l.energy);
    row.e_rederived = rederived.as_ref().ok().map(|l| l.energy);
    let mut flags = Vec::new();
    match (row.e_paper, row.e_rederived) {
        (Some(p), Some(r)) if (p - r).abs() > SAME_TOL * r.abs() => flags.push("paper-differs"),
        (None, Some(_)) => flags.push("paper-unavailable"),
        _ => {}
    }
    if options.oracle {
        let fixed = oracle(&base, level_index, options.grid_points);
        row.oracle_fixed_e = fixed.and_then(|o| o.eigenvalues.get(level_index).copied());
    }

    let chosen = match options.mode {
        Mode::Paper => paper,
        Mode::Rederived => rederived,
    };
    let chosen = match chosen {
        Ok(l) => l,
        Err(e) => {
            row.status = e.code().into();
            row.flags = flags.join(";");
            return row;
        }
    };
    row.b = Some(chosen.problem.spec.b);
    row.e_physical = Some(chosen.energy);
    row.e_reduced = Some(chosen.energy - chosen.problem.energy_shift);
    row.constraint_residual = Some(chosen.constraint_residual);
    row.nodes = Some(chosen.nodes);

    let run = if options.oracle { oracle(&chosen.problem, level_index, options.grid_points) } else { None };
    let grid = match &run {
        Some(o) => Some(o.grid),
        None => auto_grid(&chosen.problem, oracle_levels(level_index), options.grid_points).ok(),
    };
    if let Some(grid) = grid {
        let report = ode_residual(&chosen.problem, chosen.energy, &chosen.radial, &grid);
        row.ode_residual = Some(if report.degenerate_function { f64::INFINITY } else { report.residual });
    }
    if options.oracle && run.is_none() {
        flags.push("oracle-failed");
    }
    if let Some(o) = run {
        let matched = match_level(&o, chosen.energy);
        let gap = matched.gap / chosen.energy.abs().max(f64::MIN_POSITIVE);
        row.oracle_e = Some(o.eigenvalues[matched.index]);
        row.gap = Some(gap);
        row.oracle_nodes = Some(matched.node_count);
        row.oracle_verified = gap <= GAP_TOL && row.ode_residual.is_some_and(|r| r <= RESIDUAL_TOL);
        if !row.oracle_verified {
            flags.push("oracle-disagrees");
        }
    }
    row.flags = flags.join(";");
    row
}

fn sorted(mut rows: Vec<SplittingRow>) -> Vec<SplittingRow> {
    rows.sort_by(|x, y| x.theta.total_cmp(&y.theta).then(x.m.cmp(&y.m)));
    rows
}

/// Every (θ, m) row of the config, in parallel, sorted by (θ, m).
pub fn spectrum_rows(config: &SweepConfig) -> Result<Vec<SplittingRow>> {
    if config.thetas.is_empty() || config.ms.is_empty() {
        return Err(Error::InvalidInput("theta and m lists must be non-empty".into()));
    }
    let pairs: Vec<(f64, i32)> =
        config.thetas.iter().flat_map(|&t| config.ms.iter().map(move |&m| (t, m))).collect();
    let rows = pairs
        .into_par_iter()
        .map(|(t, m)| spectrum_row(config.spec, t, m, config.level, config.options))
        .collect();
    Ok(sorted(rows))
}

fn line_fit(m: i32, source: FitSource, xs: &[f64], ys: &[f64]) -> SplittingFit {
    let mut fit = SplittingFit {
        m,
        source,
        points: xs.len(),
        slope: None,
        intercept: None,
        slope_r2: None,
        quadratic: None,
        quadratic_bound: None,
        reference: None,
        exponent: None,
        exponent_r2: None,
    };
    if xs.len() >= 2 {
        let line = fit_line(xs, ys);
        fit.slope = Some(line.slope);
        fit.intercept = Some(line.intercept);
        fit.slope_r2 = Some(line.r_squared);
    }
    if xs.len() >= 3 {
        let q = fit_quadratic(xs, ys)[2];
        let span = xs.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        fit.quadratic = Some(q);
        fit.quadratic_bound = Some(q.abs() * span * span);
    }
    fit
}

/// Splitting fits for one `m` of a sorted row set.
pub fn fit_rows(rows: &[SplittingRow], m: i32, reference: Option<f64>) -> Vec<SplittingFit> {
    let rows: Vec<&SplittingRow> = rows.iter().filter(|r| r.m == m).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| r.e_physical.map(|e| (r.theta_m, e))).unzip();
    let mut fits = vec![line_fit(m, FitSource::ClosedForm, &xs, &ys)];

    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| r.oracle_fixed_e.map(|e| (r.theta_m, e))).unzip();
    if xs.is_empty() {
        return fits;
    }
    let mut fit = line_fit(m, FitSource::OracleFixed, &xs, &ys);
    fit.reference = reference;
    if let Some(e0) = reference {
        let (lx, ly): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.theta > 0.0)
            .filter_map(|r| r.oracle_fixed_e.map(|e| (r.theta.ln(), (e - e0).abs())))
            .filter(|(_, d)| *d > 0.0)
            .map(|(x, d)| (x, d.ln()))
            .unzip();
        if lx.len() >= 2 {
            let line = fit_line(&lx, &ly);
            fit.exponent = Some(line.slope);
            fit.exponent_r2 = Some(line.r_squared);
        }
    }
    fits.push(fit);
    fits
}

/// Sweep rows plus per-`m` splitting fits. The exponent fit uses an extra
/// oracle run at θ = 0.
pub fn sweep(config: &SweepConfig) -> Result<SplittingReport> {
    let distinct = {
        let mut t = config.thetas.clone();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t.len()
    };
    if distinct < MIN_SWEEP_THETAS {
        return Err(Error::InvalidInput(format!("sweep needs at least {MIN_SWEEP_THETAS} distinct theta values")));
    }
    let rows = spectrum_rows(config)?;
    let mut ms = config.ms.clone();
    ms.sort_unstable();
    ms.dedup();
    let references: Vec<Option<f64>> = ms
        .par_iter()
        .map(|&m| {
            if !config.options.oracle {
                return None;
            }
            let base = deform(config.spec, NcContext::new(0.0, m)).ok()?;
            oracle(&base, config.level, config.options.grid_points)?.eigenvalues.get(config.level).copied()
        })
        .collect();
    let fits = ms.iter().zip(references).flat_map(|(&m, e0)| fit_rows(&rows, m, e0)).collect();
    Ok(SplittingReport { rows, fits })
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Missing,
}

impl Cell {
    fn opt_float(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }

    fn opt_int(v: Option<usize>) -> Self {
        v.map_or(Cell::Missing, |n| Cell::Int(n as i64))
    }

    fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(n) => Value::from(*n),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or_else(|| Value::String(x.to_string()), Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Missing => Value::Null,
        }
    }
}

/// A named table with fixed headers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidInput(format!("unknown format '{other}', expected one of: json, csv"))),
        }
    }
}

/// CSV: a `# schema=1` line, an optional `# generated=` line, then one
/// `# table=<name>` section per table.
pub fn emit_csv(tables: &[Table], generated: Option<&str>) -> String {
    let mut out = format!("# schema={SCHEMA}\n");
    if let Some(g) = generated {
        out.push_str(&format!("# generated={g}\n"));
    }
    for table in tables {
        out.push_str(&format!("# table={}\n", table.name));
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(&table.headers).expect("in-memory write");
        for row in &table.rows {
            writer.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 cells"));
    }
    out
}

/// JSON: `{"schema": 1, "generated"?: ..., "<table>": [{header: value}]}`.
pub fn emit_json(tables: &[Table], generated: Option<&str>) -> String {
    let mut root = serde_json::Map::new();
    root.insert("schema".into(), SCHEMA.into());
    if let Some(g) = generated {
        root.insert("generated".into(), g.into());
    }
    for table in tables {
        let rows = table
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> =
                    table.headers.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        root.insert(table.name.clone(), serde_json::Value::Array(rows));
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("json values");
    s.push('\n');
    s
}

pub fn emit(tables: &[Table], format: Format, generated: Option<&str>) -> String {
    match format {
        Format::Json => emit_json(tables, generated),
        Format::Csv => emit_csv(tables, generated),
    }
}

/// Section name, headers and string rows.
pub type RawTable = (String, Vec<String>, Vec<Vec<String>>);

/// Raw string tables of a CSV document, in section order.
pub fn parse_csv_tables(text: &str) -> Result<Vec<RawTable>> {
    let mut lines = text.lines().peekable();
    match lines.next() {
        Some(l) if l.trim() == format!("# schema={SCHEMA}") => {}
        other => return Err(Error::InvalidInput(format!("expected '# schema={SCHEMA}', found {other:?}"))),
    }
    let mut sections: Vec<(String, String)> = Vec::new();
    for line in lines {
        if let Some(name) = line.strip_prefix("# table=") {
            sections.push((name.trim().to_string(), String::new()));
        } else if line.starts_with('#') {
            continue;
        } else if let Some((_, body)) = sections.last_mut() {
            body.push_str(line);
            body.push('\n');
        } else if !line.trim().is_empty() {
            return Err(Error::InvalidInput("data before the first table section".into()));
        }
    }
    sections
        .into_iter()
        .map(|(name, body)| {
            let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
            let headers = reader
                .headers()
                .map_err(|e| Error::InvalidInput(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect();
            let rows = reader
                .records()
                .map(|r| {
                    r.map(|rec| rec.iter().map(str::to_string).collect()).map_err(|e| Error::InvalidInput(e.to_string()))
                })
                .collect::<Result<_>>()?;
            Ok((name, headers, rows))
        })
        .collect()
}

pub const ROW_HEADERS: [&str; 22] = [
    "family",
    "theta",
    "m",
    "theta_m",
    "mode",
    "level",
    "status",
    "b",
    "e_physical",
    "e_reduced",
    "shift",
    "e_paper",
    "e_rederived",
    "constraint_residual",
    "ode_residual",
    "oracle_e",
    "gap",
    "nodes",
    "oracle_nodes",
    "oracle_verified",
    "oracle_fixed_e",
    "flags",
];

pub const FIT_HEADERS: [&str; 12] = [
    "m",
    "source",
    "points",
    "slope",
    "intercept",
    "slope_r2",
    "quadratic",
    "quadratic_bound",
    "reference",
    "exponent",
    "exponent_r2",
    "family",
];

impl SplittingRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::text(self.family.as_str()),
            Cell::Float(self.theta),
            Cell::Int(i64::from(self.m)),
            Cell::Float(self.theta_m),
            Cell::text(self.mode.as_str()),
            Cell::Int(self.level as i64),
            Cell::text(&self.status),
            Cell::opt_float(self.b),
            Cell::opt_float(self.e_physical),
            Cell::opt_float(self.e_reduced),
            Cell::Float(self.shift),
            Cell::opt_float(self.e_paper),
            Cell::opt_float(self.e_rederived),
            Cell::opt_float(self.constraint_residual),
            Cell::opt_float(self.ode_residual),
            Cell::opt_float(self.oracle_e),
            Cell::opt_float(self.gap),
            Cell::opt_int(self.nodes),
            Cell::opt_int(self.oracle_nodes),
            Cell::Bool(self.oracle_verified),
            Cell::opt_float(self.oracle_fixed_e),
            Cell::text(&self.flags),
        ]
    }

    fn parse(fields: &[String]) -> Result<Self> {
        let f = Fields(fields);
        Ok(Self {
            family: f.get(0)?,
            theta: f.get(1)?,
            m: f.get(2)?,
            theta_m: f.get(3)?,
            mode: f.get(4)?,
            level: f.get(5)?,
            status: fields[6].clone(),
            b: f.opt(7)?,
            e_physical: f.opt(8)?,
            e_reduced: f.opt(9)?,
            shift: f.get(10)?,
            e_paper: f.opt(11)?,
            e_rederived: f.opt(12)?,
            constraint_residual: f.opt(13)?,
            ode_residual: f.opt(14)?,
            oracle_e: f.opt(15)?,
            gap: f.opt(16)?,
            nodes: f.opt(17)?,
            oracle_nodes: f.opt(18)?,
            oracle_verified: f.get(19)?,
            oracle_fixed_e: f.opt(20)?,
            flags: fields[21].clone(),
        })
    }
}

impl SplittingFit {
    fn cells(&self, family: Family) -> Vec<Cell> {
        vec![
            Cell::Int(i64::from(self.m)),
            Cell::text(self.source.as_str()),
            Cell::Int(self.points as i64),
            Cell::opt_float(self.slope),
            Cell::opt_float(self.intercept),
            Cell::opt_float(self.slope_r2),
            Cell::opt_float(self.quadratic),
            Cell::opt_float(self.quadratic_bound),
            Cell::opt_float(self.reference),
            Cell::opt_float(self.exponent),
            Cell::opt_float(self.exponent_r2),
            Cell::text(family.as_str()),
        ]
    }

    fn parse(fields: &[String]) -> Result<Self> {
        let f = Fields(fields);
        Ok(Self {
            m: f.get(0)?,
            source: f.get(1)?,
            points: f.get(2)?,
            slope: f.opt(3)?,
            intercept: f.opt(4)?,
            slope_r2: f.opt(5)?,
            quadratic: f.opt(6)?,
            quadratic_bound: f.opt(7)?,
            reference: f.opt(8)?,
            exponent: f.opt(9)?,
            exponent_r2: f.opt(10)?,
        })
    }
}

struct Fields<'a>(&'a [String]);

impl Fields<'_> {
    fn get<T: FromStr>(&self, i: usize) -> Result<T> {
        let raw = self.0.get(i).ok_or_else(|| Error::InvalidInput(format!("missing column {i}")))?;
        raw.parse().map_err(|_| Error::InvalidInput(format!("column {i}: cannot parse '{raw}'")))
    }

    fn opt<T: FromStr>(&self, i: usize) -> Result<Option<T>> {
        match self.0.get(i) {
            Some(s) if s.is_empty() => Ok(None),
            _ => self.get(i).map(Some),
        }
    }
}

pub fn rows_table(rows: &[SplittingRow]) -> Table {
    let mut t = Table::new("rows", &ROW_HEADERS);
    t.rows = rows.iter().map(SplittingRow::cells).collect();
    t
}

pub fn fits_table(fits: &[SplittingFit], family: Family) -> Table {
    let mut t = Table::new("fits", &FIT_HEADERS);
    t.rows = fits.iter().map(|f| f.cells(family)).collect();
    t
}

impl SplittingReport {
    pub fn tables(&self) -> Vec<Table> {
        let family = self.rows.first().map_or(Family::EvenPower, |r| r.family);
        vec![rows_table(&self.rows), fits_table(&self.fits, family)]
    }

    pub fn to_csv(&self, generated: Option<&str>) -> String {
        emit_csv(&self.tables(), generated)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut report = SplittingReport { rows: Vec::new(), fits: Vec::new() };
        for (name, headers, rows) in parse_csv_tables(text)? {
            let expected: &[&str] = match name.as_str() {
                "rows" => &ROW_HEADERS,
                "fits" => &FIT_HEADERS,
                other => return Err(Error::InvalidInput(format!("unknown table '{other}'"))),
            };
            if headers != expected {
                return Err(Error::InvalidInput(format!("table '{name}' has unexpected headers")));
            }
            for fields in rows {
                if name == "rows" {
                    report.rows.push(SplittingRow::parse(&fields)?);
                } else {
                    report.fits.push(SplittingFit::parse(&fields)?);
                }
            }
        }
        Ok(report)
    }
}

pub fn deform_tables(problem: &DeformedRadialProblem) -> Vec<Table> {
    let mut summary = Table::new(
        "problem",
        &["family", "a", "b", "c", "theta", "m", "theta_m", "energy_shift", "centrifugal"],
    );
    let s = problem.spec;
    summary.rows.push(vec![
        Cell::text(s.family.as_str()),
        Cell::Float(s.a),
        Cell::Float(s.b),
        Cell::Float(s.c),
        Cell::Float(problem.theta),
        Cell::Int(i64::from(problem.m)),
        Cell::Float(problem.theta * f64::from(problem.m)),
        Cell::Float(problem.energy_shift),
        Cell::Float(problem.centrifugal),
    ]);
    let mut terms = Table::new("terms", &["power", "coefficient"]);
    terms.rows = problem.terms.iter().rev().map(|(&p, &c)| vec![Cell::Int(i64::from(p)), Cell::Float(c)]).collect();
    vec![summary, terms]
}

pub fn verify_tables(report: &crate::verify::VerifyReport) -> Vec<Table> {
    let mut t = Table::new(
        "ledger",
        &[
            "entry",
            "family",
            "verdict",
            "paper_reading",
            "paper_b",
            "paper_energy",
            "paper_oracle",
            "paper_gap",
            "paper_residual",
            "rederived_reading",
            "rederived_b",
            "rederived_energy",
            "rederived_oracle",
            "rederived_gap",
            "rederived_residual",
            "note",
        ],
    );
    t.rows = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![Cell::text(&r.entry), Cell::text(r.family.as_str()), Cell::text(r.verdict.as_str())];
            for reading in [&r.paper, &r.rederived] {
                cells.extend([
                    Cell::text(&reading.description),
                    Cell::opt_float(reading.b),
                    Cell::opt_float(reading.energy),
                    Cell::opt_float(reading.oracle_energy),
                    Cell::opt_float(reading.gap),
                    Cell::opt_float(reading.residual),
                ]);
            }
            cells.push(Cell::text(&r.note));
            cells
        })
        .collect();
    vec![t]
}

pub fn oracle_tables(result: &OracleResult) -> Vec<Table> {
    let mut grid = Table::new("grid", &["r_min", "r_max", "points"]);
    grid.rows.push(vec![
        Cell::Float(result.grid.r_min),
        Cell::Float(result.grid.r_max),
        Cell::Int(result.grid.points as i64),
    ]);
    let mut levels = Table::new("levels", &["index", "energy", "coarse", "fine", "nodes", "residual", "converged"]);
    levels.rows = (0..result.eigenvalues.len())
        .map(|i| {
            vec![
                Cell::Int(i as i64),
                Cell::Float(result.eigenvalues[i]),
                Cell::Float(result.coarse[i]),
                Cell::Float(result.fine[i]),
                Cell::Int(result.node_counts[i] as i64),
                Cell::Float(result.residual_norms[i]),
                Cell::Bool(result.converged[i]),
            ]
        })
        .collect();
    vec![grid, levels]
}

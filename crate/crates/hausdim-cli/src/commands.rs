//! Subcommand implementations shared by the binary and the test suite.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;

use hausdim::solver::ProblemSetup;
use hausdim::{
    find_bracket, DigitSetKind, DigitSetSpec, DimensionBracket, IfsProblem, MeshParams,
    SolveOptions,
};

use crate::config::{
    ComplexSetName, OutputFormat, PartialConfig, ProblemSpec, RunConfig, DEFAULT_H_1D,
    DEFAULT_H_2D, DEFAULT_TRUNCATION_RADIUS,
};
use crate::golden::{
    CfRow, ComplexRow, PerturbedRow, CF_ROWS, CF_TOL, COMPLEX_ROWS, PERTURBED_ROWS, PERTURBED_TOL,
};
use crate::record::{append_csv, append_ndjson, format_f64, ResultRecord};

/// Builds the library problem for a validated configuration.
pub fn build_problem(config: &RunConfig) -> anyhow::Result<IfsProblem> {
    let problem = match &config.problem {
        ProblemSpec::Cantor { digits } => IfsProblem::continued_fraction(digits)?,
        ProblemSpec::Perturbed { lambda } => IfsProblem::perturbed(*lambda)?,
        ProblemSpec::Complex { set } => {
            let kind = match set {
                ComplexSetName::I1 => DigitSetKind::I1,
                ComplexSetName::I2 => DigitSetKind::I2,
                ComplexSetName::I3 => DigitSetKind::I3,
            };
            let spec = DigitSetSpec::new(kind, config.truncation_radius)?;
            IfsProblem::complex_set(spec)?
        }
    };
    Ok(problem)
}

fn solve_options(config: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol_s: config.tol_s,
        tol_eig: config.tol_eig,
        safety_factor: config.safety_factor,
        ..SolveOptions::default()
    }
}

fn mesh_params(config: &RunConfig) -> MeshParams {
    MeshParams {
        h: config.h,
        margin_rings: config.margin_rings,
        refine_depth: config.refine_depth,
    }
}

/// Runs the solver for a validated configuration and wraps the result.
pub fn solve_record(config: &RunConfig) -> anyhow::Result<(ResultRecord, DimensionBracket)> {
    config.validate()?;
    let problem = build_problem(config)?;
    let start = Instant::now();
    let bracket = find_bracket(&problem, &mesh_params(config), &solve_options(config))
        .with_context(|| format!("solving {}", config.problem))?;
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let record = ResultRecord::new(config.clone(), &bracket, total_ms);
    Ok((record, bracket))
}

fn dump_matrix(
    config: &RunConfig,
    bracket: &DimensionBracket,
    path: &PathBuf,
) -> anyhow::Result<()> {
    let problem = build_problem(config)?;
    let setup = ProblemSetup::new(&problem, &mesh_params(config), config.safety_factor)?;
    let pair = setup.assemble_at(bracket.s_upper)?;
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating matrix dump {}", path.display()))?;
    let mut writer = std::io::BufWriter::new(file);
    pair.b
        .write_coords(&mut writer)
        .with_context(|| format!("writing matrix dump {}", path.display()))?;
    Ok(())
}

/// Persists and prints one record according to its configuration.
pub fn emit_record(record: &ResultRecord) -> anyhow::Result<()> {
    if let Some(path) = &record.config.out {
        match record.config.format {
            OutputFormat::Json => append_ndjson(path, record)?,
            OutputFormat::Csv => append_csv(path, record)?,
        }
    }
    let b = &record.bracket;
    println!("problem {}  h = {}", record.config.problem, format_f64(b.h));
    println!(
        "  certified bracket [{}, {}]",
        format_f64(b.s_lower),
        format_f64(b.s_upper)
    );
    println!(
        "  width {}  cw_lower {}  cw_upper {}",
        format_f64(b.width),
        format_f64(b.cert_lower.value),
        format_f64(b.cert_upper.value)
    );
    if let (Some(radius), Some(tail)) = (b.truncation_radius, b.tail_constant) {
        println!(
            "  tail radius {}  tail constant {}",
            format_f64(radius),
            format_f64(tail)
        );
    }
    println!(
        "  assemblies {}  power iterations {}  elapsed {:.1} ms",
        b.stats.assemblies, b.stats.power_iterations, record.timings.total_ms
    );
    Ok(())
}

fn run_and_emit(config: RunConfig) -> anyhow::Result<ResultRecord> {
    let dump = config.dump_matrix.clone();
    let (record, bracket) = solve_record(&config)?;
    if let Some(path) = &dump {
        dump_matrix(&config, &bracket, path)?;
    }
    emit_record(&record)?;
    Ok(record)
}

/// Bounded-digit continued fraction run.
pub fn cmd_cantor(
    digits: Vec<u32>,
    options: PartialConfig,
    dump: Option<PathBuf>,
) -> anyhow::Result<ResultRecord> {
    let mut config = options.into_config(ProblemSpec::Cantor { digits }, DEFAULT_H_1D)?;
    config.dump_matrix = dump;
    run_and_emit(config)
}

/// Perturbed-Cantor run.
pub fn cmd_perturbed(
    lambda: f64,
    options: PartialConfig,
    dump: Option<PathBuf>,
) -> anyhow::Result<ResultRecord> {
    let mut config = options.into_config(ProblemSpec::Perturbed { lambda }, DEFAULT_H_1D)?;
    config.dump_matrix = dump;
    run_and_emit(config)
}

/// Planar digit set run.
pub fn cmd_complex(
    set: ComplexSetName,
    options: PartialConfig,
    dump: Option<PathBuf>,
) -> anyhow::Result<ResultRecord> {
    let mut config = options.into_config(ProblemSpec::Complex { set }, DEFAULT_H_2D)?;
    config.dump_matrix = dump;
    run_and_emit(config)
}

/// Which reference table to reproduce. The identifiers follow the
/// published numbering, which has no second table at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    T1,
    T3,
    T4,
}

impl FromStr for TableId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(TableId::T1),
            "t3" => Ok(TableId::T3),
            "t4" => Ok(TableId::T4),
            _ => bail!("unknown table {s:?}; expected t1, t3, or t4"),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableId::T1 => "t1",
            TableId::T3 => "t3",
            TableId::T4 => "t4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Skipped => "SKIP",
        })
    }
}

/// Outcome of one reproduced row.
#[derive(Debug, Clone)]
pub struct RowReport {
    pub label: String,
    pub h: f64,
    pub radius: Option<f64>,
    pub status: RowStatus,
    pub got: Option<(f64, f64)>,
    pub want: (f64, f64),
    pub tol: f64,
    pub detail: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ReproduceReport {
    pub table: TableId,
    pub rows: Vec<RowReport>,
}

impl ReproduceReport {
    /// Skipped rows do not fail the reproduction.
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status != RowStatus::Fail)
    }
}

struct PlannedRow {
    label: String,
    problem: ProblemSpec,
    h: f64,
    radius: Option<f64>,
    want: (f64, f64),
    tol: f64,
    estimated_secs: f64,
}

/// Crude work model used only for budgeting: node count times digit
/// count, scaled by an observed per-unit cost.
fn estimate_secs_1d(h: f64, digits: usize) -> f64 {
    (0.5 / h) * digits as f64 * 1e-5
}

fn estimate_secs_2d(set: ComplexSetName, h: f64, radius: f64) -> f64 {
    let nodes = 0.4 / (h * h);
    let digits = match set {
        ComplexSetName::I1 => std::f64::consts::PI / 2.0 * radius * radius,
        ComplexSetName::I2 => std::f64::consts::PI / 4.0 * radius * radius + radius,
        ComplexSetName::I3 => 10.0,
    };
    nodes * digits * 6e-6
}

fn plan_cf(row: &CfRow) -> PlannedRow {
    PlannedRow {
        label: format!("{} h={}", row.label, row.h),
        problem: ProblemSpec::Cantor {
            digits: row.digits.to_vec(),
        },
        h: row.h,
        radius: None,
        want: (row.lower, row.upper),
        tol: CF_TOL,
        estimated_secs: estimate_secs_1d(row.h, row.digits.len()),
    }
}

fn plan_perturbed(row: &PerturbedRow) -> PlannedRow {
    PlannedRow {
        label: format!("lambda={} h={}", row.lambda, row.h),
        problem: ProblemSpec::Perturbed { lambda: row.lambda },
        h: row.h,
        radius: None,
        want: (row.lower, row.upper),
        tol: PERTURBED_TOL,
        estimated_secs: estimate_secs_1d(row.h, 2),
    }
}

fn plan_complex(row: &ComplexRow) -> PlannedRow {
    let uses_tail = row.set.uses_tail();
    let radius = if uses_tail {
        row.radius
    } else {
        DEFAULT_TRUNCATION_RADIUS
    };
    PlannedRow {
        label: if uses_tail {
            format!("{} h={} R={}", row.set, row.h, row.radius)
        } else {
            format!("{} h={}", row.set, row.h)
        },
        problem: ProblemSpec::Complex { set: row.set },
        h: row.h,
        radius: Some(radius),
        want: (row.lower, row.upper),
        tol: row.tol,
        estimated_secs: estimate_secs_2d(row.set, row.h, radius),
    }
}

fn reproduce_row(planned: &PlannedRow, base: &PartialConfig, budget_secs: f64) -> RowReport {
    let mut report = RowReport {
        label: planned.label.clone(),
        h: planned.h,
        radius: planned.radius,
        status: RowStatus::Skipped,
        got: None,
        want: planned.want,
        tol: planned.tol,
        detail: String::new(),
        elapsed_ms: 0.0,
    };
    if planned.estimated_secs > budget_secs {
        report.detail = format!(
            "estimated {:.0} s exceeds budget {budget_secs:.0} s",
            planned.estimated_secs
        );
        return report;
    }
    let mut options = base.clone();
    options.h = Some(planned.h);
    if let Some(radius) = planned.radius {
        options.truncation_radius = Some(radius);
    }
    options.out = None;
    let default_h = planned.h;
    let config = match options.into_config(planned.problem.clone(), default_h) {
        Ok(config) => config,
        Err(err) => {
            report.status = RowStatus::Fail;
            report.detail = err.to_string();
            return report;
        }
    };
    let start = Instant::now();
    match solve_record(&config) {
        Ok((record, _)) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            let got = (record.bracket.s_lower, record.bracket.s_upper);
            report.got = Some(got);
            let dev = (got.0 - planned.want.0)
                .abs()
                .max((got.1 - planned.want.1).abs());
            if dev <= planned.tol {
                report.status = RowStatus::Pass;
                report.detail = format!("max endpoint deviation {dev:.2e}");
            } else {
                report.status = RowStatus::Fail;
                report.detail = format!(
                    "max endpoint deviation {dev:.2e} exceeds tolerance {:.1e}",
                    planned.tol
                );
            }
        }
        Err(err) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            report.status = RowStatus::Fail;
            report.detail = format!("{err:#}");
        }
    }
    report
}

/// Re-runs the rows of one reference table and compares endpoints.
/// Rows whose estimated cost exceeds the budget are skipped, not
/// failed. Rows run in parallel; report order follows the table.
pub fn cmd_reproduce(
    table: TableId,
    subset: Option<&str>,
    budget_secs: f64,
    base: PartialConfig,
) -> anyhow::Result<ReproduceReport> {
    let planned: Vec<PlannedRow> = match table {
        TableId::T1 => CF_ROWS.iter().map(plan_cf).collect(),
        TableId::T3 => PERTURBED_ROWS.iter().map(plan_perturbed).collect(),
        TableId::T4 => COMPLEX_ROWS.iter().map(plan_complex).collect(),
    };
    let filter = subset.map(|s| s.to_ascii_lowercase());
    let selected: Vec<PlannedRow> = planned
        .into_iter()
        .filter(|row| {
            filter
                .as_ref()
                .map(|f| row.label.to_ascii_lowercase().contains(f.as_str()))
                .unwrap_or(true)
        })
        .collect();
    if selected.is_empty() {
        bail!("no rows of table {table} match the requested subset");
    }
    let rows: Vec<RowReport> = selected
        .par_iter()
        .map(|row| reproduce_row(row, &base, budget_secs))
        .collect();
    Ok(ReproduceReport { table, rows })
}

/// Prints the human-readable reproduction table.
pub fn print_reproduce_report(report: &ReproduceReport) {
    println!("table {}: {} rows", report.table, report.rows.len());
    for row in &report.rows {
        let got = match row.got {
            Some((lo, hi)) => format!("[{}, {}]", format_f64(lo), format_f64(hi)),
            None => "-".to_string(),
        };
        println!(
            "  {} {:28} want [{:.15}, {:.15}]  got {got}  {}",
            row.status, row.label, row.want.0, row.want.1, row.detail
        );
    }
    let passed = report
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Pass)
        .count();
    let failed = report
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Fail)
        .count();
    let skipped = report
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Skipped)
        .count();
    println!("  {passed} passed, {failed} failed, {skipped} skipped");
}

//! Front end for the `relaxip` binary: target resolution, report assembly
//! and the three output formats.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use relaxip::catalog;
use relaxip::derivcheck::{check_derivatives, DerivativeReport};
use relaxip::solver::{solve, IterationRecord, SolveReport, SolveStatus, SolverConfig};
use relaxip::text::load_model;
use relaxip::Problem;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 6;
/// Largest relative derivative error `check` accepts.
pub const CHECK_TOL: f64 = 1e-5;

pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::ApproxKkt => 0,
        SolveStatus::SingularStationary => 2,
        SolveStatus::InfeasibleStationary => 3,
        SolveStatus::IterationLimit => 4,
        SolveStatus::StepFailure => 5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

pub type DynProblem = Box<dyn Problem + Send + Sync>;

/// A catalog name, or else a path to a model file.
pub fn resolve_target(target: &str) -> Result<DynProblem, String> {
    if let Ok(p) = catalog::lookup_problem(target) {
        return Ok(p);
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(format!(
            "`{target}` is neither a built-in problem nor an existing file (built-ins: {})",
            catalog::names().join(", ")
        ));
    }
    let src = std::fs::read_to_string(path).map_err(|e| format!("cannot read {target}: {e}"))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| target.to_string());
    let model = load_model(&src, &name).map_err(|e| format!("{target}: {e}"))?;
    Ok(Box::new(model))
}

/// One trace row: `(l, f, v, ‖r‖∞, ‖g‖∞, μ, τ, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub l: usize,
    pub f: f64,
    pub v: f64,
    pub r: f64,
    pub g: Option<f64>,
    pub mu: Option<f64>,
    pub tau: Option<f64>,
    pub k: Option<usize>,
}

impl From<&IterationRecord> for Row {
    fn from(rec: &IterationRecord) -> Self {
        Self {
            l: rec.l,
            f: rec.f,
            v: rec.infeasibility,
            r: rec.r_inf,
            g: rec.g_inf,
            mu: rec.mu,
            tau: rec.tau,
            k: rec.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalPoint {
    pub x: Vec<f64>,
    pub f: f64,
    pub infeasibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterSummary {
    pub nf: usize,
    pub ng: usize,
    pub iters: usize,
}

/// Everything a `solve` run prints, in every format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub problem: String,
    pub status: String,
    pub iterations: Vec<Row>,
    #[serde(rename = "final")]
    pub final_point: FinalPoint,
    pub counters: CounterSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.status_enum().map_or(EXIT_USAGE, exit_code)
    }

    fn status_enum(&self) -> Option<SolveStatus> {
        [
            SolveStatus::ApproxKkt,
            SolveStatus::SingularStationary,
            SolveStatus::InfeasibleStationary,
            SolveStatus::IterationLimit,
            SolveStatus::StepFailure,
        ]
        .into_iter()
        .find(|s| s.label() == self.status)
    }
}

impl From<&SolveReport> for Report {
    fn from(r: &SolveReport) -> Self {
        Self {
            problem: r.problem.clone(),
            status: r.status.label().to_string(),
            iterations: r.records.iter().map(Row::from).collect(),
            final_point: FinalPoint {
                x: r.x.clone(),
                f: r.f,
                infeasibility: r.infeasibility,
            },
            counters: CounterSummary {
                nf: r.counters.nf,
                ng: r.counters.ng,
                iters: r.counters.iters,
            },
            diagnostics: r.diagnostics.clone(),
        }
    }
}

pub fn run_solve(p: &dyn Problem, cfg: &SolverConfig) -> Result<Report, String> {
    solve(p, cfg).map(|r| Report::from(&r)).map_err(|e| e.to_string())
}

/// `1.2345e-09` style: four decimals, signed two-digit exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let raw = format!("{v:.4e}");
    let (mant, exp) = raw.split_once('e').unwrap_or((&raw, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn opt_sci(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), sci)
}

fn opt_int(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |k| k.to_string())
}

const COLUMNS: [&str; 8] = ["l", "f", "v", "r", "g", "mu", "tau", "k"];

pub fn write_table(out: &mut impl Write, rep: &Report) -> std::io::Result<()> {
    writeln!(out, "problem {}", rep.problem)?;
    writeln!(
        out,
        "{:>3} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>5}",
        COLUMNS[0], COLUMNS[1], COLUMNS[2], COLUMNS[3], COLUMNS[4], COLUMNS[5], COLUMNS[6], COLUMNS[7]
    )?;
    for row in &rep.iterations {
        writeln!(
            out,
            "{:>3} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>5}",
            row.l,
            sci(row.f),
            sci(row.v),
            sci(row.r),
            opt_sci(row.g),
            opt_sci(row.mu),
            opt_sci(row.tau),
            opt_int(row.k)
        )?;
    }
    writeln!(out, "status      {}", rep.status)?;
    let xs: Vec<String> = rep.final_point.x.iter().map(|v| format!("{v:.4}")).collect();
    writeln!(out, "x           ({})", xs.join(", "))?;
    writeln!(out, "f           {}", sci(rep.final_point.f))?;
    writeln!(out, "v           {}", sci(rep.final_point.infeasibility))?;
    writeln!(
        out,
        "Nf {}  Ng {}  iterations {}",
        rep.counters.nf, rep.counters.ng, rep.counters.iters
    )?;
    if let Some(d) = &rep.diagnostics {
        writeln!(out, "note        {d}")?;
    }
    Ok(())
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Trace rows under an `l,f,v,r,g,mu,tau,k` header, a blank line, then one
/// summary record. Numbers use shortest round-trip formatting; missing
/// entries are empty.
pub fn write_csv(out: &mut impl Write, rep: &Report) -> Result<(), String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let err = |e: csv::Error| e.to_string();
    w.write_record(COLUMNS).map_err(err)?;
    for row in &rep.iterations {
        w.write_record([
            row.l.to_string(),
            row.f.to_string(),
            row.v.to_string(),
            row.r.to_string(),
            csv_opt(row.g),
            csv_opt(row.mu),
            csv_opt(row.tau),
            row.k.map_or_else(String::new, |k| k.to_string()),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    out.write_all(&bytes).map_err(|e| e.to_string())?;
    writeln!(out).map_err(|e| e.to_string())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["problem", "status", "x", "f", "infeasibility", "nf", "ng", "iters"])
        .map_err(err)?;
    let xs: Vec<String> = rep.final_point.x.iter().map(|v| v.to_string()).collect();
    w.write_record([
        rep.problem.clone(),
        rep.status.clone(),
        xs.join(";"),
        rep.final_point.f.to_string(),
        rep.final_point.infeasibility.to_string(),
        rep.counters.nf.to_string(),
        rep.counters.ng.to_string(),
        rep.counters.iters.to_string(),
    ])
    .map_err(err)?;
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    out.write_all(&bytes).map_err(|e| e.to_string())
}

pub fn write_json(out: &mut impl Write, rep: &Report) -> Result<(), String> {
    serde_json::to_writer_pretty(&mut *out, rep).map_err(|e| e.to_string())?;
    writeln!(out).map_err(|e| e.to_string())
}

pub fn write_report(out: &mut impl Write, rep: &Report, format: OutputFormat) -> Result<(), String> {
    match format {
        OutputFormat::Table => write_table(out, rep).map_err(|e| e.to_string()),
        OutputFormat::Csv => write_csv(out, rep),
        OutputFormat::Json => write_json(out, rep),
    }
}

/// Derivative check at the standard start. Returns the report and the exit
/// code (`0` or [`EXIT_CHECK_FAILED`]).
pub fn run_check(p: &dyn Problem, h_step: f64) -> Result<(DerivativeReport, i32), String> {
    let rep = check_derivatives(p, &p.standard_start(), h_step).map_err(|e| e.to_string())?;
    let code = if rep.passes(CHECK_TOL) { 0 } else { EXIT_CHECK_FAILED };
    Ok((rep, code))
}

/// `NAME n=.. me=.. m=..` for each catalog entry whose name contains
/// `filter` (case-insensitive). An empty filter lists everything.
pub fn list_lines(filter: &str) -> Vec<String> {
    let needle = filter.to_ascii_lowercase();
    catalog::all()
        .iter()
        .filter(|p| p.name.to_ascii_lowercase().contains(&needle))
        .map(|p| format!("{} n={} me={} m={}", p.name, p.num_vars(), p.num_eq(), p.num_ineq()))
        .collect()
}

/// Solves every catalog problem, one thread each. Results come back in
/// catalog order.
pub fn solve_all(cfg: &SolverConfig) -> Vec<Result<Report, String>> {
    let problems = catalog::all();
    std::thread::scope(|scope| {
        let handles: Vec<_> = problems
            .iter()
            .map(|p| scope.spawn(move || run_solve(p, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("solver thread panicked".to_string())))
            .collect()
    })
}

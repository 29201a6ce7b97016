//! Trace and summary files. Floats are written with 17 significant digits so
//! that reading a trace back gives the exact values.

use std::fs;
use std::io::Write;
use std::path::Path;

use islp::lp::{PivotRecord, Termination};
use islp::penalty::Ratios;
use islp::solver::{IterationRecord, SolveReport, SolveStatus, StepType};
use serde::{Deserialize, Serialize};

use crate::config::Mode;
use crate::error::CliError;

pub const TRACE_COLUMNS: [&str; 29] = [
    "k",
    "x",
    "f",
    "v",
    "rho",
    "gamma",
    "delta",
    "alpha",
    "dl_opt",
    "dl_fea",
    "pivots",
    "e_opt",
    "e_fea",
    "e_c",
    "kkt",
    "step_type",
    "rho_prev",
    "rho_tilde",
    "dust_reductions",
    "grad_norm",
    "kappa0",
    "d",
    "sigma",
    "armijo_slack",
    "psst_slack",
    "r_v",
    "r_phi",
    "r_c",
    "termination",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn vector(v: &[f64]) -> String {
    v.iter().map(|&x| float(x)).collect::<Vec<_>>().join(";")
}

fn step_name(s: StepType) -> &'static str {
    match s {
        StepType::Accepted => "accepted",
        StepType::NullStep => "null",
        StepType::Terminal => "terminal",
    }
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::RatiosSatisfied => "ratios",
        Termination::LpOptimal => "lp_optimal",
        Termination::PivotLimit => "pivot_limit",
    }
}

pub fn trace_row(r: &IterationRecord) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(float).unwrap_or_default();
    vec![
        r.k.to_string(),
        vector(&r.x),
        float(r.f),
        float(r.v),
        float(r.rho),
        float(r.gamma),
        float(r.delta),
        float(r.alpha),
        float(r.dl_opt),
        float(r.dl_fea),
        r.pivots.to_string(),
        float(r.e_opt),
        float(r.e_fea),
        float(r.e_c),
        float(r.kkt),
        step_name(r.step_type).into(),
        float(r.rho_prev),
        float(r.rho_tilde),
        r.dust_reductions.to_string(),
        float(r.grad_norm),
        float(r.kappa0),
        vector(&r.d),
        opt(r.sigma),
        opt(r.armijo_slack),
        float(r.psst_slack),
        float(r.ratios.r_v),
        float(r.ratios.r_phi),
        float(r.ratios.r_c),
        termination_name(r.termination).into(),
    ]
}

pub fn write_trace(path: &Path, trace: &[IterationRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_COLUMNS)?;
    for r in trace {
        w.write_record(trace_row(r))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// Parses a trace written by [`write_trace`]. Pivot histories are not stored
/// in the CSV and come back empty.
pub fn read_trace(path: &Path) -> Result<Vec<IterationRecord>, CliError> {
    let mut rd = csv::Reader::from_path(path)?;
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(CliError::Trace {
            row: 0,
            message: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| CliError::Trace {
            row: row + 1,
            message,
        };
        let field = |i: usize| rec.get(i).unwrap_or("");
        let f = |i: usize| -> Result<f64, CliError> {
            field(i)
                .parse()
                .map_err(|_| bad(format!("{}: '{}'", TRACE_COLUMNS[i], field(i))))
        };
        let u = |i: usize| -> Result<usize, CliError> {
            field(i)
                .parse()
                .map_err(|_| bad(format!("{}: '{}'", TRACE_COLUMNS[i], field(i))))
        };
        let opt = |i: usize| -> Result<Option<f64>, CliError> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        let vec = |i: usize| -> Result<Vec<f64>, CliError> {
            field(i)
                .split(';')
                .map(|s| {
                    s.parse()
                        .map_err(|_| bad(format!("{}: '{s}'", TRACE_COLUMNS[i])))
                })
                .collect()
        };
        let step_type = match field(15) {
            "accepted" => StepType::Accepted,
            "null" => StepType::NullStep,
            "terminal" => StepType::Terminal,
            s => return Err(bad(format!("step_type: '{s}'"))),
        };
        let termination = match field(28) {
            "ratios" => Termination::RatiosSatisfied,
            "lp_optimal" => Termination::LpOptimal,
            "pivot_limit" => Termination::PivotLimit,
            s => return Err(bad(format!("termination: '{s}'"))),
        };
        out.push(IterationRecord {
            k: u(0)?,
            x: vec(1)?,
            f: f(2)?,
            v: f(3)?,
            rho: f(4)?,
            gamma: f(5)?,
            delta: f(6)?,
            alpha: f(7)?,
            dl_opt: f(8)?,
            dl_fea: f(9)?,
            pivots: u(10)?,
            e_opt: f(11)?,
            e_fea: f(12)?,
            e_c: f(13)?,
            kkt: f(14)?,
            step_type,
            rho_prev: f(16)?,
            rho_tilde: f(17)?,
            dust_reductions: u(18)?,
            grad_norm: f(19)?,
            kappa0: f(20)?,
            d: vec(21)?,
            sigma: opt(22)?,
            armijo_slack: opt(23)?,
            psst_slack: f(24)?,
            ratios: Ratios {
                r_v: f(25)?,
                r_phi: f(26)?,
                r_c: f(27)?,
            },
            termination,
            pivot_history: Vec::new(),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct PivotLine<'a> {
    k: usize,
    #[serde(flatten)]
    record: &'a PivotRecord,
}

/// One JSON object per subproblem iterate, tagged with its outer iteration.
pub fn write_pivots(path: &Path, trace: &[IterationRecord]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    for r in trace {
        for p in &r.pivot_history {
            serde_json::to_writer(&mut buf, &PivotLine { k: r.k, record: p })?;
            buf.push(b'\n');
        }
    }
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

/// Per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub mode: String,
    pub iterations: usize,
    pub pivots: usize,
    pub f_evals: usize,
    pub f: f64,
    pub v: f64,
    pub kkt: f64,
    pub rho: f64,
    /// 1 success, -1 iteration limit, -2 infeasible stationary or stalled.
    pub exit: i32,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
}

impl RunSummary {
    pub fn new(report: &SolveReport, mode: Mode) -> Self {
        Self {
            problem: report.problem.clone(),
            mode: match mode {
                Mode::Inexact => "inexact",
                Mode::Exact => "exact",
            }
            .into(),
            iterations: report.iterations,
            pivots: report.pivots,
            f_evals: report.f_evals,
            f: report.f,
            v: report.v,
            kkt: report.kkt,
            rho: report.rho,
            exit: report.status.exit_code(),
            status: status_name(report.status).into(),
            diagnostic: report.diagnostic.clone(),
        }
    }

    /// Average subproblem pivots per outer iteration.
    pub fn pivots_per_iteration(&self) -> f64 {
        self.pivots as f64 / (self.iterations + 1) as f64
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::KktSuccess => "kkt_success",
        SolveStatus::InfeasibleStationary => "infeasible_stationary",
        SolveStatus::IterLimit => "iter_limit",
        SolveStatus::Stalled => "stalled",
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Fixed-width table, one row per run.
pub fn summary_table(runs: &[RunSummary]) -> String {
    let mut s = format!(
        "{:<12} {:>6} {:>7} {:>6} {:>14} {:>10} {:>10} {:>10} {:>5}\n",
        "problem", "#iter", "#pivot", "#f", "f", "v", "kkt", "rho", "exit"
    );
    for r in runs {
        s += &format!(
            "{:<12} {:>6} {:>7} {:>6} {:>14.6e} {:>10.2e} {:>10.2e} {:>10.2e} {:>5}\n",
            r.problem, r.iterations, r.pivots, r.f_evals, r.f, r.v, r.kkt, r.rho, r.exit
        );
    }
    s
}

/// Unit-width bins of average pivots per iteration; the last bin is open.
pub const HISTOGRAM_BINS: usize = 21;

pub fn pivot_histogram(runs: &[RunSummary]) -> Vec<usize> {
    let mut counts = vec![0; HISTOGRAM_BINS];
    for r in runs {
        let bin = (r.pivots_per_iteration().floor() as usize).min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
    }
    counts
}

pub fn write_histogram(path: &Path, counts: &[usize]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lower", "upper", "count"])?;
    for (i, c) in counts.iter().enumerate() {
        let upper = if i + 1 == counts.len() {
            "inf".to_string()
        } else {
            (i + 1).to_string()
        };
        w.write_record([i.to_string(), upper, c.to_string()])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

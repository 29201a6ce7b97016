use std::fs;
use std::time::Instant;

use islp::catalog::{catalog, CatalogEntry};
use islp::solver::{solve, SolveReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, TraceLevel};
use crate::error::CliError;
use crate::output::{
    pivot_histogram, summary_table, write_histogram, write_json, write_pivots, write_text,
    write_trace, RunSummary,
};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TABLE_FILE: &str = "summary.txt";
pub const HISTOGRAM_FILE: &str = "pivots_per_iteration.csv";

#[derive(Debug, Serialize)]
struct Aggregate<'a> {
    mode: &'a str,
    runs: &'a [RunSummary],
    pivot_histogram: &'a [usize],
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summaries: Vec<RunSummary>,
    pub reports: Vec<SolveReport>,
}

fn select(problem: &str) -> Result<Vec<CatalogEntry>, CliError> {
    let all = catalog();
    if problem == "all" {
        return Ok(all);
    }
    let names = all.iter().map(|e| e.name().to_string()).collect::<Vec<_>>();
    all.into_iter()
        .find(|e| e.name() == problem)
        .map(|e| vec![e])
        .ok_or_else(|| CliError::UnknownProblem(problem.into(), names.join(", ")))
}

/// Solves the selected problems in parallel and writes per-problem files,
/// then the aggregate files once every solve has finished.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let entries = select(&config.problem)?;
    let solver = config.effective_solver();
    solver.validate()?;
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let results = entries
        .par_iter()
        .map(|entry| -> Result<(RunSummary, SolveReport), CliError> {
            let start = Instant::now();
            let report = solve(&entry.problem, &entry.x0, &solver)?;
            log::info!(
                "{}: {:?} after {} iterations, {} pivots in {:.3}s",
                entry.name(),
                report.status,
                report.iterations,
                report.pivots,
                start.elapsed().as_secs_f64()
            );
            let name = entry.name();
            if config.trace != TraceLevel::None {
                write_trace(&dir.join(format!("{name}.csv")), &report.trace)?;
            }
            if config.trace == TraceLevel::Pivot {
                write_pivots(&dir.join(format!("{name}.pivots.jsonl")), &report.trace)?;
            }
            let summary = RunSummary::new(&report, config.mode);
            write_json(&dir.join(format!("{name}.summary.json")), &summary)?;
            Ok((summary, report))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (summaries, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let histogram = pivot_histogram(&summaries);
    let mode = summaries.first().map_or("inexact", |s| s.mode.as_str());
    write_json(
        &dir.join(SUMMARY_FILE),
        &Aggregate {
            mode,
            runs: &summaries,
            pivot_histogram: &histogram,
        },
    )?;
    write_text(&dir.join(TABLE_FILE), &summary_table(&summaries))?;
    write_histogram(&dir.join(HISTOGRAM_FILE), &histogram)?;
    Ok(RunOutcome { summaries, reports })
}

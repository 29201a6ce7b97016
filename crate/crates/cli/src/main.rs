use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use islp_cli::{run, CliError, Mode, RunConfig, TraceLevel};

/// Runs the islp solver on catalog problems and writes traces and summaries.
#[derive(Debug, Parser)]
#[command(name = "islp", version)]
struct Args {
    /// Catalog problem name, or `all`.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    kkt_tol: Option<f64>,
    #[arg(long)]
    feas_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    max_pivots: Option<usize>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long, value_enum)]
    trace: Option<TraceLevel>,
    /// key = value settings applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn configure(args: Args) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        cfg.apply_file(&text)?;
    }
    if let Some(p) = args.problem {
        cfg.problem = p;
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(d) = args.out_dir {
        cfg.out_dir = d;
    }
    if let Some(t) = args.trace {
        cfg.trace = t;
    }
    let s = &mut cfg.solver;
    s.kkt_tol = args.kkt_tol.unwrap_or(s.kkt_tol);
    s.feas_tol = args.feas_tol.unwrap_or(s.feas_tol);
    s.max_iter = args.max_iter.unwrap_or(s.max_iter);
    s.max_pivots = args.max_pivots.unwrap_or(s.max_pivots);
    s.delta0 = args.delta0.unwrap_or(s.delta0);
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = configure(Args::parse()).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", islp_cli::output::summary_table(&outcome.summaries));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status() as u8)
        }
    }
}

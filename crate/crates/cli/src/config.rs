//! Run settings. Precedence: defaults, then a key=value file, then flags.

use std::path::PathBuf;
use std::str::FromStr;

use islp::solver::SolverConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Inexact,
    /// Subproblems are solved to LP optimality before they may exit.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum TraceLevel {
    /// Summaries only.
    None,
    /// One CSV row per outer iteration.
    #[default]
    Iter,
    /// Iteration CSV plus one JSON line per subproblem iterate.
    Pivot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// A catalog name, or `all`.
    pub problem: String,
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub trace: TraceLevel,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "all".into(),
            mode: Mode::Inexact,
            out_dir: PathBuf::from("out"),
            trace: TraceLevel::Iter,
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    /// Solver settings with the mode applied.
    pub fn effective_solver(&self) -> SolverConfig {
        let cfg = SolverConfig {
            record_pivots: self.trace == TraceLevel::Pivot,
            ..self.solver
        };
        match self.mode {
            Mode::Inexact => cfg,
            Mode::Exact => cfg.exact(),
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value.parse().map_err(|_| CliError::InvalidValue {
                key: key.into(),
                value: value.into(),
            })
        }
        fn choice<T: clap::ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
            T::from_str(value, true).map_err(|_| CliError::InvalidValue {
                key: key.into(),
                value: value.into(),
            })
        }
        let s = &mut self.solver;
        let c = &mut s.control;
        match key {
            "problem" => self.problem = value.into(),
            "mode" => self.mode = choice(key, value)?,
            "trace" => self.trace = choice(key, value)?,
            "out_dir" => self.out_dir = value.into(),
            "rho0" => s.rho0 = num(key, value)?,
            "beta_alpha" => s.beta_alpha = num(key, value)?,
            "theta_alpha" => s.theta_alpha = num(key, value)?,
            "delta0" => s.delta0 = num(key, value)?,
            "delta_min" => s.delta_min = num(key, value)?,
            "delta_max" => s.delta_max = num(key, value)?,
            "sigma_hi" => s.sigma_hi = num(key, value)?,
            "sigma_lo" => s.sigma_lo = num(key, value)?,
            "max_iter" => s.max_iter = num(key, value)?,
            "max_pivots" => s.max_pivots = num(key, value)?,
            "max_backtracks" => s.max_backtracks = num(key, value)?,
            "kkt_tol" => s.kkt_tol = num(key, value)?,
            "feas_tol" => s.feas_tol = num(key, value)?,
            "pivot_tol" => s.pivot_tol = num(key, value)?,
            "beta_v" => c.beta_v = num(key, value)?,
            "beta_phi" => c.beta_phi = num(key, value)?,
            "beta_l" => c.beta_l = num(key, value)?,
            "theta_rho" => c.theta_rho = num(key, value)?,
            "gamma0" => c.gamma0 = num(key, value)?,
            "theta_gamma" => c.theta_gamma = num(key, value)?,
            "rho_min" => c.rho_min = num(key, value)?,
            _ => return Err(CliError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies every setting of a key=value file. `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config {
                    line: i + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }
}

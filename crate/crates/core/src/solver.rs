//! Outer loop: subproblem, penalty safeguard, Armijo line search on the
//! penalty function, trust-radius update and termination tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvaluationError, Result};
use crate::lp::{
    project_duals, solve_subproblem, PivotRecord, StandardLp, SubproblemConfig, SubproblemResult,
    Termination,
};
use crate::merit::{
    complementarity_residual, kkt_residual_fea, kkt_residual_opt, model_reduction, penalty,
    relative_kkt, violation, violation_of, TrustNorm,
};
use crate::penalty::{next_gamma, psst, psst_slack, ControlParams, Ratios};
use crate::problem::{dot, Evaluation, PointValues, Problem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub control: ControlParams,
    pub rho0: f64,
    pub beta_alpha: f64,
    pub theta_alpha: f64,
    pub delta0: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Expand the radius when the trust ratio exceeds this.
    pub sigma_hi: f64,
    /// Shrink the radius when the trust ratio falls below this.
    pub sigma_lo: f64,
    pub max_iter: usize,
    pub max_pivots: usize,
    pub max_backtracks: usize,
    pub kkt_tol: f64,
    pub feas_tol: f64,
    pub pivot_tol: f64,
    /// Solve every subproblem to LP optimality.
    pub exact: bool,
    pub record_pivots: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            control: ControlParams::default(),
            rho0: 1.0,
            beta_alpha: 1e-4,
            theta_alpha: 0.5,
            delta0: 1.0,
            delta_min: 1e-4,
            delta_max: 64.0,
            sigma_hi: 0.75,
            sigma_lo: 0.3,
            max_iter: 1024,
            max_pivots: 100,
            max_backtracks: 60,
            kkt_tol: 1e-4,
            feas_tol: 1e-4,
            pivot_tol: crate::lp::tableau::DEFAULT_PIVOT_TOL,
            exact: false,
            record_pivots: false,
        }
    }
}

/// Penalty ratio threshold used by exact mode.
pub const EXACT_BETA_PHI: f64 = 1.0 - 1e-8;

impl SolverConfig {
    /// Same settings with subproblems solved to optimality.
    pub fn exact(mut self) -> Self {
        self.exact = true;
        self
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.rho0 > 0.0) {
            return bad("rho0 must be positive");
        }
        if !(0.0 < self.beta_alpha && self.beta_alpha < 1.0) {
            return bad("beta_alpha must lie in (0, 1)");
        }
        if !(0.0 < self.theta_alpha && self.theta_alpha < 1.0) {
            return bad("theta_alpha must lie in (0, 1)");
        }
        if !(0.0 < self.sigma_lo && self.sigma_lo < self.sigma_hi && self.sigma_hi < 1.0) {
            return bad("need 0 < sigma_lo < sigma_hi < 1");
        }
        if !(0.0 < self.delta_min && self.delta_min < self.delta_max) {
            return bad("need 0 < delta_min < delta_max");
        }
        if !(self.delta_min <= self.delta0 && self.delta0 <= self.delta_max) {
            return bad("delta0 must lie in [delta_min, delta_max]");
        }
        if !(self.kkt_tol > 0.0 && self.feas_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_pivots == 0 {
            return bad("max_pivots must be positive");
        }
        Ok(())
    }

    pub fn subproblem_config(&self) -> SubproblemConfig {
        let mut control = self.control;
        if self.exact {
            control.beta_phi = EXACT_BETA_PHI;
        }
        SubproblemConfig {
            control,
            max_pivots: self.max_pivots,
            pivot_tol: self.pivot_tol,
            require_lp_optimal: self.exact,
            record_pivots: self.record_pivots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepType {
    Accepted,
    NullStep,
    /// Final certificate; no step is taken.
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub v: f64,
    /// Penalty parameter after the post-solve safeguard.
    pub rho: f64,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    /// `Delta l(d; rho)`
    pub dl_opt: f64,
    /// `Delta l(d; 0)`
    pub dl_fea: f64,
    pub pivots: usize,
    pub e_opt: f64,
    pub e_fea: f64,
    pub e_c: f64,
    pub kkt: f64,
    pub step_type: StepType,
    pub rho_prev: f64,
    /// Penalty parameter returned by the subproblem.
    pub rho_tilde: f64,
    pub dust_reductions: usize,
    pub grad_norm: f64,
    pub kappa0: f64,
    pub d: Vec<f64>,
    pub sigma: Option<f64>,
    /// `phi(x) - phi(x + alpha d) - beta_alpha alpha Delta l` for accepted steps.
    pub armijo_slack: Option<f64>,
    pub psst_slack: f64,
    pub ratios: Ratios,
    pub termination: Termination,
    #[serde(skip)]
    pub pivot_history: Vec<PivotRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    KktSuccess,
    InfeasibleStationary,
    IterLimit,
    Stalled,
}

impl SolveStatus {
    /// Summary flag: 1 success, -1 iteration limit, -2 infeasible or stalled.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::KktSuccess => 1,
            SolveStatus::IterLimit => -1,
            SolveStatus::InfeasibleStationary | SolveStatus::Stalled => -2,
        }
    }
}

/// Residual normalizers taken at the starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialResiduals {
    pub e_opt: f64,
    pub e_fea: f64,
    pub e_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub problem: String,
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub f: f64,
    pub v: f64,
    pub rho: f64,
    pub kkt: f64,
    pub trace: Vec<IterationRecord>,
    pub iterations: usize,
    pub pivots: usize,
    pub f_evals: usize,
    pub initial: InitialResiduals,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub values: PointValues,
    /// Function evaluations spent, including the accepted one.
    pub trials: usize,
}

fn phi_at(
    problem: &Problem,
    x: &[f64],
    rho: f64,
) -> std::result::Result<(f64, PointValues), EvaluationError> {
    let values = problem.evaluate_values(x)?;
    let v = violation_of(&values.b, &problem.kinds());
    Ok((penalty(values.f, v, rho), values))
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    problem: &Problem,
    x: &[f64],
    d: &[f64],
    rho: f64,
    phi0: f64,
    delta_l: f64,
    config: &SolverConfig,
    first: usize,
) -> Result<LineSearchOutcome> {
    let mut trials = 0;
    for t in first..=config.max_backtracks {
        let alpha = config.theta_alpha.powi(t as i32);
        let x_new = axpy(x, alpha, d);
        trials += 1;
        // Points where the functions are undefined count as rejections.
        let Ok((phi, values)) = phi_at(problem, &x_new, rho) else {
            continue;
        };
        if phi0 - phi >= config.beta_alpha * alpha * delta_l {
            return Ok(LineSearchOutcome {
                alpha,
                x: x_new,
                values,
                trials,
            });
        }
    }
    Err(Error::LineSearchFailure { trials })
}

/// Armijo backtracking on `phi(.; rho)` over `alpha in {1, theta, theta^2, ...}`.
pub fn line_search(
    problem: &Problem,
    x: &[f64],
    d: &[f64],
    rho: f64,
    delta_l: f64,
    config: &SolverConfig,
) -> Result<LineSearchOutcome> {
    assert!(delta_l >= 0.0);
    let (phi0, _) = phi_at(problem, x, rho)?;
    backtrack(problem, x, d, rho, phi0, delta_l, config, 0)
}

/// Actual over predicted reduction of the penalty function.
pub fn trust_ratio(phi_before: f64, phi_after: f64, delta_l: f64) -> f64 {
    assert!(delta_l > 0.0);
    (phi_before - phi_after) / delta_l
}

pub fn trust_update(delta: f64, sigma: f64, config: &SolverConfig) -> f64 {
    if sigma > config.sigma_hi {
        (2.0 * delta).min(config.delta_max)
    } else if sigma < config.sigma_lo {
        (0.5 * delta).max(config.delta_min)
    } else {
        delta
    }
}

struct Residuals {
    e_opt: f64,
    e_fea: f64,
    e_c: f64,
    e_c_fea: f64,
}

fn residuals(eval: &Evaluation, sub: &SubproblemResult) -> Result<Residuals> {
    let norm = TrustNorm::Infinity;
    Ok(Residuals {
        e_opt: kkt_residual_opt(eval, &sub.lambda, sub.rho_tilde, norm)?,
        e_fea: kkt_residual_fea(eval, &sub.nu, norm)?,
        e_c: complementarity_residual(eval, &sub.lambda)?,
        e_c_fea: complementarity_residual(eval, &sub.nu)?,
    })
}

/// Multipliers of the feasibility LP at the start, solved to optimality.
fn seed(eval: &Evaluation, config: &SolverConfig) -> Result<(Vec<f64>, InitialResiduals, usize)> {
    let lp = StandardLp::build(eval, 0.0, config.delta0);
    let mut tab = lp.initial_tableau(config.pivot_tol)?;
    let limit = 50 * lp.layout.num_rows().max(config.max_pivots);
    tab.solve(limit)?;
    let lambda = project_duals(&lp.extract_duals(&tab), &eval.kinds);
    let norm = TrustNorm::Infinity;
    let initial = InitialResiduals {
        e_opt: kkt_residual_opt(eval, &lambda, config.rho0, norm)?,
        e_fea: kkt_residual_fea(eval, &lambda, norm)?,
        e_c: complementarity_residual(eval, &lambda)?,
    };
    Ok((lambda, initial, tab.pivots()))
}

/// Mutable state of one run.
struct Run<'a> {
    problem: &'a Problem,
    x: Vec<f64>,
    values: PointValues,
    rho: f64,
    kkt: f64,
    trace: Vec<IterationRecord>,
    pivots: usize,
    f_evals: usize,
    initial: InitialResiduals,
}

impl Run<'_> {
    fn finish(self, status: SolveStatus, diagnostic: Option<String>) -> SolveReport {
        let iterations = self
            .trace
            .iter()
            .filter(|r| r.step_type != StepType::Terminal)
            .count();
        SolveReport {
            problem: self.problem.name().to_string(),
            status,
            f: self.values.f,
            v: violation_of(&self.values.b, &self.problem.kinds()),
            x: self.x,
            rho: self.rho,
            kkt: self.kkt,
            trace: self.trace,
            iterations,
            pivots: self.pivots,
            f_evals: self.f_evals,
            initial: self.initial,
            diagnostic,
        }
    }
}

pub fn solve(problem: &Problem, x0: &[f64], config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let sub_cfg = config.subproblem_config();
    let ctrl = &config.control;
    let norm = TrustNorm::Infinity;
    let kappa0 = norm.kappa0(problem.dim());

    let values = problem.evaluate_values(x0)?;
    let first = problem.complete(x0, values.clone())?;
    let (mut lambda_prev, initial, seed_pivots) = seed(&first, config)?;
    let mut run = Run {
        problem,
        x: x0.to_vec(),
        values,
        rho: config.rho0,
        kkt: f64::INFINITY,
        trace: Vec::new(),
        pivots: seed_pivots,
        f_evals: 1,
        initial,
    };
    let mut delta = config.delta0;

    for k in 0..config.max_iter {
        let gamma = next_gamma(k + 1, ctrl.gamma0, ctrl.theta_gamma);
        let eval = problem.complete(&run.x, run.values.clone())?;
        let v = violation(&eval);
        let rho_prev = run.rho;

        let mut delta_used = delta;
        let attempt =
            |delta| solve_subproblem(&eval, rho_prev, gamma, delta, Some(&lambda_prev), &sub_cfg);
        let solved = match attempt(delta_used) {
            Err(Error::SubproblemStalled { pivots }) => {
                run.pivots += pivots;
                delta_used = (0.5 * delta).max(config.delta_min);
                attempt(delta_used)
            }
            other => other,
        };
        let sub = match solved {
            Ok(sub) => sub,
            Err(e) => {
                if let Error::SubproblemStalled { pivots } = e {
                    run.pivots += pivots;
                }
                return Ok(run.finish(SolveStatus::Stalled, Some(format!("iteration {k}: {e}"))));
            }
        };
        run.pivots += sub.pivots;

        let mut d = sub.d.clone();
        if model_reduction(&eval, &d, 0.0) + gamma <= 0.0 {
            d.iter_mut().for_each(|di| *di = 0.0);
        }
        let dl_fea = model_reduction(&eval, &d, 0.0);
        let gd = dot(&eval.g, &d);
        let rho_k = psst(gd, dl_fea, gamma, sub.rho_tilde, ctrl.beta_l);
        let dl_opt = model_reduction(&eval, &d, rho_k);

        let res = residuals(&eval, &sub)?;
        let kkt = relative_kkt((res.e_opt, res.e_c), (initial.e_opt, initial.e_c));
        run.kkt = kkt;
        run.rho = rho_k;

        let mut record = IterationRecord {
            k,
            x: run.x.clone(),
            f: eval.f,
            v,
            rho: rho_k,
            gamma,
            delta: delta_used,
            alpha: 0.0,
            dl_opt,
            dl_fea,
            pivots: sub.pivots,
            e_opt: res.e_opt,
            e_fea: res.e_fea,
            e_c: res.e_c,
            kkt,
            step_type: StepType::Terminal,
            rho_prev,
            rho_tilde: sub.rho_tilde,
            dust_reductions: sub.dust_reductions,
            grad_norm: norm.dual_norm(&eval.g),
            kappa0,
            d: d.clone(),
            sigma: None,
            armijo_slack: None,
            psst_slack: psst_slack(gd, dl_fea, gamma, rho_k, ctrl.beta_l),
            ratios: sub.ratios,
            termination: sub.terminated_by,
            pivot_history: sub.history,
        };
        lambda_prev = sub.lambda;

        let status = if kkt < config.kkt_tol && v < config.feas_tol {
            Some(SolveStatus::KktSuccess)
        } else if rho_k <= ctrl.rho_min
            && v >= config.feas_tol
            && res.e_fea / initial.e_fea.max(1.0) < config.kkt_tol
            && res.e_c_fea < config.kkt_tol
        {
            Some(SolveStatus::InfeasibleStationary)
        } else {
            None
        };
        if let Some(status) = status {
            run.trace.push(record);
            return Ok(run.finish(status, None));
        }

        if dl_opt <= 0.0 || d.iter().all(|&di| di == 0.0) {
            record.step_type = StepType::NullStep;
            run.trace.push(record);
            continue;
        }

        let phi0 = penalty(eval.f, v, rho_k);
        let x_full = axpy(&run.x, 1.0, &d);
        run.f_evals += 1;
        let full = phi_at(problem, &x_full, rho_k).ok();
        let sigma = match &full {
            Some((phi, _)) => trust_ratio(phi0, *phi, dl_opt),
            None => f64::NEG_INFINITY,
        };
        // The ratio test at the full step doubles as the first Armijo trial.
        let step = match full {
            Some((_, values)) if sigma >= config.beta_alpha => Ok(LineSearchOutcome {
                alpha: 1.0,
                x: x_full,
                values,
                trials: 1,
            }),
            _ => backtrack(problem, &run.x, &d, rho_k, phi0, dl_opt, config, 1),
        };
        let step = match step {
            Ok(s) => s,
            Err(e) => {
                if let Error::LineSearchFailure { trials } = e {
                    run.f_evals += trials;
                }
                if v >= config.feas_tol && rho_k > ctrl.rho_min {
                    // The predicted decrease is lost in rounding away from
                    // feasibility: stay put and lower the penalty parameter.
                    record.step_type = StepType::NullStep;
                    run.trace.push(record);
                    run.rho = (ctrl.theta_rho * rho_k).max(ctrl.rho_min);
                    continue;
                }
                run.trace.push(record);
                return Ok(run.finish(SolveStatus::Stalled, Some(format!("iteration {k}: {e}"))));
            }
        };
        if step.alpha < 1.0 {
            run.f_evals += step.trials;
        }

        let phi_new = penalty(
            step.values.f,
            violation_of(&step.values.b, &problem.kinds()),
            rho_k,
        );
        record.step_type = StepType::Accepted;
        record.alpha = step.alpha;
        record.sigma = sigma.is_finite().then_some(sigma);
        record.armijo_slack = Some(phi0 - phi_new - config.beta_alpha * step.alpha * dl_opt);
        run.trace.push(record);

        delta = trust_update(delta_used, sigma, config);
        run.x = step.x;
        run.values = step.values;
    }

    Ok(run.finish(SolveStatus::IterLimit, None))
}

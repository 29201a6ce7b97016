//! Penalty parameter control: in-solve reduction, post-solve safeguard and
//! the relaxation schedule.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    pub beta_v: f64,
    pub beta_phi: f64,
    pub beta_l: f64,
    pub theta_rho: f64,
    pub gamma0: f64,
    pub theta_gamma: f64,
    pub rho_min: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            beta_v: 0.3,
            beta_phi: 0.75,
            beta_l: 0.135,
            theta_rho: 0.5,
            gamma0: 0.01,
            theta_gamma: 0.7,
            rho_min: 1e-12,
        }
    }
}

impl ControlParams {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(0.0 < self.beta_v && self.beta_v < self.beta_phi && self.beta_phi < 1.0) {
            return bad("need 0 < beta_v < beta_phi < 1");
        }
        if !(self.beta_l > 0.0 && self.beta_l <= self.beta_phi * (1.0 - self.beta_v)) {
            return bad("need 0 < beta_l <= beta_phi (1 - beta_v)");
        }
        if !(0.0 < self.theta_rho && self.theta_rho < 1.0) {
            return bad("theta_rho must lie in (0, 1)");
        }
        if !(0.0 < self.theta_gamma && self.theta_gamma < 1.0) {
            return bad("theta_gamma must lie in (0, 1)");
        }
        if !(self.gamma0 > 0.0) {
            return bad("gamma0 must be positive");
        }
        if !(self.rho_min > 0.0) {
            return bad("rho_min must be positive");
        }
        Ok(())
    }
}

/// Inexactness ratios of one primal-dual subproblem iterate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ratios {
    pub r_v: f64,
    pub r_phi: f64,
    pub r_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DustDecision {
    /// All three ratio tests hold.
    Terminate,
    /// Penalty and complementarity tests hold but feasibility fails: use the
    /// new, smaller penalty parameter.
    Reduce(f64),
    /// Keep iterating at the current penalty parameter.
    Continue,
    /// A reduction is due but `rho` already sits at `rho_min`.
    InfeasibilitySuspected,
}

pub fn dust_step(ratios: Ratios, rho: f64, params: &ControlParams) -> DustDecision {
    debug_assert!(rho > 0.0);
    let penalty_ok = ratios.r_phi >= params.beta_phi && ratios.r_c >= params.beta_v;
    if !penalty_ok {
        return DustDecision::Continue;
    }
    if ratios.r_v >= params.beta_v {
        return DustDecision::Terminate;
    }
    if rho <= params.rho_min {
        DustDecision::InfeasibilitySuspected
    } else {
        DustDecision::Reduce((params.theta_rho * rho).max(params.rho_min))
    }
}

/// Largest `rho <= rho_tilde` keeping
/// `Delta l(d; rho) + gamma >= beta_l (Delta l(d; 0) + gamma)`,
/// where `Delta l(d; rho) = Delta l(d; 0) - rho <grad f, d>`.
pub fn psst(grad_dot_d: f64, delta_l_fea: f64, gamma: f64, rho_tilde: f64, beta_l: f64) -> f64 {
    let base = delta_l_fea + gamma;
    if delta_l_fea - rho_tilde * grad_dot_d + gamma >= beta_l * base {
        rho_tilde
    } else {
        // Only reachable with grad_dot_d > 0.
        ((1.0 - beta_l) * base / grad_dot_d).min(rho_tilde)
    }
}

/// Slack of the post-solve reduction condition; nonnegative when it holds.
pub fn psst_slack(grad_dot_d: f64, delta_l_fea: f64, gamma: f64, rho: f64, beta_l: f64) -> f64 {
    delta_l_fea - rho * grad_dot_d + gamma - beta_l * (delta_l_fea + gamma)
}

/// `gamma_k = gamma0 theta_gamma^(k-1)` for `k >= 1`.
pub fn next_gamma(k: usize, gamma0: f64, theta_gamma: f64) -> f64 {
    assert!(k >= 1, "iterations are counted from 1");
    gamma0 * theta_gamma.powi((k - 1) as i32)
}

/// Inputs of the a-priori bounds on in-solve penalty reductions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionBoundInputs {
    pub gamma: f64,
    pub delta: f64,
    pub kappa0: f64,
    /// `||grad f(x)||` in the dual norm of the trust region.
    pub grad_norm: f64,
    /// Penalty parameter entering the subproblem.
    pub rho_prev: f64,
}

fn bound_core(inputs: &ReductionBoundInputs, params: &ControlParams) -> f64 {
    inputs.gamma / (inputs.kappa0.powi(2).max(1.0) * inputs.delta)
        * (1.0 - (params.beta_v / params.beta_phi).sqrt())
        / inputs.grad_norm
}

/// Maximum number of in-solve reductions for one subproblem (`<= 0` means
/// none can happen). Requires a nonzero gradient.
pub fn dust_reduction_bound(inputs: &ReductionBoundInputs, params: &ControlParams) -> i64 {
    assert!(inputs.grad_norm > 0.0);
    let arg = bound_core(inputs, params) / inputs.rho_prev;
    (arg.ln() / params.theta_rho.ln()).ceil() as i64
}

/// Lower bound on the penalty parameter returned by one subproblem.
pub fn rho_lower_bound(inputs: &ReductionBoundInputs, params: &ControlParams) -> f64 {
    assert!(inputs.grad_norm > 0.0);
    inputs
        .rho_prev
        .min(params.theta_rho * bound_core(inputs, params))
}

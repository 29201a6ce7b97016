//! Scalar machinery of the l1 penalty framework.
//!
//! Everything here is a pure function of an [`Evaluation`] and a few scalars.
//! The trust region is the l-infinity ball, so every "dual norm" below is
//! the l1 norm.

use crate::error::{Error, Result};
use crate::problem::{dot, ConstraintKind, Evaluation};

/// `|b| <= ZERO_TOL` is classified as an active constraint (`c_i(x) = 0`).
pub const ZERO_TOL: f64 = 1e-12;

/// Trust-region norm. Only the polyhedral l-infinity ball is supported since
/// the subproblem solver is a simplex method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrustNorm {
    #[default]
    Infinity,
}

impl TrustNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            TrustNorm::Infinity => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn dual_norm(self, v: &[f64]) -> f64 {
        match self {
            TrustNorm::Infinity => v.iter().map(|x| x.abs()).sum(),
        }
    }

    /// Constant with `||x||_2 <= kappa0 ||x||` on `R^n`.
    pub fn kappa0(self, n: usize) -> f64 {
        match self {
            TrustNorm::Infinity => (n as f64).sqrt(),
        }
    }
}

/// Penalty parameter, relaxation error and trust radius of one subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub rho: f64,
    pub gamma: f64,
    pub delta: f64,
    pub norm: TrustNorm,
}

/// `v_i(z)`: `|z|` for equalities, `max(z, 0)` for inequalities.
pub fn violation_term(z: f64, kind: ConstraintKind) -> f64 {
    match kind {
        ConstraintKind::Equality => z.abs(),
        ConstraintKind::Inequality => z.max(0.0),
    }
}

fn total_violation(values: &[f64], kinds: &[ConstraintKind]) -> f64 {
    values
        .iter()
        .zip(kinds)
        .map(|(z, k)| violation_term(*z, *k))
        .sum()
}

/// Aggregate constraint violation `v(x)`.
pub fn violation(eval: &Evaluation) -> f64 {
    total_violation(&eval.b, &eval.kinds)
}

/// Same as [`violation`] for bare constraint values.
pub fn violation_of(b: &[f64], kinds: &[ConstraintKind]) -> f64 {
    total_violation(b, kinds)
}

/// Closed interval `[lo, hi]`; a singleton when `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(self.lo, self.hi)
    }
}

/// Subdifferential of `v_i` at `b_i`.
pub fn violation_subgradient_interval(b: f64, kind: ConstraintKind) -> Interval {
    let (lo, hi) = if b > ZERO_TOL {
        (1.0, 1.0)
    } else if b < -ZERO_TOL {
        match kind {
            ConstraintKind::Equality => (-1.0, -1.0),
            ConstraintKind::Inequality => (0.0, 0.0),
        }
    } else {
        match kind {
            ConstraintKind::Equality => (-1.0, 1.0),
            ConstraintKind::Inequality => (0.0, 1.0),
        }
    };
    Interval { lo, hi }
}

/// Box a multiplier must lie in to be dual feasible.
pub fn dual_box(kind: ConstraintKind) -> Interval {
    match kind {
        ConstraintKind::Equality => Interval { lo: -1.0, hi: 1.0 },
        ConstraintKind::Inequality => Interval { lo: 0.0, hi: 1.0 },
    }
}

pub fn check_dual_feasible(kinds: &[ConstraintKind], lambda: &[f64]) -> Result<()> {
    assert_eq!(kinds.len(), lambda.len(), "one multiplier per constraint");
    for (index, (k, l)) in kinds.iter().zip(lambda).enumerate() {
        if !dual_box(*k).contains(*l) {
            return Err(Error::DualInfeasible { index, value: *l });
        }
    }
    Ok(())
}

/// `phi(x; rho) = rho f(x) + v(x)`.
pub fn penalty(f: f64, v: f64, rho: f64) -> f64 {
    rho * f + v
}

/// `l(d; rho) = rho <g, d> + sum_i v_i(b_i + <a_i, d>)`.
pub fn linear_model(eval: &Evaluation, d: &[f64], rho: f64) -> f64 {
    let lin = eval.linearized(d);
    rho * dot(&eval.g, d) + total_violation(&lin, &eval.kinds)
}

/// `Delta l(d; rho) = l(0; rho) - l(d; rho)`.
pub fn model_reduction(eval: &Evaluation, d: &[f64], rho: f64) -> f64 {
    violation(eval) - linear_model(eval, d, rho)
}

/// Dual objective without the feasibility check on `lambda`.
pub(crate) fn dual_value_unchecked(
    eval: &Evaluation,
    lambda: &[f64],
    rho: f64,
    delta: f64,
    norm: TrustNorm,
) -> f64 {
    let mut w = eval.jacobian_transpose_times(lambda);
    for (wi, gi) in w.iter_mut().zip(&eval.g) {
        *wi += rho * gi;
    }
    -delta * norm.dual_norm(&w) + dot(&eval.b, lambda)
}

/// `p(lambda; rho) = -delta ||rho g + A^T lambda||_* + <b, lambda>`.
pub fn dual_value(
    eval: &Evaluation,
    lambda: &[f64],
    rho: f64,
    delta: f64,
    norm: TrustNorm,
) -> Result<f64> {
    check_dual_feasible(&eval.kinds, lambda)?;
    Ok(dual_value_unchecked(eval, lambda, rho, delta, norm))
}

/// Complementarity measure `chi(d, lambda)` over the linearized constraints.
///
/// Sign classification of `b_i + <a_i, d>` uses a strict comparison with zero,
/// so exactly-satisfied linearizations drop out.
pub fn complementarity_measure(eval: &Evaluation, d: &[f64], lambda: &[f64]) -> f64 {
    eval.linearized(d)
        .iter()
        .zip(&eval.kinds)
        .zip(lambda)
        .map(|((&z, &kind), &l)| {
            let vi = violation_term(z, kind);
            if z > 0.0 {
                (1.0 - l) * vi
            } else if z < 0.0 && kind == ConstraintKind::Equality {
                (1.0 + l) * vi
            } else {
                0.0
            }
        })
        .sum()
}

/// `E_opt = ||rho g + A^T lambda||_*`.
pub fn kkt_residual_opt(
    eval: &Evaluation,
    lambda: &[f64],
    rho: f64,
    norm: TrustNorm,
) -> Result<f64> {
    check_dual_feasible(&eval.kinds, lambda)?;
    let mut w = eval.jacobian_transpose_times(lambda);
    for (wi, gi) in w.iter_mut().zip(&eval.g) {
        *wi += rho * gi;
    }
    Ok(norm.dual_norm(&w))
}

/// `E_fea = ||A^T nu||_*`.
pub fn kkt_residual_fea(eval: &Evaluation, nu: &[f64], norm: TrustNorm) -> Result<f64> {
    check_dual_feasible(&eval.kinds, nu)?;
    Ok(norm.dual_norm(&eval.jacobian_transpose_times(nu)))
}

/// Complementarity residual `E_c(x, lambda)`; equals `v(x) - <lambda, b>`
/// up to the `ZERO_TOL` classification of active constraints.
pub fn complementarity_residual(eval: &Evaluation, lambda: &[f64]) -> Result<f64> {
    check_dual_feasible(&eval.kinds, lambda)?;
    Ok(eval
        .b
        .iter()
        .zip(&eval.kinds)
        .zip(lambda)
        .map(|((&b, &kind), &l)| {
            if b > ZERO_TOL {
                (1.0 - l) * violation_term(b, kind)
            } else if b < -ZERO_TOL {
                match kind {
                    ConstraintKind::Equality => (1.0 + l) * b.abs(),
                    ConstraintKind::Inequality => l * b.abs(),
                }
            } else {
                0.0
            }
        })
        .sum())
}

/// `max(E_opt, E_c) / max(1, E_opt0, E_c0)`.
pub fn relative_kkt(current: (f64, f64), initial: (f64, f64)) -> f64 {
    current.0.max(current.1) / 1f64.max(initial.0).max(initial.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ConstraintKind::{Equality as Eq, Inequality as In};

    fn eval(g: Vec<f64>, rows: Vec<(Vec<f64>, f64, ConstraintKind)>) -> Evaluation {
        let n = g.len();
        Evaluation {
            x: vec![0.0; n],
            f: 0.0,
            g,
            b: rows.iter().map(|r| r.1).collect(),
            jacobian: rows.iter().map(|r| r.0.clone()).collect(),
            kinds: rows.iter().map(|r| r.2).collect(),
        }
    }

    #[test]
    fn violation_examples() {
        let e = eval(vec![0.0], vec![(vec![0.0], 0.0, Eq), (vec![0.0], -1.0, In)]);
        assert_eq!(violation(&e), 0.0);
        let e = eval(
            vec![0.0],
            vec![
                (vec![0.0], 2.0, Eq),
                (vec![0.0], -3.0, Eq),
                (vec![0.0], 1.0, In),
                (vec![0.0], -1.0, In),
            ],
        );
        assert_eq!(violation(&e), 6.0);
    }

    #[test]
    fn violation_hs6_origin() {
        // c1 = 10 (x2 - x1^2) vanishes at the origin.
        let e = eval(vec![-2.0, 0.0], vec![(vec![0.0, 10.0], 0.0, Eq)]);
        assert_eq!(violation(&e), 0.0);
    }

    #[test]
    fn subgradient_intervals() {
        assert_eq!(
            violation_subgradient_interval(0.0, Eq),
            Interval { lo: -1.0, hi: 1.0 }
        );
        assert_eq!(
            violation_subgradient_interval(0.0, In),
            Interval { lo: 0.0, hi: 1.0 }
        );
        assert_eq!(
            violation_subgradient_interval(-2.0, In),
            Interval { lo: 0.0, hi: 0.0 }
        );
        assert_eq!(
            violation_subgradient_interval(-2.0, Eq),
            Interval { lo: -1.0, hi: -1.0 }
        );
        assert_eq!(
            violation_subgradient_interval(3.0, Eq),
            Interval { lo: 1.0, hi: 1.0 }
        );
        assert_eq!(
            violation_subgradient_interval(1e-13, In),
            Interval { lo: 0.0, hi: 1.0 }
        );
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty(5.0, 0.0, 1.0), 5.0);
        assert_eq!(penalty(5.0, 2.0, 0.0), 2.0);
        assert_eq!(penalty(-1.0, 3.0, 0.5), 2.5);
    }

    #[test]
    fn linear_model_examples() {
        let e = eval(vec![1.0], vec![(vec![1.0], 1.0, Eq)]);
        for rho in [0.0, 0.3, 7.0] {
            assert_eq!(linear_model(&e, &[0.0], rho), violation(&e));
        }
        assert_eq!(linear_model(&e, &[-1.0], 1.0), -1.0);
        let e2 = eval(vec![2.0], vec![(vec![1.0], -2.0, In)]);
        assert_eq!(linear_model(&e2, &[1.0], 1.0), 2.0);
    }

    #[test]
    fn model_reduction_examples() {
        let e = eval(vec![1.0], vec![(vec![1.0], 1.0, Eq)]);
        assert_eq!(model_reduction(&e, &[0.0], 1.0), 0.0);
        assert_eq!(model_reduction(&e, &[-1.0], 1.0), 2.0);
        assert_eq!(
            model_reduction(&e, &[-0.37], 0.9),
            model_reduction(&e, &[-0.37], 0.9)
        );
    }

    #[test]
    fn dual_value_examples() {
        let e = eval(vec![1.0], vec![(vec![1.0], 1.0, Eq)]);
        let n = TrustNorm::Infinity;
        assert_eq!(dual_value(&e, &[-1.0], 1.0, 1.0, n).unwrap(), -1.0);
        let e2 = eval(vec![1.0, -2.0], vec![(vec![3.0, 1.0], 4.0, In)]);
        assert_eq!(
            dual_value(&e2, &[0.0], 0.5, 2.0, n).unwrap(),
            -2.0 * 0.5 * 3.0
        );
        // weak duality at the worked point
        assert!(dual_value(&e, &[-1.0], 1.0, 1.0, n).unwrap() <= linear_model(&e, &[-1.0], 1.0));
    }

    #[test]
    fn dual_value_rejects_infeasible_multipliers() {
        let e = eval(vec![1.0], vec![(vec![1.0], 1.0, In)]);
        assert_eq!(
            dual_value(&e, &[-0.5], 1.0, 1.0, TrustNorm::Infinity),
            Err(Error::DualInfeasible {
                index: 0,
                value: -0.5
            })
        );
    }

    #[test]
    fn complementarity_measure_examples() {
        let e = eval(vec![1.0], vec![(vec![1.0], 1.0, Eq)]);
        assert_eq!(complementarity_measure(&e, &[-1.0], &[0.3]), 0.0);
        assert_eq!(complementarity_measure(&e, &[0.0], &[1.0]), 0.0);
        assert_eq!(complementarity_measure(&e, &[0.0], &[0.0]), 1.0);
    }

    #[test]
    fn residuals_at_kkt_point() {
        // min x1 s.t. x1 = 0 at the solution: rho g + lambda a = 0 with lambda = -rho.
        let e = eval(vec![1.0, 0.0], vec![(vec![1.0, 0.0], 0.0, Eq)]);
        let n = TrustNorm::Infinity;
        assert_eq!(kkt_residual_opt(&e, &[-0.5], 0.5, n).unwrap(), 0.0);
        assert_eq!(complementarity_residual(&e, &[-0.5]).unwrap(), 0.0);
        assert_eq!(violation(&e), 0.0);
    }

    #[test]
    fn infeasible_stationary_residual() {
        // min x s.t. x^2 + 1 <= 0, at x = 0: a = 2x = 0, b = 1.
        let e = eval(vec![1.0], vec![(vec![0.0], 1.0, In)]);
        let n = TrustNorm::Infinity;
        assert_eq!(kkt_residual_fea(&e, &[1.0], n).unwrap(), 0.0);
        assert_eq!(violation(&e), 1.0);
        assert_eq!(complementarity_residual(&e, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn residuals_reject_infeasible_multipliers() {
        let e = eval(vec![1.0], vec![(vec![1.0], 1.0, Eq)]);
        assert!(kkt_residual_opt(&e, &[1.5], 1.0, TrustNorm::Infinity).is_err());
        assert!(kkt_residual_fea(&e, &[-1.5], TrustNorm::Infinity).is_err());
        assert!(complementarity_residual(&e, &[2.0]).is_err());
    }

    #[test]
    fn relative_kkt_examples() {
        assert_eq!(relative_kkt((0.0, 0.0), (3.0, 2.0)), 0.0);
        assert_eq!(relative_kkt((2.0, 1.0), (4.0, 0.0)), 0.5);
        assert_eq!(relative_kkt((0.25, 0.5), (0.1, 0.2)), 0.5);
    }

    #[test]
    fn kappa0_bounds_euclidean_norm() {
        let v = [3.0, -4.0, 1.0];
        let n = TrustNorm::Infinity;
        let two = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(two <= n.kappa0(3) * n.norm(&v));
    }
}

//! Inexact solution of the penalty subproblem by primal simplex, with the
//! penalty parameter reduced on the fly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merit::{
    complementarity_measure, dual_value_unchecked, linear_model, violation, TrustNorm,
};
use crate::penalty::{dust_step, ControlParams, DustDecision, Ratios};
use crate::problem::Evaluation;

use super::standard_form::{project_duals, StandardLp};
use super::tableau::{PivotOutcome, DEFAULT_PIVOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemConfig {
    pub control: ControlParams,
    /// Pivot budget per subproblem.
    pub max_pivots: usize,
    pub pivot_tol: f64,
    /// Only allow the ratio exit once the LP is optimal at the current penalty.
    pub require_lp_optimal: bool,
    /// Keep a [`PivotRecord`] for every iterate.
    pub record_pivots: bool,
}

impl Default for SubproblemConfig {
    fn default() -> Self {
        Self {
            control: ControlParams::default(),
            max_pivots: 100,
            pivot_tol: DEFAULT_PIVOT_TOL,
            require_lp_optimal: false,
            record_pivots: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    RatiosSatisfied,
    LpOptimal,
    PivotLimit,
}

/// Primal and dual quantities of one subproblem iterate `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotRecord {
    pub j: usize,
    pub pivots: usize,
    pub rho: f64,
    /// `l(d; rho)`
    pub model_rho: f64,
    /// `l(d; 0)`
    pub model_zero: f64,
    /// `p(lambda; rho)`
    pub dual_lambda_rho: f64,
    /// `p(lambda; 0)`
    pub dual_lambda_zero: f64,
    /// `p(nu; 0)`
    pub dual_nu_zero: f64,
    pub chi: f64,
    pub ratios: Ratios,
    pub step_inf_norm: f64,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemResult {
    pub d: Vec<f64>,
    /// Projected penalty multipliers of the accepted iterate.
    pub lambda: Vec<f64>,
    /// Best feasibility multipliers seen (largest `p(.; 0)`).
    pub nu: Vec<f64>,
    /// Multipliers the solve started from.
    pub lambda0: Vec<f64>,
    pub rho_in: f64,
    pub rho_tilde: f64,
    pub pivots: usize,
    pub ratios: Ratios,
    pub dust_reductions: usize,
    pub terminated_by: Termination,
    /// A reduction was requested with `rho` already at its floor.
    pub infeasibility_suspected: bool,
    /// Times the tableau was reset to the zero step after an objective swap.
    pub restarts: usize,
    pub history: Vec<PivotRecord>,
}

impl SubproblemResult {
    pub fn is_null_step(&self) -> bool {
        self.d.iter().all(|&x| x == 0.0)
    }
}

/// `(r_v, r_phi, r_c)` for the iterate `(d, lambda, nu)`.
pub fn ratios(
    eval: &Evaluation,
    d: &[f64],
    lambda: &[f64],
    nu: &[f64],
    rho: f64,
    gamma: f64,
    delta: f64,
) -> Ratios {
    assert!(gamma > 0.0);
    let norm = TrustNorm::Infinity;
    let l0_gamma = violation(eval) + gamma;
    let p_nu = dual_value_unchecked(eval, nu, 0.0, delta, norm).max(0.0);
    let p_lambda = dual_value_unchecked(eval, lambda, rho, delta, norm);
    let chi = complementarity_measure(eval, d, lambda);
    Ratios {
        r_v: (l0_gamma - linear_model(eval, d, 0.0)) / (l0_gamma - p_nu),
        r_phi: (l0_gamma - linear_model(eval, d, rho)) / (l0_gamma - p_lambda),
        r_c: 1.0 - (chi / l0_gamma).sqrt(),
    }
}

/// Runs the simplex method on the trust-region subproblem until the
/// inexactness ratios accept the current iterate.
///
/// `lambda0` seeds the multiplier estimates before the first pivot; it is
/// ignored when its length does not match the constraint count.
pub fn solve_subproblem(
    eval: &Evaluation,
    rho_in: f64,
    gamma: f64,
    delta: f64,
    lambda0: Option<&[f64]>,
    cfg: &SubproblemConfig,
) -> Result<SubproblemResult> {
    assert!(rho_in > 0.0 && gamma > 0.0 && delta > 0.0);
    let norm = TrustNorm::Infinity;
    let ctrl = &cfg.control;
    let m = eval.num_constraints();
    let n = eval.dim();
    let l0 = violation(eval);

    let lambda0 = match lambda0 {
        Some(l) if l.len() == m => project_duals(l, &eval.kinds),
        _ => vec![0.0; m],
    };
    let p0 = |l: &[f64]| dual_value_unchecked(eval, l, 0.0, delta, norm);

    let mut rho = rho_in;
    let mut lp = StandardLp::build(eval, rho, delta);
    let mut tab = lp.initial_tableau(cfg.pivot_tol)?;

    let mut d = vec![0.0; n];
    let mut lambda = lambda0.clone();
    let mut nu = lambda0.clone();
    let mut p_nu = p0(&nu);
    // Whether (d, lambda) were read off the tableau at the current rho.
    let mut from_tableau = false;

    let mut pivots = 0;
    let mut reductions = 0;
    let mut restarts = 0;
    let mut suspected = false;
    let mut history = Vec::new();
    let mut j = 0;

    loop {
        let p_lambda = p0(&lambda);
        if p_lambda > p_nu {
            nu.clone_from(&lambda);
            p_nu = p_lambda;
        }
        let r = ratios(eval, &d, &lambda, &nu, rho, gamma, delta);
        if cfg.record_pivots {
            history.push(PivotRecord {
                j,
                pivots,
                rho,
                model_rho: linear_model(eval, &d, rho),
                model_zero: linear_model(eval, &d, 0.0),
                dual_lambda_rho: dual_value_unchecked(eval, &lambda, rho, delta, norm),
                dual_lambda_zero: p_lambda,
                dual_nu_zero: p_nu,
                chi: complementarity_measure(eval, &d, &lambda),
                ratios: r,
                step_inf_norm: norm.norm(&d),
                lambda: lambda.clone(),
            });
        }
        j += 1;

        let lp_optimal = from_tableau && tab.is_optimal();
        macro_rules! finish {
            ($how:expr) => {
                return Ok(SubproblemResult {
                    d,
                    lambda,
                    nu,
                    lambda0,
                    rho_in,
                    rho_tilde: rho,
                    pivots,
                    ratios: r,
                    dust_reductions: reductions,
                    terminated_by: $how,
                    infeasibility_suspected: suspected,
                    restarts,
                    history,
                })
            };
        }

        // At an optimal vertex the duality gap is zero; the computed ratio
        // only carries cancellation error once gamma is tiny.
        let tested = if lp_optimal && cfg.require_lp_optimal {
            Ratios {
                r_phi: r.r_phi.max(1.0),
                ..r
            }
        } else {
            r
        };
        match dust_step(tested, rho, ctrl) {
            DustDecision::Terminate if !cfg.require_lp_optimal || lp_optimal => {
                let how = if lp_optimal {
                    Termination::LpOptimal
                } else {
                    Termination::RatiosSatisfied
                };
                finish!(how);
            }
            DustDecision::Reduce(next) => {
                rho = next;
                reductions += 1;
                lp.update_objective_row(&mut tab, rho);
                if tab.objective() > l0 {
                    // The swapped objective made the current vertex worse
                    // than the zero step; start over from d = 0.
                    tab = lp.initial_tableau(cfg.pivot_tol)?;
                    restarts += 1;
                }
                d = lp.extract_primal(&tab);
                lambda = project_duals(&lp.extract_duals(&tab), &eval.kinds);
                from_tableau = true;
                continue;
            }
            DustDecision::InfeasibilitySuspected => suspected = true,
            _ => {}
        }

        if lp_optimal {
            finish!(Termination::LpOptimal);
        }
        if pivots >= cfg.max_pivots {
            if r.r_phi >= ctrl.beta_phi {
                finish!(Termination::PivotLimit);
            }
            return Err(Error::SubproblemStalled { pivots });
        }
        if tab.pivot()? != PivotOutcome::Optimal {
            pivots += 1;
        }
        d = lp.extract_primal(&tab);
        lambda = project_duals(&lp.extract_duals(&tab), &eval.kinds);
        from_tableau = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merit::{dual_value, model_reduction};
    use crate::problem::ConstraintKind;

    fn single_eq() -> Evaluation {
        // min x s.t. x = 0, linearized at x = 1.
        Evaluation {
            x: vec![1.0],
            f: 1.0,
            g: vec![1.0],
            b: vec![1.0],
            jacobian: vec![vec![1.0]],
            kinds: vec![ConstraintKind::Equality],
        }
    }

    #[test]
    fn ratios_at_stationary_feasible_point() {
        let e = Evaluation {
            x: vec![0.0],
            f: 0.0,
            g: vec![0.0],
            b: vec![0.0],
            jacobian: vec![vec![1.0]],
            kinds: vec![ConstraintKind::Equality],
        };
        let r = ratios(&e, &[0.0], &[0.0], &[0.0], 1.0, 0.01, 1.0);
        assert_eq!(r.r_v, 1.0);
        assert_eq!(r.r_c, 1.0);
        assert_eq!(r.r_phi, 1.0);
    }

    #[test]
    fn ratios_worked_equality_instance() {
        let e = single_eq();
        // l0_gamma = 1.01, l(d;1) = -1, p(lambda;1) = -1
        assert_eq!(linear_model(&e, &[-1.0], 1.0), -1.0);
        assert_eq!(
            dual_value(&e, &[-1.0], 1.0, 1.0, TrustNorm::Infinity).unwrap(),
            -1.0
        );
        let r = ratios(&e, &[-1.0], &[-1.0], &[-1.0], 1.0, 0.01, 1.0);
        assert!((r.r_phi - 1.0).abs() < 1e-15);
        assert_eq!(r.r_c, 1.0);
    }

    #[test]
    fn feasible_stationary_subproblem_stops_at_once() {
        let e = Evaluation {
            x: vec![0.0, 0.0],
            f: 0.0,
            g: vec![0.0, 0.0],
            b: vec![0.0, 0.0],
            jacobian: vec![vec![1.0, 2.0], vec![-1.0, 0.5]],
            kinds: vec![ConstraintKind::Equality, ConstraintKind::Inequality],
        };
        let res = solve_subproblem(&e, 1.0, 0.01, 1.0, None, &SubproblemConfig::default()).unwrap();
        assert!(res.is_null_step());
        assert_eq!(res.rho_tilde, 1.0);
        assert_eq!(res.dust_reductions, 0);
        assert_eq!(res.pivots, 0);
    }

    #[test]
    fn one_dimensional_equality_is_solved_in_few_pivots() {
        let e = single_eq();
        let res = solve_subproblem(&e, 1.0, 0.01, 1.0, None, &SubproblemConfig::default()).unwrap();
        assert_eq!(res.d, vec![-1.0]);
        assert!(res.pivots <= 3, "{res:?}");
        assert!((model_reduction(&e, &res.d, res.rho_tilde) - 2.0).abs() < 1e-12);
        let c = &SubproblemConfig::default().control;
        assert!(res.ratios.r_v >= c.beta_v);
        assert!(res.ratios.r_phi >= c.beta_phi);
        assert!(res.ratios.r_c >= c.beta_v);
    }

    #[test]
    fn steep_objective_triggers_penalty_reduction() {
        // At x = 0 the linearization of x^2 - 1 <= 0 ... use c(x) = x - 1 = 0
        // with f = -100 x: the penalty step runs away from feasibility.
        let e = Evaluation {
            x: vec![0.0],
            f: 0.0,
            g: vec![100.0],
            b: vec![-1.0],
            jacobian: vec![vec![1.0]],
            kinds: vec![ConstraintKind::Equality],
        };
        let cfg = SubproblemConfig {
            record_pivots: true,
            ..SubproblemConfig::default()
        };
        let res = solve_subproblem(&e, 1.0, 0.01, 2.0, None, &cfg).unwrap();
        assert!(res.dust_reductions >= 1, "{res:?}");
        assert!(res.rho_tilde < 1.0);
        assert!(res.ratios.r_v >= cfg.control.beta_v);
    }

    #[test]
    fn exact_mode_reaches_lp_optimality() {
        let e = Evaluation {
            x: vec![0.0, 0.0],
            f: 0.0,
            g: vec![1.0, -0.5],
            b: vec![0.3, -0.2],
            jacobian: vec![vec![1.0, 1.0], vec![2.0, -1.0]],
            kinds: vec![ConstraintKind::Equality, ConstraintKind::Inequality],
        };
        let cfg = SubproblemConfig {
            require_lp_optimal: true,
            ..SubproblemConfig::default()
        };
        let res = solve_subproblem(&e, 1.0, 0.01, 1.0, None, &cfg).unwrap();
        assert_eq!(res.terminated_by, Termination::LpOptimal);
    }

    mod props {
        use super::super::*;
        use crate::lp::tableau::Tableau;
        use crate::merit::{check_dual_feasible, dual_box};
        use crate::problem::ConstraintKind;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = Evaluation> {
            (1usize..=4, 0usize..=4).prop_flat_map(|(n, m)| {
                (
                    prop::collection::vec(-2.0f64..2.0, n),
                    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), m),
                    prop::collection::vec(-2.0f64..2.0, m),
                    prop::collection::vec(any::<bool>(), m),
                )
                    .prop_map(move |(g, jacobian, b, eq)| Evaluation {
                        x: vec![0.0; n],
                        f: 0.0,
                        g,
                        b,
                        jacobian,
                        kinds: eq
                            .into_iter()
                            .map(|e| {
                                if e {
                                    ConstraintKind::Equality
                                } else {
                                    ConstraintKind::Inequality
                                }
                            })
                            .collect(),
                    })
            })
        }

        fn lerp_box(kinds: &[ConstraintKind], t: &[f64]) -> Vec<f64> {
            kinds
                .iter()
                .zip(t)
                .map(|(k, t)| {
                    let b = dual_box(*k);
                    b.lo + t * (b.hi - b.lo)
                })
                .collect()
        }

        /// `B^-1` applied to the original rows, by Gauss-Jordan on the basis columns.
        fn cold_reduced_costs(lp: &StandardLp, basis: &[usize], cost: &[f64]) -> Vec<f64> {
            let rows = lp.matrix.len();
            let cols = cost.len();
            let mut a: Vec<Vec<f64>> = lp.matrix.clone();
            for (i, &bc) in basis.iter().enumerate() {
                let p = (i..rows)
                    .max_by(|&x, &y| a[x][bc].abs().total_cmp(&a[y][bc].abs()))
                    .unwrap();
                a.swap(i, p);
                let piv = a[i][bc];
                a[i].iter_mut().for_each(|x| *x /= piv);
                for r in 0..rows {
                    if r != i {
                        let f = a[r][bc];
                        if f != 0.0 {
                            for c in 0..cols {
                                a[r][c] -= f * a[i][c];
                            }
                        }
                    }
                }
            }
            (0..cols)
                .map(|j| cost[j] - (0..rows).map(|i| cost[basis[i]] * a[i][j]).sum::<f64>())
                .collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn weak_duality_holds(
                e in instance(),
                rho in 0.0f64..3.0,
                delta in 0.1f64..3.0,
                seeds in prop::collection::vec((0.0f64..1.0, -1.0f64..1.0), 8),
            ) {
                let m = e.num_constraints();
                let n = e.dim();
                let lambda = lerp_box(&e.kinds, &seeds.iter().map(|s| s.0).cycle().take(m).collect::<Vec<_>>());
                let d: Vec<f64> = seeds.iter().map(|s| s.1 * delta).cycle().take(n).collect();
                let p = dual_value_unchecked(&e, &lambda, rho, delta, TrustNorm::Infinity);
                prop_assert!(p <= linear_model(&e, &d, rho) + 1e-10);
            }

            #[test]
            fn subproblem_result_invariants(
                e in instance(),
                rho in 0.01f64..3.0,
                gamma in 1e-6f64..0.1,
                delta in 0.1f64..3.0,
                exact in any::<bool>(),
            ) {
                let cfg = SubproblemConfig {
                    record_pivots: true,
                    require_lp_optimal: exact,
                    control: ControlParams {
                        beta_phi: if exact { 1.0 - 1e-8 } else { 0.75 },
                        ..ControlParams::default()
                    },
                    ..SubproblemConfig::default()
                };
                let res = solve_subproblem(&e, rho, gamma, delta, None, &cfg).unwrap();
                let norm = TrustNorm::Infinity;
                prop_assert!(norm.norm(&res.d) <= delta * (1.0 + 1e-12));
                prop_assert!(res.rho_tilde <= rho && res.rho_tilde > 0.0);
                prop_assert!(linear_model(&e, &res.d, res.rho_tilde) <= violation(&e) + 1e-9);
                check_dual_feasible(&e.kinds, &res.lambda).unwrap();
                check_dual_feasible(&e.kinds, &res.nu).unwrap();
                let p0 = |l: &[f64]| dual_value_unchecked(&e, l, 0.0, delta, norm);
                prop_assert!(p0(&res.nu) >= p0(&res.lambda) - 1e-12);
                prop_assert!(p0(&res.nu) >= p0(&res.lambda0) - 1e-12);
                if exact {
                    prop_assert_eq!(res.terminated_by, Termination::LpOptimal);
                }
                for w in res.history.windows(2) {
                    prop_assert!(w[1].rho <= w[0].rho);
                    prop_assert!(w[1].dual_nu_zero >= w[0].dual_nu_zero - 1e-12);
                    if w[1].rho == w[0].rho && w[0].j > 0 {
                        prop_assert!(w[1].model_rho <= w[0].model_rho + 1e-9);
                    }
                }
                for h in &res.history {
                    prop_assert!(h.dual_lambda_rho <= h.model_rho + 1e-8);
                    prop_assert!(h.dual_nu_zero <= h.model_zero + 1e-8);
                }
            }

            #[test]
            fn objective_swap_matches_cold_rebuild(
                e in instance(),
                rho in 0.1f64..3.0,
                shrink in 0.01f64..0.99,
                pivots in 0usize..6,
            ) {
                let mut lp = StandardLp::build(&e, rho, 1.0);
                let mut tab: Tableau = lp.initial_tableau(DEFAULT_PIVOT_TOL).unwrap();
                for _ in 0..pivots {
                    tab.pivot().unwrap();
                }
                lp.update_objective_row(&mut tab, rho * shrink);
                let cold = cold_reduced_costs(&lp, tab.basis(), &lp.cost_for(rho * shrink));
                for (a, b) in tab.reduced_costs().iter().zip(&cold) {
                    prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{} vs {}", a, b);
                }
            }
        }
    }
}

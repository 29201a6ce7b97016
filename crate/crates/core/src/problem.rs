//! Nonlinear program definition and first-order evaluation.
//!
//! A [`Problem`] bundles an objective and an ordered list of constraints,
//! each given as a value callable plus a user-supplied gradient. The order of
//! the constraints is fixed at construction and identifies the multipliers
//! everywhere else in the crate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::EvaluationError;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// `c(x) = 0`
    Equality,
    /// `c(x) <= 0`
    Inequality,
}

/// A scalar function together with its gradient.
#[derive(Clone)]
pub struct Function {
    name: String,
    value: ValueFn,
    gradient: GradientFn,
}

impl Function {
    pub fn new<F, G>(name: impl Into<String>, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, EvaluationError> {
        let v = (self.value)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvaluationError::NonFinite {
                function: self.name.clone(),
                x: x.to_vec(),
            })
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvaluationError> {
        let g = (self.gradient)(x);
        if g.len() != x.len() {
            return Err(EvaluationError::Dimension {
                function: format!("gradient of {}", self.name),
                expected: x.len(),
                actual: g.len(),
            });
        }
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(EvaluationError::NonFinite {
                function: format!("gradient of {}", self.name),
                x: x.to_vec(),
            })
        }
    }
}

impl fmt::Debug for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Function")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub function: Function,
}

/// Where a reference objective value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Re-derived by hand (stationarity conditions) and checked in tests.
    Analytic,
    /// Quoted from the literature, not independently re-derived.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub value: f64,
    pub provenance: Provenance,
}

/// `min f(x)  s.t.  c_i(x) = 0 (i in E),  c_i(x) <= 0 (i in I)`.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    n: usize,
    objective: Function,
    constraints: Vec<Constraint>,
    known_optimum: Option<ReferenceValue>,
}

impl Problem {
    pub fn builder(name: impl Into<String>, n: usize) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            n,
            objective: None,
            constraints: Vec::new(),
            known_optimum: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &Function {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn kinds(&self) -> Vec<ConstraintKind> {
        self.constraints.iter().map(|c| c.kind).collect()
    }

    pub fn known_optimum(&self) -> Option<ReferenceValue> {
        self.known_optimum
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), EvaluationError> {
        if x.len() != self.n {
            return Err(EvaluationError::Dimension {
                function: self.name.clone(),
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Objective and constraint values only (no gradients).
    pub fn evaluate_values(&self, x: &[f64]) -> Result<PointValues, EvaluationError> {
        self.check_dim(x)?;
        let f = self.objective.value(x)?;
        let b = self
            .constraints
            .iter()
            .map(|c| c.function.value(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PointValues { f, b })
    }

    /// Full first-order data at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation, EvaluationError> {
        let values = self.evaluate_values(x)?;
        self.complete(x, values)
    }

    /// Adds gradients to values that were already computed at `x`.
    pub fn complete(&self, x: &[f64], values: PointValues) -> Result<Evaluation, EvaluationError> {
        self.check_dim(x)?;
        let g = self.objective.gradient(x)?;
        let jacobian = self
            .constraints
            .iter()
            .map(|c| c.function.gradient(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Evaluation {
            x: x.to_vec(),
            f: values.f,
            g,
            b: values.b,
            jacobian,
            kinds: self.kinds(),
        })
    }
}

pub struct ProblemBuilder {
    name: String,
    n: usize,
    objective: Option<Function>,
    constraints: Vec<Constraint>,
    known_optimum: Option<ReferenceValue>,
}

impl ProblemBuilder {
    pub fn objective<F, G>(mut self, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.objective = Some(Function::new("f", value, gradient));
        self
    }

    pub fn constraint<F, G>(mut self, kind: ConstraintKind, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let name = format!("c{}", self.constraints.len() + 1);
        self.constraints.push(Constraint {
            kind,
            function: Function::new(name, value, gradient),
        });
        self
    }

    pub fn equality<F, G>(self, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.constraint(ConstraintKind::Equality, value, gradient)
    }

    pub fn inequality<F, G>(self, value: F, gradient: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.constraint(ConstraintKind::Inequality, value, gradient)
    }

    pub fn known_optimum(mut self, value: f64, provenance: Provenance) -> Self {
        self.known_optimum = Some(ReferenceValue { value, provenance });
        self
    }

    /// Panics if no objective was supplied or the dimension is zero.
    pub fn build(self) -> Problem {
        assert!(self.n > 0, "problem dimension must be positive");
        Problem {
            name: self.name,
            n: self.n,
            objective: self
                .objective
                .expect("a problem needs an objective function"),
            constraints: self.constraints,
            known_optimum: self.known_optimum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointValues {
    pub f: f64,
    pub b: Vec<f64>,
}

/// First-order data at one point: `g = grad f`, `b_i = c_i(x)`, rows of
/// `jacobian` are `grad c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
    pub jacobian: Vec<Vec<f64>>,
    pub kinds: Vec<ConstraintKind>,
}

impl Evaluation {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    /// `b_i + <a_i, d>` for every constraint.
    pub fn linearized(&self, d: &[f64]) -> Vec<f64> {
        self.b
            .iter()
            .zip(&self.jacobian)
            .map(|(b, a)| b + dot(a, d))
            .collect()
    }

    /// `A^T lambda`.
    pub fn jacobian_transpose_times(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (a, l) in self.jacobian.iter().zip(lambda) {
            for (o, ai) in out.iter_mut().zip(a) {
                *o += l * ai;
            }
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Worst relative discrepancy between central differences and the supplied
/// gradient, per function (objective first, then constraints in order).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub errors: Vec<(String, f64)>,
}

impl GradientCheck {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().map(|(_, e)| *e).fold(0.0, f64::max)
    }
}

/// Compares every gradient against central finite differences with step `h`.
pub fn check_gradients(
    problem: &Problem,
    x: &[f64],
    h: f64,
) -> Result<GradientCheck, EvaluationError> {
    assert!(h > 0.0, "finite-difference step must be positive");
    problem.check_dim(x)?;
    let functions =
        std::iter::once(&problem.objective).chain(problem.constraints.iter().map(|c| &c.function));
    let mut errors = Vec::new();
    let mut probe = x.to_vec();
    for func in functions {
        let grad = func.gradient(x)?;
        let mut worst = 0.0_f64;
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let up = func.value(&probe)?;
            probe[i] = x[i] - h;
            let down = func.value(&probe)?;
            probe[i] = x[i];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs() / fd.abs().max(1.0));
        }
        errors.push((func.name.clone(), worst));
    }
    Ok(GradientCheck { errors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_with_eq() -> Problem {
        Problem::builder("sq", 1)
            .objective(|x| x[0] * x[0], |x| vec![2.0 * x[0]])
            .equality(|x| x[0] - 1.0, |_| vec![1.0])
            .build()
    }

    fn hs6() -> Problem {
        Problem::builder("hs6", 2)
            .objective(|x| (1.0 - x[0]).powi(2), |x| vec![-2.0 * (1.0 - x[0]), 0.0])
            .equality(
                |x| 10.0 * (x[1] - x[0] * x[0]),
                |x| vec![-20.0 * x[0], 10.0],
            )
            .build()
    }

    #[test]
    fn evaluate_substitutes_directly() {
        let e = square_with_eq().evaluate(&[2.0]).unwrap();
        assert_eq!(e.f, 4.0);
        assert_eq!(e.g, vec![4.0]);
        assert_eq!(e.b, vec![1.0]);
        assert_eq!(e.jacobian, vec![vec![1.0]]);
    }

    #[test]
    fn evaluate_without_constraints() {
        let p = Problem::builder("lin", 2)
            .objective(|x| x[0] + x[1], |_| vec![1.0, 1.0])
            .build();
        let e = p.evaluate(&[0.0, 0.0]).unwrap();
        assert_eq!(e.f, 0.0);
        assert_eq!(e.g, vec![1.0, 1.0]);
        assert!(e.b.is_empty() && e.jacobian.is_empty());
    }

    #[test]
    fn evaluate_hs6_at_solution() {
        let e = hs6().evaluate(&[1.0, 1.0]).unwrap();
        assert_eq!(e.f, 0.0);
        assert_eq!(e.g, vec![0.0, 0.0]);
        assert_eq!(e.b, vec![0.0]);
        assert_eq!(e.jacobian, vec![vec![-20.0, 10.0]]);
    }

    #[test]
    fn evaluate_is_deterministic() {
        let p = hs6();
        assert_eq!(p.evaluate(&[0.3, -0.7]), p.evaluate(&[0.3, -0.7]));
    }

    #[test]
    fn non_finite_value_names_the_function() {
        let p = Problem::builder("log", 1)
            .objective(|x| x[0].ln(), |x| vec![1.0 / x[0]])
            .build();
        match p.evaluate(&[-1.0]) {
            Err(EvaluationError::NonFinite { function, x }) => {
                assert_eq!(function, "f");
                assert_eq!(x, vec![-1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_gradient_length_is_rejected() {
        let p = Problem::builder("bad", 2)
            .objective(|x| x[0], |_| vec![1.0])
            .build();
        assert!(matches!(
            p.evaluate(&[0.0, 0.0]),
            Err(EvaluationError::Dimension { .. })
        ));
        assert!(matches!(
            p.evaluate(&[0.0]),
            Err(EvaluationError::Dimension { .. })
        ));
    }

    #[test]
    fn gradient_check_quadratic_is_exact() {
        let p = Problem::builder("q", 1)
            .objective(|x| x[0] * x[0], |x| vec![2.0 * x[0]])
            .build();
        let c = check_gradients(&p, &[1.0], 1e-6).unwrap();
        assert!(c.max_error() <= 1e-6, "{c:?}");
    }

    #[test]
    fn gradient_check_detects_planted_defect() {
        let p = Problem::builder("wrong", 1)
            .objective(|x| x[0], |_| vec![2.0])
            .build();
        let c = check_gradients(&p, &[0.3], 1e-6).unwrap();
        assert!((c.max_error() - 1.0).abs() < 1e-6, "{c:?}");
    }

    #[test]
    fn gradient_check_hs6() {
        let c = check_gradients(&hs6(), &[1.2, 1.0], 1e-6).unwrap();
        assert_eq!(c.errors.len(), 2);
        assert!(c.max_error() <= 1e-5, "{c:?}");
    }
}

//! Inexact penalty sequential linear programming.
//!
//! A nonlinear program `min f(x)` subject to `c_i(x) = 0` and `c_j(x) <= 0` is
//! solved through the exact penalty `rho f(x) + v(x)`. Each iteration solves an
//! infinity-norm trust-region LP by primal simplex, stopping early once
//! primal-dual ratio tests accept the iterate and lowering `rho` when the step
//! does not make enough progress towards feasibility.

pub mod catalog;
pub mod error;
pub mod lp;
pub mod merit;
pub mod penalty;
pub mod problem;
pub mod solver;

pub use error::{Error, EvaluationError, Result};
pub use merit::TrustNorm;
pub use penalty::{ControlParams, DustDecision, Ratios};
pub use problem::{Constraint, ConstraintKind, Evaluation, Function, Problem};

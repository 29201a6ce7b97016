//! Trust-region LP subproblem: standard form, dense simplex and the inexact
//! driver.

pub mod standard_form;
pub mod subproblem;
pub mod tableau;

pub use standard_form::{project_duals, BlockLayout, StandardLp};
pub use subproblem::{
    ratios, solve_subproblem, PivotRecord, SubproblemConfig, SubproblemResult, Termination,
};
pub use tableau::{PivotOutcome, Tableau};

//! Standard-form assembly of the l-infinity trust-region subproblem
//!
//! ```text
//! min  <rho g, d> + <e, r + s> + <e, t>
//! s.t. <a_i, d> + b_i = r_i - s_i   (i in E)
//!      <a_i, d> + b_i <= t_i        (i in I)
//!      -delta e <= d <= delta e,  (r, s, t) >= 0
//! ```
//!
//! with `d = d+ - d-` and slacks `z` (inequality rows), `u`, `v` (box rows).
//! Columns are laid out as `[d+, d-, r, t, s, z, u, v]`, rows as
//! `[E rows, I rows, upper box, lower box]`.

use crate::error::Result;
use crate::merit::dual_box;
use crate::problem::{ConstraintKind, Evaluation};

use super::tableau::Tableau;

/// Column and row offsets of every variable block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    pub n: usize,
    /// Original constraint indices of the equality rows, in row order.
    pub equalities: Vec<usize>,
    /// Original constraint indices of the inequality rows, in row order.
    pub inequalities: Vec<usize>,
}

impl BlockLayout {
    pub fn new(n: usize, kinds: &[ConstraintKind]) -> Self {
        let (mut equalities, mut inequalities) = (Vec::new(), Vec::new());
        for (i, k) in kinds.iter().enumerate() {
            match k {
                ConstraintKind::Equality => equalities.push(i),
                ConstraintKind::Inequality => inequalities.push(i),
            }
        }
        Self {
            n,
            equalities,
            inequalities,
        }
    }

    pub fn m_eq(&self) -> usize {
        self.equalities.len()
    }

    pub fn m_ineq(&self) -> usize {
        self.inequalities.len()
    }

    pub fn d_plus(&self) -> usize {
        0
    }
    pub fn d_minus(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        2 * self.n
    }
    pub fn t(&self) -> usize {
        self.r() + self.m_eq()
    }
    pub fn s(&self) -> usize {
        self.t() + self.m_ineq()
    }
    pub fn z(&self) -> usize {
        self.s() + self.m_eq()
    }
    pub fn u(&self) -> usize {
        self.z() + self.m_ineq()
    }
    pub fn v(&self) -> usize {
        self.u() + self.n
    }

    /// `4n + 2|E| + 2|I|`.
    pub fn num_columns(&self) -> usize {
        self.v() + self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m_eq() + self.m_ineq() + 2 * self.n
    }

    pub fn ineq_row(&self, k: usize) -> usize {
        self.m_eq() + k
    }

    pub fn upper_row(&self, j: usize) -> usize {
        self.m_eq() + self.m_ineq() + j
    }

    pub fn lower_row(&self, j: usize) -> usize {
        self.m_eq() + self.m_ineq() + self.n + j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    pub layout: BlockLayout,
    pub cost: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub rho: f64,
    pub delta: f64,
    g: Vec<f64>,
}

impl StandardLp {
    pub fn build(eval: &Evaluation, rho: f64, delta: f64) -> Self {
        assert!(rho >= 0.0 && delta > 0.0);
        let n = eval.dim();
        let layout = BlockLayout::new(n, &eval.kinds);
        let cols = layout.num_columns();
        let mut matrix = vec![vec![0.0; cols]; layout.num_rows()];
        let mut rhs = vec![0.0; layout.num_rows()];

        for (k, &i) in layout.equalities.iter().enumerate() {
            let row = &mut matrix[k];
            for j in 0..n {
                row[layout.d_plus() + j] = eval.jacobian[i][j];
                row[layout.d_minus() + j] = -eval.jacobian[i][j];
            }
            row[layout.r() + k] = -1.0;
            row[layout.s() + k] = 1.0;
            rhs[k] = -eval.b[i];
        }
        for (k, &i) in layout.inequalities.iter().enumerate() {
            let ri = layout.ineq_row(k);
            let row = &mut matrix[ri];
            for j in 0..n {
                row[layout.d_plus() + j] = eval.jacobian[i][j];
                row[layout.d_minus() + j] = -eval.jacobian[i][j];
            }
            row[layout.t() + k] = -1.0;
            row[layout.z() + k] = 1.0;
            rhs[ri] = -eval.b[i];
        }
        for j in 0..n {
            let up = layout.upper_row(j);
            matrix[up][layout.d_plus() + j] = 1.0;
            matrix[up][layout.d_minus() + j] = -1.0;
            matrix[up][layout.u() + j] = 1.0;
            rhs[up] = delta;
            let lo = layout.lower_row(j);
            matrix[lo][layout.d_plus() + j] = -1.0;
            matrix[lo][layout.d_minus() + j] = 1.0;
            matrix[lo][layout.v() + j] = 1.0;
            rhs[lo] = delta;
        }

        let mut lp = Self {
            layout,
            cost: Vec::new(),
            matrix,
            rhs,
            rho,
            delta,
            g: eval.g.clone(),
        };
        lp.cost = lp.cost_for(rho);
        lp
    }

    /// Objective vector `[rho g, -rho g, e, e, e, 0, 0, 0]`.
    pub fn cost_for(&self, rho: f64) -> Vec<f64> {
        let l = &self.layout;
        let mut c = vec![0.0; l.num_columns()];
        for j in 0..l.n {
            c[l.d_plus() + j] = rho * self.g[j];
            c[l.d_minus() + j] = -rho * self.g[j];
        }
        c[l.r()..l.z()].iter_mut().for_each(|x| *x = 1.0);
        c
    }

    /// Basis `(d+, d-, r, s, t, z, u, v) = (0, 0, (b_E)+, (b_I)+, -(b_E)-, -(b_I)-, delta, delta)`.
    ///
    /// Rows whose basic auxiliary column carries `-1` are negated by the
    /// tableau so that the start is feasible.
    pub fn initial_basis_columns(&self) -> Vec<usize> {
        let l = &self.layout;
        let mut basis = Vec::with_capacity(l.num_rows());
        for k in 0..l.m_eq() {
            // rhs = -b
            basis.push(if self.rhs[k] < 0.0 {
                l.r() + k
            } else {
                l.s() + k
            });
        }
        for k in 0..l.m_ineq() {
            let ri = l.ineq_row(k);
            basis.push(if self.rhs[ri] < 0.0 {
                l.t() + k
            } else {
                l.z() + k
            });
        }
        basis.extend(l.u()..l.u() + l.n);
        basis.extend(l.v()..l.v() + l.n);
        basis
    }

    pub fn initial_tableau(&self, pivot_tol: f64) -> Result<Tableau> {
        Tableau::new(
            self.cost.clone(),
            &self.matrix,
            &self.rhs,
            self.initial_basis_columns(),
            pivot_tol,
        )
    }

    /// Step `d = d+ - d-` of the current basic solution, clipped to the box.
    pub fn extract_primal(&self, tab: &Tableau) -> Vec<f64> {
        let l = &self.layout;
        let x = tab.primal();
        (0..l.n)
            .map(|j| (x[l.d_plus() + j] - x[l.d_minus() + j]).clamp(-self.delta, self.delta))
            .collect()
    }

    /// Penalty multipliers read off the tableau, in original constraint order.
    ///
    /// The simplex row dual `y_i` of `<a_i, d> - r_i + s_i = -b_i` relates to
    /// the multiplier of `<a_i, d> + b_i` by `lambda_i = -y_i`. The values are
    /// not necessarily dual feasible before optimality.
    pub fn extract_duals(&self, tab: &Tableau) -> Vec<f64> {
        let l = &self.layout;
        let y = tab.row_duals();
        let mut lambda = vec![0.0; l.m_eq() + l.m_ineq()];
        for (k, &i) in l.equalities.iter().enumerate() {
            lambda[i] = -y[k];
        }
        for (k, &i) in l.inequalities.iter().enumerate() {
            lambda[i] = -y[l.ineq_row(k)];
        }
        lambda
    }

    /// Swaps in the objective row for a new penalty parameter.
    pub fn update_objective_row(&mut self, tab: &mut Tableau, rho: f64) {
        if rho == self.rho {
            return;
        }
        self.rho = rho;
        self.cost = self.cost_for(rho);
        tab.set_cost(self.cost.clone());
    }
}

/// Clamps every multiplier into its dual-feasible interval.
pub fn project_duals(raw: &[f64], kinds: &[ConstraintKind]) -> Vec<f64> {
    raw.iter()
        .zip(kinds)
        .map(|(l, k)| dual_box(*k).clamp(*l))
        .collect()
}

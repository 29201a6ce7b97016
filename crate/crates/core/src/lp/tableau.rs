//! Dense primal simplex tableau for `min c^T x  s.t.  A x = b, x >= 0`.
//!
//! The tableau must be started from a basis whose columns form a signed
//! identity. Rows are scaled by `+-1` so that the starting basis is exactly
//! the identity; duals are reported for the unscaled rows.

use crate::error::{Error, Result};

pub const DEFAULT_PIVOT_TOL: f64 = 1e-10;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
pub const DEGENERATE_RUN_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOutcome {
    /// A pivot was performed and the basic solution moved.
    Improved,
    /// A pivot was performed with a zero step length.
    Degenerate,
    /// All reduced costs are nonnegative; nothing was changed.
    Optimal,
}

#[derive(Debug, Clone)]
pub struct Tableau {
    rows: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    body: Vec<f64>,
    /// `B^-1 b`.
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    /// `c_j - c_B^T B^-1 A_j`.
    reduced_costs: Vec<f64>,
    /// Sign applied to each original row.
    row_sign: Vec<f64>,
    /// Column that was basic in row `i` at construction; its scaled column is `e_i`.
    unit_columns: Vec<usize>,
    pivot_tol: f64,
    degenerate_run: usize,
    pivots: usize,
}

impl Tableau {
    /// Builds the tableau from the dense rows of `A` and a starting basis.
    ///
    /// `basis[i]` must be a column that is `+-e_i`, and the resulting basic
    /// solution must be nonnegative.
    pub fn new(
        cost: Vec<f64>,
        matrix: &[Vec<f64>],
        rhs: &[f64],
        basis: Vec<usize>,
        pivot_tol: f64,
    ) -> Result<Self> {
        let rows = matrix.len();
        let cols = cost.len();
        if rhs.len() != rows || basis.len() != rows || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig(
                "inconsistent tableau dimensions".into(),
            ));
        }
        let mut row_sign = vec![1.0; rows];
        for (i, &j) in basis.iter().enumerate() {
            let pivot = matrix[i][j];
            let unit = pivot.abs() == 1.0 && (0..rows).all(|k| k == i || matrix[k][j] == 0.0);
            if !unit {
                return Err(Error::InvalidConfig(format!(
                    "basis column {j} is not a signed unit vector for row {i}"
                )));
            }
            row_sign[i] = pivot;
        }
        let mut body = Vec::with_capacity(rows * cols);
        let mut scaled_rhs = Vec::with_capacity(rows);
        for i in 0..rows {
            body.extend(matrix[i].iter().map(|a| a * row_sign[i]));
            let r = rhs[i] * row_sign[i];
            if r < -pivot_tol {
                return Err(Error::InvalidConfig(format!(
                    "starting basis is infeasible in row {i}"
                )));
            }
            scaled_rhs.push(r.max(0.0));
        }
        let mut tab = Self {
            rows,
            cols,
            body,
            rhs: scaled_rhs,
            unit_columns: basis.clone(),
            basis,
            reduced_costs: vec![0.0; cols],
            cost: Vec::new(),
            row_sign,
            pivot_tol,
            degenerate_run: 0,
            pivots: 0,
        };
        tab.set_cost(cost);
        Ok(tab)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn reduced_costs(&self) -> &[f64] {
        &self.reduced_costs
    }

    pub fn row_signs(&self) -> &[f64] {
        &self.row_sign
    }

    /// Number of pivots performed so far.
    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.body[i * self.cols + j]
    }

    /// Replaces the objective row, keeping basis and basic solution.
    pub fn set_cost(&mut self, cost: Vec<f64>) {
        assert_eq!(cost.len(), self.cols);
        self.cost = cost;
        for j in 0..self.cols {
            let mut r = self.cost[j];
            for i in 0..self.rows {
                r -= self.cost[self.basis[i]] * self.at(i, j);
            }
            self.reduced_costs[j] = r;
        }
        for &j in &self.basis {
            self.reduced_costs[j] = 0.0;
        }
    }

    /// `c_B^T B^-1 b`.
    pub fn objective(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&j, r)| self.cost[j] * r)
            .sum()
    }

    /// Full primal vector `x` (nonbasic entries are zero).
    pub fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (&j, &r) in self.basis.iter().zip(&self.rhs) {
            x[j] = r;
        }
        x
    }

    /// Row multipliers `y = c_B^T B^-1` for the original (unscaled) rows.
    pub fn row_duals(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let j = self.unit_columns[i];
                self.row_sign[i] * (self.cost[j] - self.reduced_costs[j])
            })
            .collect()
    }

    pub fn is_optimal(&self) -> bool {
        self.entering(false).is_none()
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tol = self.pivot_tol;
        if bland {
            (0..self.cols).find(|&j| self.reduced_costs[j] < -tol)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                let r = self.reduced_costs[j];
                if r < -tol && best.is_none_or(|(_, b)| r < b) {
                    best = Some((j, r));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Minimum-ratio row; ties go to the smallest basic variable index.
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, col);
            if a > self.pivot_tol {
                let ratio = self.rhs[i] / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        if ratio < r - 1e-12
                            || (ratio <= r + 1e-12 && self.basis[i] < self.basis[k])
                        {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    /// One simplex pivot. Dantzig's rule, falling back to Bland's rule after
    /// [`DEGENERATE_RUN_LIMIT`] consecutive degenerate pivots.
    pub fn pivot(&mut self) -> Result<PivotOutcome> {
        let bland = self.degenerate_run >= DEGENERATE_RUN_LIMIT;
        let Some(col) = self.entering(bland) else {
            return Ok(PivotOutcome::Optimal);
        };
        let row = self
            .leaving(col)
            .ok_or(Error::SingularPivot { column: col })?;
        let step = self.rhs[row] / self.at(row, col);
        self.apply_pivot(row, col);
        self.pivots += 1;
        if step <= self.pivot_tol {
            self.degenerate_run += 1;
            Ok(PivotOutcome::Degenerate)
        } else {
            self.degenerate_run = 0;
            Ok(PivotOutcome::Improved)
        }
    }

    fn apply_pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols;
        let p = self.at(row, col);
        for j in 0..cols {
            self.body[row * cols + j] /= p;
        }
        self.rhs[row] /= p;
        let pivot_row: Vec<f64> = self.body[row * cols..(row + 1) * cols].to_vec();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.at(i, col);
            if factor == 0.0 {
                continue;
            }
            for j in 0..cols {
                self.body[i * cols + j] -= factor * pivot_row[j];
            }
            self.body[i * cols + col] = 0.0;
            self.rhs[i] -= factor * pivot_rhs;
            if self.rhs[i] < 0.0 && self.rhs[i] > -self.pivot_tol {
                self.rhs[i] = 0.0;
            }
        }
        let factor = self.reduced_costs[col];
        for j in 0..cols {
            self.reduced_costs[j] -= factor * pivot_row[j];
        }
        self.reduced_costs[col] = 0.0;
        self.basis[row] = col;
    }

    /// Pivots until optimal or `max_pivots` is reached. Returns whether the
    /// tableau is optimal.
    pub fn solve(&mut self, max_pivots: usize) -> Result<bool> {
        for _ in 0..max_pivots {
            if self.pivot()? == PivotOutcome::Optimal {
                return Ok(true);
            }
        }
        Ok(self.is_optimal())
    }
}

//! Dense linear programs with box-bounded variables and two-sided row bounds.
//!
//! Problems are stated in the maximization sense:
//!
//! ```text
//! maximize    c · h
//! subject to  row_lower[k] <= a_k · h <= row_upper[k]     k = 0..m
//!             var_lower[i] <= h_i     <= var_upper[i]     i = 0..n
//! ```
//!
//! [`solve`] runs a two-phase revised simplex on dense matrices, treating the
//! variable boxes and the row bands natively. [`certify`] re-checks a solution
//! against the problem without touching solver internals.

mod certify;
mod dump;
mod simplex;

pub use certify::{certify, CertificateReport, CheckResult};
pub use dump::{parse_dump, write_dump};
pub use simplex::solve;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("problem has no variables")]
    NoVariables,
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("crossed bounds on {what} {index}: lower {lower} > upper {upper}")]
    CrossedBounds {
        what: &'static str,
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("malformed LP dump at line {line}: {msg}")]
    Dump { line: usize, msg: String },
}

/// A dense LP in "maximize c·h, row bands, variable boxes" form.
///
/// Immutable once built; [`LpProblem::new`] validates every invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    /// Row-major, `num_rows × num_vars`.
    rows: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    var_lower: Vec<f64>,
    var_upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        objective: Vec<f64>,
        rows: Vec<f64>,
        row_lower: Vec<f64>,
        row_upper: Vec<f64>,
        var_lower: Vec<f64>,
        var_upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        if n == 0 {
            return Err(LpError::NoVariables);
        }
        let m = row_lower.len();
        check_len("row_upper", row_upper.len(), m)?;
        check_len("rows", rows.len(), m * n)?;
        check_len("var_lower", var_lower.len(), n)?;
        check_len("var_upper", var_upper.len(), n)?;
        for (what, v) in [
            ("objective", &objective),
            ("rows", &rows),
            ("row_lower", &row_lower),
            ("row_upper", &row_upper),
            ("var_lower", &var_lower),
            ("var_upper", &var_upper),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(LpError::NonFinite(what));
            }
        }
        check_order("row", &row_lower, &row_upper)?;
        check_order("variable", &var_lower, &var_upper)?;
        Ok(Self {
            objective,
            rows,
            row_lower,
            row_upper,
            var_lower,
            var_upper,
        })
    }

    /// Unit box `[0, 1]` on every variable.
    pub fn with_unit_box(
        objective: Vec<f64>,
        rows: Vec<f64>,
        row_lower: Vec<f64>,
        row_upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        Self::new(
            objective,
            rows,
            row_lower,
            row_upper,
            vec![0.0; n],
            vec![1.0; n],
        )
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.num_vars();
        &self.rows[k * n..(k + 1) * n]
    }

    pub fn row_lower(&self) -> &[f64] {
        &self.row_lower
    }

    pub fn row_upper(&self) -> &[f64] {
        &self.row_upper
    }

    pub fn var_lower(&self) -> &[f64] {
        &self.var_lower
    }

    pub fn var_upper(&self) -> &[f64] {
        &self.var_upper
    }

    /// `a_k · values` for every row.
    pub fn row_activities(&self, values: &[f64]) -> Vec<f64> {
        (0..self.num_rows())
            .map(|k| dot(self.row(k), values))
            .collect()
    }

    /// Copy with row `k` and its bounds multiplied by `scale`.
    ///
    /// Panics if `scale` is not strictly positive.
    pub fn scale_row(&self, k: usize, scale: f64) -> Self {
        assert!(scale > 0.0, "row scale must be positive");
        let mut out = self.clone();
        let n = out.num_vars();
        for a in &mut out.rows[k * n..(k + 1) * n] {
            *a *= scale;
        }
        out.row_lower[k] *= scale;
        out.row_upper[k] *= scale;
        out
    }
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), LpError> {
    if got != expected {
        return Err(LpError::LengthMismatch {
            what,
            got,
            expected,
        });
    }
    Ok(())
}

fn check_order(what: &'static str, lower: &[f64], upper: &[f64]) -> Result<(), LpError> {
    match lower.iter().zip(upper).position(|(l, u)| l > u) {
        Some(index) => Err(LpError::CrossedBounds {
            what,
            index,
            lower: lower[index],
            upper: upper[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration_limit",
        }
    }
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Iteration cap and tolerances for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Primal feasibility tolerance, scaled by the row's largest coefficient.
    pub tol_feas: f64,
    /// Reduced-cost tolerance for optimality.
    pub tol_opt: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub tol_pivot: f64,
    /// Values further than this from both bounds count as fractional.
    pub fraction_threshold: f64,
    /// Rebuild the basis inverse from scratch after this many pivots.
    pub refactor_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            tol_feas: 1e-9,
            tol_opt: 1e-9,
            tol_pivot: 1e-9,
            fraction_threshold: 1e-7,
            refactor_interval: 50,
        }
    }
}

/// Where a variable of the internal slack form lives.
///
/// Indices `0..n` are the structural variables, `n..n+m` the row slacks
/// (slack `k` equals the activity of row `k`), and `n+m..n+2m` the Phase I
/// artificials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisVar {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural values; meaningful when `status` is optimal.
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// Shadow prices of the row bands: the rate at which the optimum grows as
    /// the active bound of row `k` is relaxed outward.
    pub row_duals: Vec<f64>,
    /// Basic variable of each row position at the final vertex.
    pub basis: Vec<BasisVar>,
    pub iterations: usize,
    /// Largest scaled row violation left at the end of Phase I.
    pub infeasibility: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Indices whose value is strictly inside the variable box.
    pub fn fractional_indices(&self, problem: &LpProblem, threshold: f64) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|&(i, &v)| {
                v > problem.var_lower()[i] + threshold && v < problem.var_upper()[i] - threshold
            })
            .map(|(i, _)| i)
            .collect()
    }
}

//! Independent re-check of an LP solution.
//!
//! Nothing here reads solver state beyond the returned values and row duals;
//! reduced costs are recomputed from the problem data.

use super::{dot, LpProblem, LpSolution, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst raw violation seen by the check (a count for the vertex check).
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub row_feasibility: CheckResult,
    pub bound_feasibility: CheckResult,
    pub vertex: CheckResult,
    pub complementary_slackness: CheckResult,
    pub fractional_count: usize,
}

impl CertificateReport {
    pub fn checks(&self) -> [&CheckResult; 4] {
        [
            &self.row_feasibility,
            &self.bound_feasibility,
            &self.vertex,
            &self.complementary_slackness,
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    /// Largest violation among the continuous checks.
    pub fn worst_violation(&self) -> f64 {
        self.row_feasibility
            .worst
            .max(self.bound_feasibility.worst)
            .max(self.complementary_slackness.worst)
    }
}

/// Re-check primal feasibility, the vertex fractionality bound and
/// complementary slackness of `solution` against `problem`.
///
/// Feasibility passes when each row violation is within `tol_feas` relative
/// to `1 + Σ|a_kj h_j|`; slackness passes when each reduced-cost or dual sign
/// violation is within `tol_opt` relative to `1 + Σ|y_k a_kj|`.
pub fn certify(
    problem: &LpProblem,
    solution: &LpSolution,
    tolerances: &SolverOptions,
) -> CertificateReport {
    let n = problem.num_vars();
    let m = problem.num_rows();
    let x = &solution.values;
    let y = &solution.row_duals;
    let at = tolerances.fraction_threshold;

    let mut row_worst = 0.0_f64;
    let mut row_ok = true;
    let activity: Vec<f64> = (0..m).map(|k| dot(problem.row(k), x)).collect();
    for (k, &act) in activity.iter().enumerate() {
        let a = problem.row(k);
        let scale = 1.0 + a.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
        let v = (problem.row_lower()[k] - act)
            .max(act - problem.row_upper()[k])
            .max(0.0);
        row_worst = row_worst.max(v);
        row_ok &= v <= tolerances.tol_feas * scale;
    }

    let bound_worst = (0..n)
        .map(|i| {
            (problem.var_lower()[i] - x[i])
                .max(x[i] - problem.var_upper()[i])
                .max(0.0)
        })
        .fold(0.0, f64::max);

    let fractional_count = solution.fractional_indices(problem, at).len();

    let mut cs_worst = 0.0_f64;
    let mut cs_ok = true;
    for (i, &xi) in x.iter().enumerate().take(n) {
        let mut d = problem.objective()[i];
        let mut scale = 1.0;
        for (k, yk) in y.iter().enumerate().take(m) {
            let t = yk * problem.row(k)[i];
            d -= t;
            scale += t.abs();
        }
        let v = sign_violation(xi, problem.var_lower()[i], problem.var_upper()[i], d, at);
        cs_worst = cs_worst.max(v);
        cs_ok &= v <= tolerances.tol_opt * scale;
    }
    for k in 0..m {
        let scale = 1.0 + problem.row(k).iter().map(|a| a.abs()).fold(0.0, f64::max);
        let v = sign_violation(
            activity[k],
            problem.row_lower()[k],
            problem.row_upper()[k],
            y[k],
            at * scale,
        );
        cs_worst = cs_worst.max(v);
        cs_ok &= v <= tolerances.tol_opt * (1.0 + y[k].abs());
    }

    CertificateReport {
        row_feasibility: CheckResult {
            name: "row_feasibility",
            passed: row_ok,
            worst: row_worst,
        },
        bound_feasibility: CheckResult {
            name: "bound_feasibility",
            passed: bound_worst <= tolerances.tol_feas,
            worst: bound_worst,
        },
        vertex: CheckResult {
            name: "vertex",
            passed: fractional_count <= m,
            worst: fractional_count as f64,
        },
        complementary_slackness: CheckResult {
            name: "complementary_slackness",
            passed: cs_ok,
            worst: cs_worst,
        },
        fractional_count,
    }
}

/// How far `rate` (the gain from raising the quantity) is from the sign its
/// position allows: at the lower end it must be `<= 0`, at the upper end
/// `>= 0`, strictly inside it must vanish.
fn sign_violation(value: f64, lower: f64, upper: f64, rate: f64, at: f64) -> f64 {
    let at_lower = value <= lower + at;
    let at_upper = value >= upper - at;
    match (at_lower, at_upper) {
        (true, true) => 0.0,
        (true, false) => rate.max(0.0),
        (false, true) => (-rate).max(0.0),
        (false, false) => rate.abs(),
    }
}

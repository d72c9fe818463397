//! Two-phase revised simplex over a dense, explicitly inverted basis.
//!
//! Every row `k` gets a slack `s_k` bounded by the row band and an artificial
//! `a_k`, giving the equality system `A h - s + diag(sigma) a = 0`. The
//! artificials that start basic carry the initial row violations; Phase I
//! drives them to zero, Phase II optimizes the real objective with all
//! artificials fixed at zero.

use super::{BasisVar, LpProblem, LpSolution, LpStatus, SolverOptions};

const NONBASIC: usize = usize::MAX;
const DEGENERATE_STEP: f64 = 1e-12;
const RATIO_TIE: f64 = 1e-12;

/// Solve `problem` to optimality, or report why not.
///
/// Deterministic: identical inputs walk identical pivots.
pub fn solve(problem: &LpProblem, options: &SolverOptions) -> LpSolution {
    let mut tableau = Tableau::new(problem, *options);

    if tableau.has_basic_artificials() {
        tableau.set_phase_one_costs();
        match tableau.run() {
            PhaseEnd::Optimal => {}
            PhaseEnd::IterationLimit => return tableau.finish(LpStatus::IterationLimit),
            // Phase I is bounded below by zero; treat as a numerical failure.
            PhaseEnd::Unbounded => return tableau.finish(LpStatus::Infeasible),
        }
        tableau.refactor();
        let residual = tableau.row_infeasibility();
        tableau.infeasibility = residual;
        if residual > options.tol_feas {
            return tableau.finish(LpStatus::Infeasible);
        }
        tableau.fix_artificials();
    }

    tableau.set_phase_two_costs();
    let status = match tableau.run() {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
        PhaseEnd::IterationLimit => LpStatus::IterationLimit,
    };
    tableau.finish(status)
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Tableau<'a> {
    problem: &'a LpProblem,
    opts: SolverOptions,
    n: usize,
    m: usize,
    /// Structural columns, column-major: `cols[j * m + k] = A[k][j]`.
    cols: Vec<f64>,
    /// Sign of each artificial's column.
    sigma: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    cost: Vec<f64>,
    at_upper: Vec<bool>,
    /// `basis[i]` is the variable basic in position `i`.
    basis: Vec<usize>,
    /// Inverse of `basis`, `NONBASIC` for nonbasic variables.
    position: Vec<usize>,
    /// Row-major `m × m` basis inverse.
    binv: Vec<f64>,
    /// `max_j |A[k][j]|` floored at one; scales feasibility checks.
    row_scale: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    infeasibility: f64,
}

impl<'a> Tableau<'a> {
    fn new(problem: &'a LpProblem, opts: SolverOptions) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let total = n + 2 * m;

        let mut cols = vec![0.0; n * m];
        for k in 0..m {
            for (j, &a) in problem.row(k).iter().enumerate() {
                cols[j * m + k] = a;
            }
        }
        let row_scale = (0..m)
            .map(|k| problem.row(k).iter().fold(1.0_f64, |s, a| s.max(a.abs())))
            .collect();

        let mut lower = Vec::with_capacity(total);
        let mut upper = Vec::with_capacity(total);
        lower.extend_from_slice(problem.var_lower());
        upper.extend_from_slice(problem.var_upper());
        lower.extend_from_slice(problem.row_lower());
        upper.extend_from_slice(problem.row_upper());
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(0.0, m));

        let mut value = vec![0.0; total];
        value[..n].copy_from_slice(problem.var_lower());
        let mut at_upper = vec![false; total];

        let mut basis = Vec::with_capacity(m);
        let mut position = vec![NONBASIC; total];
        let mut sigma = vec![1.0; m];
        let mut binv = vec![0.0; m * m];

        let activity = problem.row_activities(&value[..n]);
        for k in 0..m {
            let slack = n + k;
            let artificial = n + m + k;
            let r = activity[k];
            let (lo, hi) = (problem.row_lower()[k], problem.row_upper()[k]);
            if r >= lo && r <= hi {
                value[slack] = r;
                basis.push(slack);
                position[slack] = k;
                binv[k * m + k] = -1.0;
            } else {
                let bound = if r < lo { lo } else { hi };
                value[slack] = bound;
                at_upper[slack] = r > hi;
                sigma[k] = if bound - r >= 0.0 { 1.0 } else { -1.0 };
                value[artificial] = (bound - r).abs();
                upper[artificial] = f64::INFINITY;
                basis.push(artificial);
                position[artificial] = k;
                binv[k * m + k] = sigma[k];
            }
        }

        Self {
            problem,
            opts,
            n,
            m,
            cols,
            sigma,
            lower,
            upper,
            value,
            cost: vec![0.0; total],
            at_upper,
            basis,
            position,
            binv,
            row_scale,
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            infeasibility: 0.0,
        }
    }

    fn total(&self) -> usize {
        self.n + 2 * self.m
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    fn has_basic_artificials(&self) -> bool {
        self.basis.iter().any(|&j| self.is_artificial(j))
    }

    fn set_phase_one_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        let start = self.n + self.m;
        for c in &mut self.cost[start..] {
            *c = -1.0;
        }
    }

    fn set_phase_two_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.n].copy_from_slice(self.problem.objective());
    }

    fn fix_artificials(&mut self) {
        let start = self.n + self.m;
        for j in start..self.total() {
            self.upper[j] = 0.0;
            if self.position[j] == NONBASIC {
                self.value[j] = 0.0;
            }
        }
    }

    /// Largest row violation of the current structural point, scaled per row.
    fn row_infeasibility(&self) -> f64 {
        let activity = self.problem.row_activities(&self.value[..self.n]);
        activity
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let lo = self.problem.row_lower()[k];
                let hi = self.problem.row_upper()[k];
                (lo - r).max(r - hi).max(0.0) / self.row_scale[k]
            })
            .fold(0.0, f64::max)
    }

    /// Write column `j` of the full constraint matrix into `out`.
    fn column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let (n, m) = (self.n, self.m);
        if j < n {
            out.copy_from_slice(&self.cols[j * m..(j + 1) * m]);
        } else if j < n + m {
            out[j - n] = -1.0;
        } else {
            out[j - n - m] = self.sigma[j - n - m];
        }
    }

    /// `B^-1 a_j`.
    fn ftran(&self, j: usize, out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        if j < n {
            let col = &self.cols[j * m..(j + 1) * m];
            for (i, o) in out.iter_mut().enumerate() {
                *o = super::dot(&self.binv[i * m..(i + 1) * m], col);
            }
        } else {
            let (k, s) = if j < n + m {
                (j - n, -1.0)
            } else {
                (j - n - m, self.sigma[j - n - m])
            };
            for (i, o) in out.iter_mut().enumerate() {
                *o = s * self.binv[i * m + k];
            }
        }
    }

    /// `c_B^T B^-1`.
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let c = self.cost[b];
            if c != 0.0 {
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk += c * self.binv[i * m + k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let (n, m) = (self.n, self.m);
        let ya = if j < n {
            super::dot(&self.cols[j * m..(j + 1) * m], y)
        } else if j < n + m {
            -y[j - n]
        } else {
            self.sigma[j - n - m] * y[j - n - m]
        };
        self.cost[j] - ya
    }

    /// Pick the entering variable and its direction (+1 up, -1 down).
    fn price(&self, y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.total() {
            if self.position[j] != NONBASIC || self.upper[j] <= self.lower[j] {
                continue;
            }
            let d = self.reduced_cost(j, y);
            let dir = if !self.at_upper[j] && d > self.opts.tol_opt {
                1.0
            } else if self.at_upper[j] && d < -self.opts.tol_opt {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            match best {
                Some((_, _, score)) if d.abs() <= score => {}
                _ => best = Some((j, dir, d.abs())),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn run(&mut self) -> PhaseEnd {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        let bland_after = 5 * (self.m + self.n);
        self.degenerate_run = 0;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            let y = self.duals();
            let bland = self.degenerate_run >= bland_after;
            let Some((q, dir)) = self.price(&y, bland) else {
                return PhaseEnd::Optimal;
            };
            self.ftran(q, &mut alpha);

            // Ratio test. A basic variable moves by -dir * t * alpha_i.
            let mut best: Option<(usize, bool, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                let rate = dir * a;
                let b = self.basis[i];
                let (ratio, to_upper) = if rate > self.opts.tol_pivot {
                    ((self.value[b] - self.lower[b]) / rate, false)
                } else if rate < -self.opts.tol_pivot && self.upper[b].is_finite() {
                    ((self.upper[b] - self.value[b]) / -rate, true)
                } else {
                    continue;
                };
                let ratio = ratio.max(0.0);
                let take = match best {
                    None => true,
                    Some((r, _, current)) => {
                        ratio < current - RATIO_TIE
                            || (ratio <= current + RATIO_TIE && b < self.basis[r])
                    }
                };
                if take {
                    best = Some((i, to_upper, ratio));
                }
            }
            // A bound flip wins unless some basic variable blocks strictly earlier.
            let flip = self.upper[q] - self.lower[q];
            let (step, leaving) = match best {
                Some((r, to_upper, ratio)) if ratio < flip => (ratio, Some((r, to_upper))),
                _ => (flip, None),
            };
            if !step.is_finite() {
                return PhaseEnd::Unbounded;
            }

            self.iterations += 1;
            if step <= DEGENERATE_STEP {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }

            self.value[q] += dir * step;
            for (i, &a) in alpha.iter().enumerate() {
                let b = self.basis[i];
                self.value[b] -= dir * step * a;
            }

            match leaving {
                None => {
                    self.at_upper[q] = dir > 0.0;
                    self.value[q] = if dir > 0.0 {
                        self.upper[q]
                    } else {
                        self.lower[q]
                    };
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.value[out] = if to_upper {
                        self.upper[out]
                    } else {
                        self.lower[out]
                    };
                    self.at_upper[out] = to_upper;
                    self.position[out] = NONBASIC;
                    if self.is_artificial(out) {
                        self.upper[out] = 0.0;
                        self.value[out] = 0.0;
                        self.at_upper[out] = false;
                    }
                    self.basis[r] = q;
                    self.position[q] = r;
                    self.at_upper[q] = false;
                    self.pivot_inverse(r, &alpha);
                    self.since_refactor += 1;
                    if self.since_refactor >= self.opts.refactor_interval {
                        self.refactor();
                    }
                }
            }
        }
    }

    fn pivot_inverse(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let pivot = alpha[r];
        for v in &mut self.binv[r * m..(r + 1) * m] {
            *v /= pivot;
        }
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        for (i, row) in head.chunks_exact_mut(m).enumerate() {
            eliminate(row, prow, alpha[i]);
        }
        for (i, row) in tail.chunks_exact_mut(m).enumerate() {
            eliminate(row, prow, alpha[r + 1 + i]);
        }
    }

    /// Rebuild `B^-1` from the basis columns and recompute basic values.
    fn refactor(&mut self) {
        self.since_refactor = 0;
        let m = self.m;
        if m == 0 {
            return;
        }
        let mut b = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for k in 0..m {
                b[k * m + i] = col[k];
            }
        }
        if let Some(inv) = invert(b, m) {
            self.binv = inv;
        }

        // x_B = B^-1 (-N x_N)
        let mut rhs = vec![0.0; m];
        for j in 0..self.total() {
            if self.position[j] != NONBASIC || self.value[j] == 0.0 {
                continue;
            }
            self.column(j, &mut col);
            for k in 0..m {
                rhs[k] -= col[k] * self.value[j];
            }
        }
        for i in 0..m {
            let v = super::dot(&self.binv[i * m..(i + 1) * m], &rhs);
            self.value[self.basis[i]] = v;
        }
    }

    fn finish(mut self, status: LpStatus) -> LpSolution {
        let n = self.n;
        if status == LpStatus::Optimal {
            self.refactor();
        }
        let mut values = self.value[..n].to_vec();
        for (i, v) in values.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
        let objective_value = super::dot(self.problem.objective(), &values);
        let row_duals = if status == LpStatus::Optimal {
            self.duals()
        } else {
            vec![0.0; self.m]
        };
        let basis = self
            .basis
            .iter()
            .map(|&j| {
                if j < n {
                    BasisVar::Structural(j)
                } else if j < n + self.m {
                    BasisVar::Slack(j - n)
                } else {
                    BasisVar::Artificial(j - n - self.m)
                }
            })
            .collect();
        LpSolution {
            status,
            values,
            objective_value,
            row_duals,
            basis,
            iterations: self.iterations,
            infeasibility: self.infeasibility,
        }
    }
}

fn eliminate(row: &mut [f64], pivot_row: &[f64], factor: f64) {
    if factor != 0.0 {
        for (v, p) in row.iter_mut().zip(pivot_row) {
            *v -= factor * p;
        }
    }
}

/// Gauss-Jordan inversion with partial pivoting; `None` when singular.
fn invert(mut a: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| {
            a[x * m + c]
                .abs()
                .partial_cmp(&a[y * m + c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[p * m + c].abs() < 1e-14 {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let d = a[c * m + c];
        for k in 0..m {
            a[c * m + k] /= d;
            inv[c * m + k] /= d;
        }
        for r in 0..m {
            if r == c {
                continue;
            }
            let f = a[r * m + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[c * m + k];
                inv[r * m + k] -= f * inv[c * m + k];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn unconstrained_box_maximum() {
        let p = LpProblem::with_unit_box(vec![1.0; 3], vec![], vec![], vec![]).unwrap();
        let s = solve(&p, &opts());
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(s.objective_value, 3.0);
    }

    #[test]
    fn row_below_reachable_minimum_is_infeasible() {
        let p = LpProblem::with_unit_box(vec![1.0, 1.0], vec![1.0, 1.0], vec![-2.0], vec![-1.0])
            .unwrap();
        let s = solve(&p, &opts());
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.infeasibility > opts().tol_feas);
        assert!((s.infeasibility - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_mean_constraint() {
        // Points (-3, 1, 1) with zero-mean constraint: the far point enters at 2/3.
        let p = LpProblem::with_unit_box(vec![1.0; 3], vec![-3.0, 1.0, 1.0], vec![0.0], vec![0.0])
            .unwrap();
        let s = solve(&p, &opts());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(&s.values[1..], &[1.0, 1.0]);
        assert!((s.objective_value - 8.0 / 3.0).abs() < 1e-12);
        // Reduced cost of the fractional point vanishes: 1 + 3y = 0.
        assert!((s.row_duals[0] + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn phase_one_reaches_pinned_lower_bounds() {
        // h0 pinned to 1 forces h1 >= 0.5 through 2*h1 - h0 >= 0.
        let p = LpProblem::new(
            vec![0.0, -1.0],
            vec![-1.0, 2.0],
            vec![0.0],
            vec![10.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let s = solve(&p, &opts());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[1] - 0.5).abs() < 1e-12);
        assert_eq!(s.values[0], 1.0);
    }

    #[test]
    fn iteration_limit_is_a_status() {
        let p = LpProblem::with_unit_box(vec![1.0; 3], vec![1.0, 1.0, 1.0], vec![0.0], vec![1.5])
            .unwrap();
        let s = solve(
            &p,
            &SolverOptions {
                max_iterations: 1,
                ..opts()
            },
        );
        assert_eq!(s.status, LpStatus::IterationLimit);
    }

    #[test]
    fn inverse_matches_identity() {
        let a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let inv = invert(a.clone(), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(invert(vec![1.0, 2.0, 2.0, 4.0], 2).is_none());
    }
}

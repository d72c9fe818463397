//! Test-only oracles, independent of the library's solve paths.
#![allow(dead_code)]

use maxprob::lp::LpProblem;
use rand::Rng;

/// Best objective over all basic feasible solutions, found by enumerating
/// every choice of fractional variables, active rows with their side, and
/// 0/1 placement of the remaining variables. `None` when nothing is feasible.
pub fn brute_force_lp(p: &LpProblem) -> Option<f64> {
    const TOL: f64 = 1e-9;
    let n = p.num_vars();
    let m = p.num_rows();
    let a = |k: usize, j: usize| p.row(k)[j];
    let mut best: Option<f64> = None;

    for f in 0..=m.min(n) {
        for free in subsets(n, f) {
            let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
            for active in subsets(m, f) {
                let sides = 1usize << f;
                for side in 0..sides {
                    // Skip duplicate sides of equality rows.
                    if active
                        .iter()
                        .enumerate()
                        .any(|(t, &k)| side >> t & 1 == 1 && p.row_lower()[k] == p.row_upper()[k])
                    {
                        continue;
                    }
                    let target: Vec<f64> = active
                        .iter()
                        .enumerate()
                        .map(|(t, &k)| {
                            if side >> t & 1 == 1 {
                                p.row_upper()[k]
                            } else {
                                p.row_lower()[k]
                            }
                        })
                        .collect();
                    let mat: Vec<f64> = active
                        .iter()
                        .flat_map(|&k| free.iter().map(move |&j| a(k, j)))
                        .collect();
                    let Some(inv) = small_inverse(&mat, f) else {
                        continue;
                    };

                    // Walk all placements of the fixed variables in Gray-code order.
                    let mut x = vec![0.0; n];
                    for &j in &fixed {
                        x[j] = p.var_lower()[j];
                    }
                    let mut fixed_act: Vec<f64> = (0..m)
                        .map(|k| fixed.iter().map(|&j| a(k, j) * x[j]).sum())
                        .collect();
                    let count = 1u64 << fixed.len();
                    for step in 0..count {
                        if step > 0 {
                            let bit = step.trailing_zeros() as usize;
                            let j = fixed[bit];
                            let new = if x[j] == p.var_lower()[j] {
                                p.var_upper()[j]
                            } else {
                                p.var_lower()[j]
                            };
                            let delta = new - x[j];
                            x[j] = new;
                            for (k, fa) in fixed_act.iter_mut().enumerate() {
                                *fa += a(k, j) * delta;
                            }
                        }
                        let rhs: Vec<f64> = active
                            .iter()
                            .enumerate()
                            .map(|(t, &k)| target[t] - fixed_act[k])
                            .collect();
                        let mut ok = true;
                        for (r, &j) in free.iter().enumerate() {
                            let v: f64 = (0..f).map(|c| inv[r * f + c] * rhs[c]).sum();
                            if v < p.var_lower()[j] - TOL || v > p.var_upper()[j] + TOL {
                                ok = false;
                                break;
                            }
                            x[j] = v;
                        }
                        if !ok {
                            continue;
                        }
                        for (k, &fa) in fixed_act.iter().enumerate() {
                            let act = fa + free.iter().map(|&j| a(k, j) * x[j]).sum::<f64>();
                            if act < p.row_lower()[k] - TOL || act > p.row_upper()[k] + TOL {
                                ok = false;
                                break;
                            }
                        }
                        if ok {
                            let obj: f64 = (0..n).map(|j| p.objective()[j] * x[j]).sum();
                            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
                        }
                    }
                }
            }
        }
    }
    best
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn small_inverse(a: &[f64], f: usize) -> Option<Vec<f64>> {
    if f == 0 {
        return Some(Vec::new());
    }
    let m = nalgebra::DMatrix::from_row_slice(f, f, a);
    if m.determinant().abs() < 1e-10 {
        return None;
    }
    let inv = m.try_inverse()?;
    Some((0..f * f).map(|i| inv[(i / f, i % f)]).collect())
}

/// Random unit-box LP with `n <= max_n`, `m <= max_m`. About one in ten has
/// arbitrary row bands that may be infeasible; the rest contain a known point.
pub fn random_lp<R: Rng>(rng: &mut R, max_n: usize, max_m: usize) -> LpProblem {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=max_m);
    let integral = rng.random_bool(0.5);
    let coef = |rng: &mut R| -> f64 {
        if integral {
            rng.random_range(-2i32..=2) as f64
        } else {
            rng.random_range(-1.0..1.0)
        }
    };
    let objective: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
    let rows: Vec<f64> = (0..n * m).map(|_| coef(rng)).collect();
    let x0: Vec<f64> = (0..n)
        .map(|_| {
            if integral {
                rng.random_range(0..=1) as f64
            } else {
                rng.random()
            }
        })
        .collect();
    let wild = rng.random_bool(0.1);
    let mut lo = Vec::with_capacity(m);
    let mut hi = Vec::with_capacity(m);
    for k in 0..m {
        let act: f64 = (0..n).map(|j| rows[k * n + j] * x0[j]).sum();
        let (l, h) = if wild {
            let l = rng.random_range(-3.0..3.0);
            (l, l + rng.random_range(0.0..0.5))
        } else {
            match rng.random_range(0..3) {
                0 => (act, act),
                1 => (
                    act - rng.random_range(0.0..1.0),
                    act + rng.random_range(0.0..1.0),
                ),
                _ => (act - 10.0, act),
            }
        };
        lo.push(l);
        hi.push(h);
    }
    LpProblem::with_unit_box(objective, rows, lo, hi).unwrap()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.symmetric_eigenvalues().min()
}

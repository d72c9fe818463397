//! Plain-text dump of an [`LpProblem`] for offline inspection.
//!
//! ```text
//! lp <num_vars> <num_rows>
//! objective c_1 ... c_n
//! var_lower l_1 ... l_n
//! var_upper u_1 ... u_n
//! row <lower> <upper> a_1 ... a_n      (one line per constraint)
//! ```
//!
//! Fields are separated by single spaces; numbers use Rust's shortest
//! round-trip formatting. Lines starting with `#` are ignored on input.
//! The layout is a debugging aid and may change.

use std::fmt::Write as _;

use super::{LpError, LpProblem};

pub fn write_dump(problem: &LpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lp {} {}", problem.num_vars(), problem.num_rows());
    push_line(&mut out, "objective", problem.objective());
    push_line(&mut out, "var_lower", problem.var_lower());
    push_line(&mut out, "var_upper", problem.var_upper());
    for k in 0..problem.num_rows() {
        let _ = write!(
            out,
            "row {} {}",
            problem.row_lower()[k],
            problem.row_upper()[k]
        );
        for a in problem.row(k) {
            let _ = write!(out, " {a}");
        }
        out.push('\n');
    }
    out
}

fn push_line(out: &mut String, tag: &str, values: &[f64]) {
    out.push_str(tag);
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

pub fn parse_dump(text: &str) -> Result<LpProblem, LpError> {
    let mut dims: Option<(usize, usize)> = None;
    let mut objective = None;
    let mut var_lower = None;
    let mut var_upper = None;
    let mut rows = Vec::new();
    let mut row_lower = Vec::new();
    let mut row_upper = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut fields = raw.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let err = |msg: String| LpError::Dump { line, msg };
        if tag == "lp" {
            let mut next_usize = || -> Result<usize, LpError> {
                fields
                    .next()
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| err("expected `lp <num_vars> <num_rows>`".into()))
            };
            dims = Some((next_usize()?, next_usize()?));
            continue;
        }
        let (n, _) = dims.ok_or_else(|| err("missing `lp` header line".into()))?;
        let numbers = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(format!("bad number `{f}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let expect = |len: usize| {
            if numbers.len() == len {
                Ok(())
            } else {
                Err(err(format!(
                    "expected {len} numbers, found {}",
                    numbers.len()
                )))
            }
        };
        match tag {
            "objective" => {
                expect(n)?;
                objective = Some(numbers);
            }
            "var_lower" => {
                expect(n)?;
                var_lower = Some(numbers);
            }
            "var_upper" => {
                expect(n)?;
                var_upper = Some(numbers);
            }
            "row" => {
                expect(n + 2)?;
                row_lower.push(numbers[0]);
                row_upper.push(numbers[1]);
                rows.extend_from_slice(&numbers[2..]);
            }
            other => return Err(err(format!("unknown line tag `{other}`"))),
        }
    }

    let (n, m) = dims.ok_or(LpError::Dump {
        line: 0,
        msg: "empty dump".into(),
    })?;
    if row_lower.len() != m {
        return Err(LpError::Dump {
            line: 0,
            msg: format!("header declares {m} rows, found {}", row_lower.len()),
        });
    }
    let missing = |what: &str| LpError::Dump {
        line: 0,
        msg: format!("missing `{what}` line"),
    };
    let objective = objective.ok_or_else(|| missing("objective"))?;
    let var_lower = var_lower.unwrap_or_else(|| vec![0.0; n]);
    let var_upper = var_upper.unwrap_or_else(|| vec![1.0; n]);
    LpProblem::new(objective, rows, row_lower, row_upper, var_lower, var_upper)
}

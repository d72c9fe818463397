//! Solve a small LP, certify the answer and round-trip it through the dump format.
//!
//! `cargo run --example solve_lp`

use maxprob::lp::{certify, parse_dump, solve, write_dump, LpProblem, SolverOptions};

fn main() {
    // maximize h0 + h1 + h2 with -3 h0 + h1 + h2 = 0 and 0 <= h <= 1
    let problem =
        LpProblem::with_unit_box(vec![1.0; 3], vec![-3.0, 1.0, 1.0], vec![0.0], vec![0.0])
            .expect("valid problem");
    let options = SolverOptions::default();
    let solution = solve(&problem, &options);
    println!("status     {}", solution.status);
    println!("values     {:?}", solution.values);
    println!("objective  {}", solution.objective_value);
    println!("row duals  {:?}", solution.row_duals);

    let report = certify(&problem, &solution, &options);
    for check in report.checks() {
        println!(
            "check {:<24} {}",
            check.name,
            if check.passed { "ok" } else { "FAILED" }
        );
    }

    let text = write_dump(&problem);
    print!("\n{text}");
    let again = parse_dump(&text).expect("dump parses");
    assert_eq!(solve(&again, &options).values, solution.values);
}

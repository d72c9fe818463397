//! Repeated split-and-sample sweep over labeled-sample sizes, printing the
//! aggregate table. Results do not depend on the thread count.
//!
//! `cargo run --release --example sample_size_sweep [threads]`

use maxprob::classifier::{EpsilonPolicy, ModeConfig};
use maxprob::data::gen_halfspace;
use maxprob::eval::{aggregate, run_sweep, write_aggregate_csv, SweepConfig};

fn main() {
    let threads = std::env::args().nth(1).map(|s| s.parse().expect("threads"));
    let data = gen_halfspace(7, 800, 1200, 5).expect("generator");
    let mut config = SweepConfig::with_defaults(
        ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.1 }),
        1000,
        42,
    );
    config.sizes = (1..=12).map(|k| 25 * k).collect();
    config.repetitions = 20;

    let records = run_sweep(&data, &config, threads).expect("sweep");
    let rows = aggregate(&records).expect("aggregate");
    write_aggregate_csv(&rows, std::io::stdout()).expect("stdout");
}

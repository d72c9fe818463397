//! The digit experiment: class "0" against the other digits, pool of 3100,
//! evaluation on the remaining points, sizes 25..500.
//!
//! Convert the data first with `scripts/usps_to_csv.py`, then
//! `cargo run --release --example usps_experiment -- usps.csv [reps]`

use maxprob::classifier::{EpsilonPolicy, ModeConfig};
use maxprob::data::{load_csv, CsvOptions};
use maxprob::eval::{aggregate, run_sweep, write_aggregate_csv, SweepConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("usage: usps_experiment <csv> [reps]");
    let reps: usize = args.next().map_or(100, |s| s.parse().expect("reps"));
    let options = CsvOptions {
        has_header: true,
        label_column: Some(0),
        positive_label: Some(0.0),
    };
    let data = load_csv(&path, &options).expect("load");
    eprintln!(
        "{} points, {} features, {} zeros",
        data.len(),
        data.dim(),
        data.class_indices().unwrap().len()
    );

    let mut config = SweepConfig::with_defaults(
        ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.1 }),
        3100,
        1,
    );
    config.repetitions = reps;
    let records = run_sweep(&data, &config, None).expect("sweep");
    write_aggregate_csv(&aggregate(&records).expect("aggregate"), std::io::stdout())
        .expect("stdout");
}

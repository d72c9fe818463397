//! SECOND_ORDER mode: matching the first and second moments picks out an
//! elliptical class inside a surrounding shell.
//!
//! `cargo run --release --example gaussian_second_order [seed]`

use maxprob::classifier::{harden, transduce_detailed, EpsilonPolicy, ModeConfig, Reference};
use maxprob::data::{gen_gaussian, sample_labeled};
use maxprob::eval::precision_recall;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed"));
    let data = gen_gaussian(seed, 300, 750, 2).expect("generator");
    let labeled = sample_labeled(&data.class_indices().unwrap(), 100, seed).expect("sample");

    for config in [
        ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.05 }),
        ModeConfig::second_order().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.05 }),
    ] {
        let t = transduce_detailed(&data, Reference::Labeled(&labeled), &config).expect("solve");
        let pr = precision_recall(&harden(&t.labeling, 0.5), data.truth().unwrap(), None).unwrap();
        println!(
            "{:<14} rows {}  precision {:.3}  recall {:.3}",
            format!("{:?}", config.mode),
            t.built.problem.num_rows(),
            pr.precision,
            pr.recall
        );
    }
}

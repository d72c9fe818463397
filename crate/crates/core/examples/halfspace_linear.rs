//! LINEAR mode on a linearly separable cloud: 300 class points, 750 others,
//! 100 of the class labeled. Prints precision, recall and the recovered
//! separating hyperplane.
//!
//! `cargo run --release --example halfspace_linear [seed]`

use maxprob::classifier::{
    harden, recover_hyperplane, transduce_detailed, EpsilonPolicy, ModeConfig, Reference,
};
use maxprob::data::{gen_halfspace_with_plane, sample_labeled};
use maxprob::eval::precision_recall;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed"));
    let (data, plane) = gen_halfspace_with_plane(seed, 300, 750, 2).expect("generator");
    let labeled = sample_labeled(&data.class_indices().unwrap(), 100, seed).expect("sample");

    let config = ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.25 });
    let t = transduce_detailed(&data, Reference::Labeled(&labeled), &config).expect("solve");
    let predicted = harden(&t.labeling, config.threshold);
    let pr = precision_recall(&predicted, data.truth().unwrap(), None).unwrap();
    println!(
        "objective {:.3}  precision {:.3}  recall {:.3}  iterations {}",
        t.labeling.objective, pr.precision, pr.recall, t.solution.iterations
    );

    let found = recover_hyperplane(
        &t.built.problem,
        &t.solution,
        &data,
        config.solver.fraction_threshold,
    )
    .expect("hyperplane");
    // Both as `normal · x + d = 0`. The recovered plane supports the chosen
    // set, so it sits at the edge of a cloud rather than mid-gap.
    println!(
        "generating normal {:?} d {:.3}",
        plane.normal, -plane.offset
    );
    println!("recovered  normal {:?} d {:.3}", found.normal, found.offset);
}

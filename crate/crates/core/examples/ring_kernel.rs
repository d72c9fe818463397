//! KERNEL mode with an RBF kernel on a disk surrounded by an annulus, which no
//! line separates. One LP row per landmark.
//!
//! `cargo run --release --example ring_kernel [seed] [gamma]`

use maxprob::classifier::{harden, transduce_detailed, LandmarkPolicy, ModeConfig, Reference};
use maxprob::data::{gen_ring, sample_labeled};
use maxprob::eval::precision_recall;
use maxprob::features::KernelSpec;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let gamma: f64 = args.next().map_or(1.0, |s| s.parse().expect("gamma"));
    let data = gen_ring(seed, 450, 600, 2).expect("generator");
    let labeled = sample_labeled(&data.class_indices().unwrap(), 150, seed).expect("sample");

    let config = ModeConfig::kernel(
        KernelSpec::Rbf { gamma },
        LandmarkPolicy::Random { count: 200, seed },
    );
    let t = transduce_detailed(&data, Reference::Labeled(&labeled), &config).expect("solve");
    let pr = precision_recall(&harden(&t.labeling, 0.5), data.truth().unwrap(), None).unwrap();
    println!(
        "landmarks {}  precision {:.3}  recall {:.3}  iterations {}",
        t.built.landmarks.len(),
        pr.precision,
        pr.recall,
        t.solution.iterations
    );

    let linear = transduce_detailed(&data, Reference::Labeled(&labeled), &ModeConfig::linear())
        .expect("solve");
    let pr = precision_recall(&harden(&linear.labeling, 0.5), data.truth().unwrap(), None).unwrap();
    println!(
        "linear mode for comparison: precision {:.3}  recall {:.3}",
        pr.precision, pr.recall
    );
}

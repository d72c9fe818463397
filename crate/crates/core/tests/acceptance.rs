//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line under `cargo test`; exits nonzero if any criterion fails.
//!
//! Set `MAXPROB_USPS_CSV` to a CSV of the digit data (label in column 0,
//! header row) to enable the optional digit check.

mod common;

use std::time::{Duration, Instant};

use common::{brute_force_lp, random_lp};
use maxprob::classifier::{
    harden, transduce_detailed, EpsilonPolicy, LandmarkPolicy, ModeConfig, Reference, Transduction,
};
use maxprob::data::{
    gen_gaussian, gen_halfspace, gen_ring, load_csv, sample_labeled, CsvOptions, Dataset,
};
use maxprob::eval::{
    aggregate, precision_recall, run_sweep, spearman, write_records_csv, AggregateRow, Metric,
    MetricsRecord, RunStatus, SweepConfig,
};
use maxprob::features::KernelSpec;
use maxprob::lp::{self, LpStatus, SolverOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEEDS: u64 = 20;
const FRACTION_THRESHOLD: f64 = 1e-7;

#[derive(Default)]
struct Suite {
    failures: usize,
    /// Solves checked for the vertex invariant, and how many broke it.
    vertex_checked: usize,
    vertex_violations: usize,
}

impl Suite {
    fn report(&mut self, id: u32, name: &str, passed: bool, detail: String) {
        let tag = if passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id} ({name}): {detail}");
        if !passed {
            self.failures += 1;
        }
    }

    fn check_vertex(&mut self, problem: &lp::LpProblem, solution: &lp::LpSolution) {
        if solution.status != LpStatus::Optimal {
            return;
        }
        self.vertex_checked += 1;
        if solution
            .fractional_indices(problem, FRACTION_THRESHOLD)
            .len()
            > problem.num_rows()
        {
            self.vertex_violations += 1;
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Scenario {
    Halfspace,
    Gaussian,
    Ring,
}

impl Scenario {
    fn dataset(self, seed: u64) -> Dataset {
        match self {
            Scenario::Halfspace => gen_halfspace(seed, 300, 750, 2),
            Scenario::Gaussian => gen_gaussian(seed, 300, 750, 2),
            Scenario::Ring => gen_ring(seed, 450, 600, 2),
        }
        .expect("generator")
    }

    fn labeled_count(self) -> usize {
        match self {
            Scenario::Ring => 150,
            _ => 100,
        }
    }

    fn config(self, seed: u64) -> ModeConfig {
        match self {
            Scenario::Halfspace => {
                ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.25 })
            }
            Scenario::Gaussian => ModeConfig::second_order()
                .with_epsilon(EpsilonPolicy::StandardError { kappa: 0.05 }),
            Scenario::Ring => ModeConfig::kernel(
                KernelSpec::Rbf { gamma: 1.0 },
                LandmarkPolicy::Random { count: 200, seed },
            )
            .with_epsilon(EpsilonPolicy::StandardError { kappa: 1.0 }),
        }
    }
}

struct SeedRun {
    transduction: Transduction,
    record: MetricsRecord,
}

fn record(
    size: usize,
    run: usize,
    t: &Transduction,
    truth: &[bool],
    threshold: f64,
) -> MetricsRecord {
    let pr = precision_recall(&harden(&t.labeling, threshold), truth, None).expect("lengths");
    MetricsRecord {
        sample_size: size,
        run_index: run,
        precision: pr.precision,
        recall: pr.recall,
        objective: t.labeling.objective,
        status: RunStatus::Optimal,
        wall_ms: 0,
        precision_degenerate: pr.precision_degenerate,
        recall_degenerate: pr.recall_degenerate,
    }
}

fn run_scenario(scenario: Scenario, threads: usize) -> Vec<SeedRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool");
    pool.install(|| {
        (0..SEEDS)
            .into_par_iter()
            .map(|seed| {
                let d = scenario.dataset(seed);
                let l = scenario.labeled_count();
                let labeled =
                    sample_labeled(&d.class_indices().unwrap(), l, 1000 + seed).expect("sample");
                let cfg = scenario.config(seed);
                let t = transduce_detailed(&d, Reference::Labeled(&labeled), &cfg)
                    .unwrap_or_else(|e| panic!("{scenario:?} seed {seed}: {e}"));
                let record = record(l, seed as usize, &t, d.truth().unwrap(), cfg.threshold);
                SeedRun {
                    transduction: t,
                    record,
                }
            })
            .collect()
    })
}

fn exact_mean_runs(threads: usize) -> Vec<(SeedRun, usize, usize)> {
    let cfg = ModeConfig::linear()
        .with_epsilon(EpsilonPolicy::Fixed { epsilon: 1e-12 })
        .with_pin_labeled(false);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool");
    pool.install(|| {
        (0..SEEDS)
            .into_par_iter()
            .map(|seed| {
                let d = gen_halfspace(seed, 300, 750, 2).unwrap();
                let members = d.class_indices().unwrap();
                let alpha: Vec<f64> = (0..d.dim())
                    .map(|k| {
                        members.iter().map(|&i| d.point(i)[k]).sum::<f64>() / members.len() as f64
                    })
                    .collect();
                let t = transduce_detailed(&d, Reference::Mean(&alpha), &cfg).expect("solve");
                let truth = d.truth().unwrap();
                let errors = harden(&t.labeling, cfg.threshold)
                    .iter()
                    .zip(truth)
                    .filter(|(p, t)| p != t)
                    .count();
                let record = record(0, seed as usize, &t, truth, cfg.threshold);
                (
                    SeedRun {
                        transduction: t,
                        record,
                    },
                    errors,
                    d.len(),
                )
            })
            .collect()
    })
}

fn sweep_config() -> (Dataset, SweepConfig) {
    let d = gen_halfspace(7, 800, 1200, 5).unwrap();
    let mut cfg = SweepConfig::with_defaults(
        ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.1 }),
        1000,
        42,
    );
    cfg.sizes = (1..=12).map(|k| 25 * k).collect();
    cfg.repetitions = 20;
    (d, cfg)
}

fn records_csv(records: &[MetricsRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf).expect("write");
    buf
}

fn criterion_1_and_2(suite: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = SolverOptions::default();
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut feasible = 0;
    for trial in 0..500 {
        let p = random_lp(&mut rng, 12, 4);
        let s = lp::solve(&p, &opts);
        suite.check_vertex(&p, &s);
        match (brute_force_lp(&p), s.status) {
            (Some(best), LpStatus::Optimal) => {
                feasible += 1;
                if (best - s.objective_value).abs() > 1e-8 {
                    mismatches.push(format!("#{trial}: {} vs {best}", s.objective_value));
                }
            }
            (None, LpStatus::Infeasible) => {}
            (best, status) => mismatches.push(format!("#{trial}: {status} vs oracle {best:?}")),
        }
    }
    let elapsed = start.elapsed();
    suite.report(
        1,
        "oracle equivalence",
        mismatches.is_empty() && elapsed < Duration::from_secs(30),
        format!(
            "500 LPs ({feasible} feasible), {} mismatches {:?}, {:.2?}",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>(),
            elapsed
        ),
    );
}

fn fig1_criterion(suite: &mut Suite, id: u32, scenario: Scenario, p_min: f64, r_min: f64) {
    let start = Instant::now();
    let runs = run_scenario(scenario, 0);
    let elapsed = start.elapsed();
    for r in &runs {
        suite.check_vertex(&r.transduction.built.problem, &r.transduction.solution);
    }
    let ok = runs
        .iter()
        .filter(|r| r.record.precision >= p_min && r.record.recall >= r_min)
        .count();
    let min_p = runs.iter().map(|r| r.record.precision).fold(1.0, f64::min);
    let min_r = runs.iter().map(|r| r.record.recall).fold(1.0, f64::min);
    suite.report(
        id,
        &format!("{scenario:?}").to_lowercase(),
        ok >= 18,
        format!(
            "{ok}/20 seeds with precision >= {p_min} and recall >= {r_min} \
             (min precision {min_p:.3}, min recall {min_r:.3}), {:.2?} per seed",
            elapsed / SEEDS as u32
        ),
    );
}

fn criterion_6(suite: &mut Suite) {
    let runs = exact_mean_runs(0);
    let mut worst = 0;
    let mut allowed = 0.0f64;
    let mut passed = true;
    for (r, errors, n) in &runs {
        suite.check_vertex(&r.transduction.built.problem, &r.transduction.solution);
        let limit = (0.005 * *n as f64).max(1.0);
        allowed = limit;
        worst = worst.max(*errors);
        passed &= (*errors as f64) <= limit;
    }
    suite.report(
        6,
        "exact-mean recovery",
        passed,
        format!("worst seed differs in {worst} points (allowed {allowed})"),
    );
}

fn band(rows: &[AggregateRow], size: usize) -> f64 {
    let r = rows
        .iter()
        .find(|r| r.sample_size == size && r.metric == Metric::Recall)
        .expect("size present");
    r.q90 - r.q10
}

fn criterion_7(suite: &mut Suite) -> Vec<u8> {
    let (d, cfg) = sweep_config();
    let start = Instant::now();
    let records = run_sweep(&d, &cfg, None).expect("sweep");
    let elapsed = start.elapsed();
    let rows = aggregate(&records).expect("aggregate");
    let recall: Vec<&AggregateRow> = rows.iter().filter(|r| r.metric == Metric::Recall).collect();
    let sizes: Vec<f64> = recall.iter().map(|r| r.sample_size as f64).collect();
    let means: Vec<f64> = recall.iter().map(|r| r.mean).collect();
    let rho = spearman(&sizes, &means);
    let (b_small, b_large) = (band(&rows, 25), band(&rows, 300));
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    suite.report(
        7,
        "sample-size sweep",
        rho > 0.8 && b_large < b_small && elapsed < Duration::from_secs(600),
        format!(
            "spearman {rho:.3}, recall band {b_small:.3} at l=25 vs {b_large:.3} at l=300, \
             mean recall {:.3} -> {:.3}, {failed} failed runs, {:.2?}",
            means[0],
            means[means.len() - 1],
            elapsed
        ),
    );
    records_csv(&records)
}

fn criterion_8(suite: &mut Suite) {
    let Ok(path) = std::env::var("MAXPROB_USPS_CSV") else {
        println!("SKIP criterion 8 (digit data): MAXPROB_USPS_CSV not set");
        return;
    };
    let options = CsvOptions {
        has_header: true,
        label_column: Some(0),
        positive_label: Some(0.0),
    };
    let d = match load_csv(&path, &options) {
        Ok(d) => d,
        Err(e) => {
            suite.report(8, "digit data", false, format!("cannot load {path}: {e}"));
            return;
        }
    };
    let mut cfg = SweepConfig::with_defaults(
        ModeConfig::linear().with_epsilon(EpsilonPolicy::StandardError { kappa: 0.1 }),
        3100,
        8,
    );
    cfg.sizes = vec![500];
    cfg.repetitions = 10;
    let records = run_sweep(&d, &cfg, None).expect("sweep");
    let rows = aggregate(&records).expect("aggregate");
    let p = rows[0].mean;
    let r = rows[1].mean;
    suite.report(
        8,
        "digit data",
        p >= 0.85 && r >= 0.85,
        format!(
            "N={}, mean precision {p:.3}, mean recall {r:.3} at l=500 over 10 reps",
            d.len()
        ),
    );
}

fn criterion_9(suite: &mut Suite, sweep_default: &[u8]) {
    let mut diffs = Vec::new();
    for scenario in [Scenario::Halfspace, Scenario::Gaussian, Scenario::Ring] {
        let csv = |threads| {
            let recs: Vec<MetricsRecord> = run_scenario(scenario, threads)
                .into_iter()
                .map(|r| r.record)
                .collect();
            records_csv(&recs)
        };
        if csv(1) != csv(4) {
            diffs.push(format!("{scenario:?}"));
        }
    }
    let exact = |threads| {
        let recs: Vec<MetricsRecord> = exact_mean_runs(threads)
            .into_iter()
            .map(|(r, _, _)| r.record)
            .collect();
        records_csv(&recs)
    };
    if exact(1) != exact(3) {
        diffs.push("exact-mean".into());
    }
    let (d, cfg) = sweep_config();
    for threads in [1, 4] {
        let records = run_sweep(&d, &cfg, Some(threads)).expect("sweep");
        if records_csv(&records) != sweep_default {
            diffs.push(format!("sweep with {threads} threads"));
        }
    }
    suite.report(
        9,
        "determinism",
        diffs.is_empty(),
        if diffs.is_empty() {
            "records CSVs byte-identical across 1, 3, 4 and default thread counts".into()
        } else {
            format!("differences in {diffs:?}")
        },
    );
}

fn main() {
    let mut suite = Suite::default();
    criterion_1_and_2(&mut suite);
    fig1_criterion(&mut suite, 3, Scenario::Halfspace, 0.97, 0.95);
    fig1_criterion(&mut suite, 4, Scenario::Gaussian, 0.90, 0.90);
    fig1_criterion(&mut suite, 5, Scenario::Ring, 0.88, 0.88);
    criterion_6(&mut suite);
    let sweep = criterion_7(&mut suite);
    criterion_8(&mut suite);
    criterion_9(&mut suite, &sweep);
    let (checked, bad) = (suite.vertex_checked, suite.vertex_violations);
    suite.report(
        2,
        "vertex invariant",
        bad == 0,
        format!("{bad} of {checked} optimal solves exceed m fractional values"),
    );
    if suite.failures > 0 {
        println!("{} acceptance criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

//! Precision/recall and the sample-size sweep.
//!
//! A sweep repeats, for every repetition `r`:
//!
//! 1. split the dataset into a pool `T` and an evaluation set `S` with the
//!    seed `derive_seed(base_seed, r)`;
//! 2. for every sample size `l`, draw `l` class members from `T ∩ A` with the
//!    seed `derive_seed(derive_seed(base_seed, r), l)`, take their mean, and
//!    solve the LP over `S` alone;
//! 3. score the hardened labels on `S`.
//!
//! The labeled sample never enters `S`, so larger samples can only help by
//! estimating the mean better. Records depend only on `(base_seed, r, l)`, so
//! results are identical for any thread count.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{harden, transduce_detailed, ClassifierError, ModeConfig, Reference};
use crate::data::{partition, sample_labeled, DataError, Dataset};
use crate::numfmt::sig9;
use crate::seed::derive_seed;

pub const RECORDS_HEADER: &str = "sample_size,run,precision,recall,objective,status,wall_ms";
pub const AGGREGATE_HEADER: &str = "sample_size,metric,mean,q10,q90,n_ok,n_fail";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction has {predicted} entries, truth has {truth}")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("scope index {0} out of range")]
    Scope(usize),
    #[error("no records to aggregate")]
    Empty,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    /// No predicted positives; precision set to 1 by convention.
    pub precision_degenerate: bool,
    /// No true positives in scope; recall set to 1 by convention.
    pub recall_degenerate: bool,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Precision and recall over `scope` (all indices when `None`).
pub fn precision_recall(
    predicted: &[bool],
    truth: &[bool],
    scope: Option<&[usize]>,
) -> Result<PrecisionRecall, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    let mut tally = |i: usize| match (predicted[i], truth[i]) {
        (true, true) => tp += 1,
        (true, false) => fp += 1,
        (false, true) => fneg += 1,
        (false, false) => {}
    };
    match scope {
        Some(idx) => {
            for &i in idx {
                if i >= truth.len() {
                    return Err(EvalError::Scope(i));
                }
                tally(i);
            }
        }
        None => (0..truth.len()).for_each(&mut tally),
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            (1.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (precision, precision_degenerate) = ratio(tp, tp + fp);
    let (recall, recall_degenerate) = ratio(tp, tp + fneg);
    Ok(PrecisionRecall {
        precision,
        recall,
        precision_degenerate,
        recall_degenerate,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
    })
}

/// Outcome of one sweep run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    Unbounded,
    /// The pool held fewer class members than the sample size.
    InsufficientSample,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::Infeasible => "infeasible",
            RunStatus::IterationLimit => "iteration_limit",
            RunStatus::Unbounded => "unbounded",
            RunStatus::InsufficientSample => "insufficient_sample",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub sample_size: usize,
    pub run_index: usize,
    /// NaN when the solve failed.
    pub precision: f64,
    pub recall: f64,
    pub objective: f64,
    pub status: RunStatus,
    pub wall_ms: u64,
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
}

impl MetricsRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Optimal
    }

    fn failed(sample_size: usize, run_index: usize, status: RunStatus) -> Self {
        Self {
            sample_size,
            run_index,
            precision: f64::NAN,
            recall: f64::NAN,
            objective: f64::NAN,
            status,
            wall_ms: 0,
            precision_degenerate: false,
            recall_degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Strictly increasing labeled-sample sizes.
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub classifier: ModeConfig,
    /// Size of the pool `T`; `S` is the rest unless `eval_size` is set.
    pub train_size: usize,
    pub eval_size: Option<usize>,
    /// Measure wall time per solve. Off, `wall_ms` is written as 0 and the
    /// records are reproducible byte for byte.
    pub record_timing: bool,
}

impl SweepConfig {
    /// `25, 50, …, 500` with 100 repetitions.
    pub fn with_defaults(classifier: ModeConfig, train_size: usize, base_seed: u64) -> Self {
        Self {
            sizes: (1..=20).map(|k| 25 * k).collect(),
            repetitions: 100,
            base_seed,
            classifier,
            train_size,
            eval_size: None,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            return Err(EvalError::InvalidSweep("sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::InvalidSweep(
                "sizes must be strictly increasing".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(EvalError::InvalidSweep("zero repetitions".into()));
        }
        self.classifier.validate()?;
        Ok(())
    }
}

/// Run the sweep on up to `threads` worker threads (rayon's default when `None`).
pub fn run_sweep(
    dataset: &Dataset,
    config: &SweepConfig,
    threads: Option<usize>,
) -> Result<Vec<MetricsRecord>, EvalError> {
    config.validate()?;
    if dataset.truth().is_none() {
        return Err(DataError::NoTruth.into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| EvalError::ThreadPool(e.to_string()))?;
    let per_rep: Vec<Result<Vec<MetricsRecord>, EvalError>> = pool.install(|| {
        (0..config.repetitions)
            .into_par_iter()
            .map(|rep| run_repetition(dataset, config, rep))
            .collect()
    });
    let mut records = Vec::with_capacity(config.repetitions * config.sizes.len());
    for r in per_rep {
        records.extend(r?);
    }
    Ok(records)
}

fn run_repetition(
    dataset: &Dataset,
    config: &SweepConfig,
    rep: usize,
) -> Result<Vec<MetricsRecord>, EvalError> {
    let rep_seed = derive_seed(config.base_seed, rep as u64);
    let (train, eval) = partition(dataset.len(), config.train_size, config.eval_size, rep_seed)?;
    let truth = dataset.truth().ok_or(DataError::NoTruth)?;
    let class_pool: Vec<usize> = train.iter().copied().filter(|&i| truth[i]).collect();
    let eval_set = dataset.subset(&eval);
    let eval_truth = eval_set.truth().ok_or(DataError::NoTruth)?;

    let mut out = Vec::with_capacity(config.sizes.len());
    for &size in &config.sizes {
        if size > class_pool.len() {
            out.push(MetricsRecord::failed(
                size,
                rep,
                RunStatus::InsufficientSample,
            ));
            continue;
        }
        let labeled = sample_labeled(&class_pool, size, derive_seed(rep_seed, size as u64))?;
        let sample: Vec<Vec<f64>> = labeled.iter().map(|&i| dataset.point(i).to_vec()).collect();
        let start = Instant::now();
        let result =
            transduce_detailed(&eval_set, Reference::External(&sample), &config.classifier);
        let wall_ms = if config.record_timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        let record = match result {
            Ok(t) => {
                let predicted = harden(&t.labeling, config.classifier.threshold);
                let pr = precision_recall(&predicted, eval_truth, None)?;
                MetricsRecord {
                    sample_size: size,
                    run_index: rep,
                    precision: pr.precision,
                    recall: pr.recall,
                    objective: t.labeling.objective,
                    status: RunStatus::Optimal,
                    wall_ms,
                    precision_degenerate: pr.precision_degenerate,
                    recall_degenerate: pr.recall_degenerate,
                }
            }
            Err(e) => {
                let status = match e {
                    ClassifierError::Infeasible { .. } => RunStatus::Infeasible,
                    ClassifierError::IterationLimit { .. } => RunStatus::IterationLimit,
                    ClassifierError::Unbounded => RunStatus::Unbounded,
                    other => return Err(other.into()),
                };
                MetricsRecord {
                    wall_ms,
                    ..MetricsRecord::failed(size, rep, status)
                }
            }
        };
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Precision,
    Recall,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub sample_size: usize,
    pub metric: Metric,
    /// NaN when every run at this size failed.
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
    pub n_ok: usize,
    pub n_fail: usize,
}

/// Nearest-rank quantile of ascending `sorted`: the value at rank `⌈p·n⌉`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Mean and 10%/90% quantiles per sample size over successful runs; failed
/// runs are only counted.
pub fn aggregate(records: &[MetricsRecord]) -> Result<Vec<AggregateRow>, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sizes: Vec<usize> = records.iter().map(|r| r.sample_size).collect();
    sizes.sort_unstable();
    sizes.dedup();

    let mut rows = Vec::with_capacity(sizes.len() * 2);
    for size in sizes {
        let at: Vec<&MetricsRecord> = records.iter().filter(|r| r.sample_size == size).collect();
        let n_fail = at.iter().filter(|r| !r.is_ok()).count();
        for metric in [Metric::Precision, Metric::Recall] {
            let mut values: Vec<f64> = at
                .iter()
                .filter(|r| r.is_ok())
                .map(|r| match metric {
                    Metric::Precision => r.precision,
                    Metric::Recall => r.recall,
                })
                .collect();
            values.sort_by(f64::total_cmp);
            let mean = if values.is_empty() {
                f64::NAN
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            rows.push(AggregateRow {
                sample_size: size,
                metric,
                mean,
                q10: nearest_rank(&values, 0.1),
                q90: nearest_rank(&values, 0.9),
                n_ok: values.len(),
                n_fail,
            });
        }
    }
    Ok(rows)
}

pub fn write_records_csv<W: Write>(records: &[MetricsRecord], writer: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.sample_size,
            r.run_index,
            sig9(r.precision),
            sig9(r.recall),
            sig9(r.objective),
            r.status,
            r.wall_ms
        )?;
    }
    w.flush()
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], writer: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "{AGGREGATE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.sample_size,
            r.metric.as_str(),
            sig9(r.mean),
            sig9(r.q10),
            sig9(r.q90),
            r.n_ok,
            r.n_fail
        )?;
    }
    w.flush()
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman inputs differ in length");
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(size: usize, run: usize, p: f64, r: f64) -> MetricsRecord {
        MetricsRecord {
            sample_size: size,
            run_index: run,
            precision: p,
            recall: r,
            objective: 0.0,
            status: RunStatus::Optimal,
            wall_ms: 0,
            precision_degenerate: false,
            recall_degenerate: false,
        }
    }

    #[test]
    fn precision_recall_examples() {
        let mut pred = vec![true; 10];
        let mut truth = vec![true; 10];
        truth[9] = false;
        pred.push(false);
        truth.push(false);
        let pr = precision_recall(&pred, &truth, None).unwrap();
        assert_eq!((pr.precision, pr.recall), (0.9, 1.0));

        let pr = precision_recall(&[false, false], &[true, false], None).unwrap();
        assert_eq!((pr.precision, pr.recall), (1.0, 0.0));
        assert!(pr.precision_degenerate && !pr.recall_degenerate);

        let t = [true, false, true];
        let pr = precision_recall(&t, &t, None).unwrap();
        assert_eq!((pr.precision, pr.recall), (1.0, 1.0));

        assert!(matches!(
            precision_recall(&[true], &[true, false], None),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn scope_restricts_counts() {
        let pred = [true, true, false, true];
        let truth = [true, false, true, true];
        let pr = precision_recall(&pred, &truth, Some(&[0, 3])).unwrap();
        assert_eq!((pr.precision, pr.recall), (1.0, 1.0));
        assert!(matches!(
            precision_recall(&pred, &truth, Some(&[4])),
            Err(EvalError::Scope(4))
        ));
    }

    #[test]
    fn aggregate_examples() {
        let rows = aggregate(&[record(25, 0, 0.7, 0.3)]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].mean, rows[0].q10, rows[0].q90), (0.7, 0.7, 0.7));
        assert_eq!(rows[1].metric, Metric::Recall);

        let rows = aggregate(&[record(5, 0, 0.0, 0.0), record(5, 1, 1.0, 1.0)]).unwrap();
        assert_eq!(rows[0].mean, 0.5);

        let many: Vec<MetricsRecord> = (0..100)
            .map(|k| record(50, k, k as f64 / 100.0, 0.0))
            .collect();
        let rows = aggregate(&many).unwrap();
        assert_eq!(rows[0].q10, 0.09);
        assert_eq!(rows[0].q90, 0.89);

        assert!(matches!(aggregate(&[]), Err(EvalError::Empty)));
    }

    #[test]
    fn failures_are_counted_not_averaged() {
        let mut bad = record(10, 1, f64::NAN, f64::NAN);
        bad.status = RunStatus::Infeasible;
        let rows = aggregate(&[record(10, 0, 0.8, 0.6), bad]).unwrap();
        assert_eq!(rows[0].mean, 0.8);
        assert_eq!((rows[0].n_ok, rows[0].n_fail), (1, 1));
    }

    #[test]
    fn csv_headers_exact() {
        let mut buf = Vec::new();
        write_records_csv(&[record(25, 3, 2.0 / 3.0, 1.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "sample_size,run,precision,recall,objective,status,wall_ms\n\
             25,3,0.666666667,1,0,optimal,0\n"
        );
        let mut buf = Vec::new();
        write_aggregate_csv(&aggregate(&[record(25, 0, 0.5, 1.0)]).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sample_size,metric,mean,q10,q90,n_ok,n_fail\n25,precision,0.5,"));
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn sweep_config_validation() {
        let mut cfg = SweepConfig::with_defaults(ModeConfig::linear(), 10, 0);
        assert_eq!(cfg.sizes.len(), 20);
        assert!(cfg.validate().is_ok());
        cfg.sizes = vec![50, 25];
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn aggregate_is_order_invariant(
            values in prop::collection::vec((0usize..3, 0.0f64..1.0, 0.0f64..1.0), 1..40),
            seed in any::<u64>(),
        ) {
            let recs: Vec<MetricsRecord> = values
                .iter()
                .enumerate()
                .map(|(i, &(s, p, r))| record(25 * (s + 1), i, p, r))
                .collect();
            let mut shuffled = recs.clone();
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut crate::seed::rng(seed));
            let a = aggregate(&recs).unwrap();
            let b = aggregate(&shuffled).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!((x.sample_size, x.metric, x.q10, x.q90, x.n_ok), (y.sample_size, y.metric, y.q10, y.q90, y.n_ok));
                prop_assert!((x.mean - y.mean).abs() < 1e-12);
            }
        }
    }
}

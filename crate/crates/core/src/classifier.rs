//! The transductive one-class classifier.
//!
//! Given all points `x_1..x_N` and a labeled sample known to be in the class,
//! we look for the fuzzy indicator `h ∈ [0,1]^N` of largest total mass whose
//! mean, measured in some feature space, matches the labeled sample's mean:
//!
//! ```text
//! maximize    Σ_i h_i
//! subject to  |Σ_i (f_k(x_i) - α_k) h_i| <= ε_k N     for every feature k
//!             0 <= h_i <= 1
//! ```
//!
//! The feature space is the raw coordinates ([`Mode::Linear`]), the
//! coordinates plus all pairwise products ([`Mode::SecondOrder`]), or kernel
//! evaluations against a set of landmark points ([`Mode::Kernel`]). Optimal
//! vertices are 0/1 except on at most `m` points, and the row duals give the
//! direction of a hyperplane separating the `h = 1` points from the `h = 0`
//! ones.

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::features::{
    enrich_second_order, kernel_feature_rows, kernel_unchecked, sample_mean, FeatureError,
    KernelSpec, MeanEstimate, Standardizer,
};
use crate::lp::{self, LpError, LpProblem, LpSolution, LpStatus, SolverOptions};
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("empty labeled sample")]
    EmptySample,
    #[error("labeled index {index} out of range for {len} points")]
    InvalidIndex { index: usize, len: usize },
    #[error("dimension mismatch: dataset has {expected}, reference has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dataset needs at least 2 points, has {0}")]
    TooFewPoints(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "no fuzzy set matches the sample mean within epsilon (phase I residual {residual:.3e}); \
         increase epsilon"
    )]
    Infeasible { residual: f64 },
    #[error("simplex iteration limit reached after {iterations} pivots")]
    IterationLimit { iterations: usize },
    #[error("LP reported unbounded")]
    Unbounded,
    #[error("no supporting direction recovered")]
    NoSupportingDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum LandmarkPolicy {
    /// Every point is a landmark (`m = N`).
    All,
    /// `count` points drawn without replacement with the given seed.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Linear,
    SecondOrder,
    Kernel {
        kernel: KernelSpec,
        landmarks: LandmarkPolicy,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum EpsilonPolicy {
    /// `ε_k = κ · spread_k / √l`, floored at `1e-9 · (1 + |α_k|)`.
    StandardError { kappa: f64 },
    /// The same per-point mean deviation for every row.
    Fixed { epsilon: f64 },
}

impl Default for EpsilonPolicy {
    fn default() -> Self {
        EpsilonPolicy::StandardError { kappa: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeConfig {
    pub mode: Mode,
    pub epsilon: EpsilonPolicy,
    /// Hard-label threshold, `0 < θ < 1`; members have `h >= θ`.
    pub threshold: f64,
    /// Force `h = 1` on labeled points that belong to the dataset.
    pub pin_labeled: bool,
    /// Standardize coordinates (fitted on all `N` points) before building rows.
    pub standardize: bool,
    pub solver: SolverOptions,
}

impl ModeConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            epsilon: EpsilonPolicy::default(),
            threshold: 0.5,
            pin_labeled: true,
            standardize: false,
            solver: SolverOptions::default(),
        }
    }

    pub fn linear() -> Self {
        Self::new(Mode::Linear)
    }

    pub fn second_order() -> Self {
        Self::new(Mode::SecondOrder)
    }

    pub fn kernel(kernel: KernelSpec, landmarks: LandmarkPolicy) -> Self {
        Self::new(Mode::Kernel { kernel, landmarks })
    }

    pub fn with_epsilon(mut self, epsilon: EpsilonPolicy) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_pin_labeled(mut self, pin: bool) -> Self {
        self.pin_labeled = pin;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_standardize(mut self, standardize: bool) -> Self {
        self.standardize = standardize;
        self
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ClassifierError::InvalidConfig(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        match self.epsilon {
            EpsilonPolicy::StandardError { kappa } if !(kappa >= 0.0 && kappa.is_finite()) => {
                return Err(ClassifierError::InvalidConfig(format!("kappa {kappa}")));
            }
            EpsilonPolicy::Fixed { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                return Err(ClassifierError::InvalidConfig(format!("epsilon {epsilon}")));
            }
            _ => {}
        }
        if let Mode::Kernel { kernel, landmarks } = self.mode {
            kernel.validate()?;
            if let LandmarkPolicy::Random { count: 0, .. } = landmarks {
                return Err(ClassifierError::InvalidConfig("zero landmarks".into()));
            }
        }
        Ok(())
    }
}

/// Where the target mean comes from.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// Indices of dataset points known to be in the class.
    Labeled(&'a [usize]),
    /// Known class members that are not part of the dataset.
    External(&'a [Vec<f64>]),
    /// The class mean itself, in the mode's feature space.
    Mean(&'a [f64]),
}

/// `(h(x_1), …, h(x_N))` with the labeled indices and total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyLabeling {
    pub values: Vec<f64>,
    pub labeled_indices: Vec<usize>,
    /// `Σ h_i`, i.e. `N · P(h)`.
    pub objective: f64,
}

impl FuzzyLabeling {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// An assembled LP with the quantities it was built from.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: LpProblem,
    /// Target mean and spread in feature space.
    pub estimate: MeanEstimate,
    /// Per-row ε (a per-point mean deviation; bounds are `±ε_k N`).
    pub epsilon: Vec<f64>,
    /// Landmark indices in KERNEL mode, empty otherwise.
    pub landmarks: Vec<usize>,
    pub labeled: Vec<usize>,
}

/// Output of [`transduce_detailed`].
#[derive(Debug, Clone)]
pub struct Transduction {
    pub labeling: FuzzyLabeling,
    pub built: BuiltProblem,
    pub solution: LpSolution,
}

pub fn build_problem(
    dataset: &Dataset,
    labeled_indices: &[usize],
    config: &ModeConfig,
) -> Result<LpProblem, ClassifierError> {
    build(dataset, Reference::Labeled(labeled_indices), config).map(|b| b.problem)
}

pub fn build(
    dataset: &Dataset,
    reference: Reference<'_>,
    config: &ModeConfig,
) -> Result<BuiltProblem, ClassifierError> {
    config.validate()?;
    let n_points = dataset.len();
    if n_points < 2 {
        return Err(ClassifierError::TooFewPoints(n_points));
    }
    let dim = dataset.dim();
    match reference {
        Reference::Labeled(idx) => {
            if idx.is_empty() {
                return Err(ClassifierError::EmptySample);
            }
            if let Some(&index) = idx.iter().find(|&&i| i >= n_points) {
                return Err(ClassifierError::InvalidIndex {
                    index,
                    len: n_points,
                });
            }
        }
        Reference::External(points) => {
            if points.is_empty() {
                return Err(ClassifierError::EmptySample);
            }
            if let Some(p) = points.iter().find(|p| p.len() != dim) {
                return Err(ClassifierError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        Reference::Mean(_) => {}
    }

    let standardizer = if config.standardize {
        Some(Standardizer::fit(dataset.rows())?)
    } else {
        None
    };
    let prepare = |x: &[f64]| match &standardizer {
        Some(s) => s.apply(x),
        None => x.to_vec(),
    };
    let points: Vec<Vec<f64>> = dataset.rows().map(prepare).collect();
    let point_refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();

    // Feature matrix, one row per constraint (feature) and one column per point.
    let (features, landmarks): (Vec<Vec<f64>>, Vec<usize>) = match config.mode {
        Mode::Linear => (
            transpose(point_refs.iter().map(|p| p.to_vec()), dim),
            Vec::new(),
        ),
        Mode::SecondOrder => {
            let width = crate::features::second_order_dim(dim);
            (
                transpose(point_refs.iter().map(|p| enrich_second_order(p)), width),
                Vec::new(),
            )
        }
        Mode::Kernel { kernel, landmarks } => {
            let chosen = choose_landmarks(landmarks, n_points);
            (kernel_feature_rows(&kernel, &point_refs, &chosen)?, chosen)
        }
    };
    let width = features.len();

    let sample_features = |x: &[f64]| -> Vec<f64> {
        match config.mode {
            Mode::Linear => x.to_vec(),
            Mode::SecondOrder => enrich_second_order(x),
            Mode::Kernel { kernel, .. } => landmarks
                .iter()
                .map(|&r| kernel_unchecked(&kernel, x, point_refs[r]))
                .collect(),
        }
    };
    let (estimate, labeled) = match reference {
        Reference::Labeled(idx) => {
            let f: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| sample_features(point_refs[i]))
                .collect();
            (sample_mean(f.iter().map(Vec::as_slice))?, idx.to_vec())
        }
        Reference::External(ext) => {
            let f: Vec<Vec<f64>> = ext.iter().map(|p| sample_features(&prepare(p))).collect();
            (sample_mean(f.iter().map(Vec::as_slice))?, Vec::new())
        }
        Reference::Mean(alpha) => {
            let alpha = match (&standardizer, config.mode) {
                (Some(s), Mode::Linear) => s.apply(alpha),
                (Some(_), _) => {
                    return Err(ClassifierError::InvalidConfig(
                        "an explicit mean with standardization needs LINEAR mode".into(),
                    ))
                }
                (None, _) => alpha.to_vec(),
            };
            if alpha.len() != width {
                return Err(ClassifierError::DimensionMismatch {
                    expected: width,
                    found: alpha.len(),
                });
            }
            (
                MeanEstimate {
                    spread: vec![0.0; width],
                    sample_size: 1,
                    alpha,
                },
                Vec::new(),
            )
        }
    };

    let epsilon: Vec<f64> = match config.epsilon {
        EpsilonPolicy::StandardError { kappa } => estimate
            .standard_error()
            .iter()
            .zip(&estimate.alpha)
            .map(|(se, a)| (kappa * se).max(1e-9 * (1.0 + a.abs())))
            .collect(),
        EpsilonPolicy::Fixed { epsilon } => vec![epsilon; width],
    };

    let nf = n_points as f64;
    let mut rows = Vec::with_capacity(width * n_points);
    for (k, feature) in features.iter().enumerate() {
        rows.extend(feature.iter().map(|v| v - estimate.alpha[k]));
    }
    let row_upper: Vec<f64> = epsilon.iter().map(|e| e * nf).collect();
    let row_lower: Vec<f64> = row_upper.iter().map(|u| -u).collect();
    let mut var_lower = vec![0.0; n_points];
    if config.pin_labeled {
        for &i in &labeled {
            var_lower[i] = 1.0;
        }
    }
    let problem = LpProblem::new(
        vec![1.0; n_points],
        rows,
        row_lower,
        row_upper,
        var_lower,
        vec![1.0; n_points],
    )?;
    Ok(BuiltProblem {
        problem,
        estimate,
        epsilon,
        landmarks,
        labeled,
    })
}

fn transpose(points: impl Iterator<Item = Vec<f64>>, width: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); width];
    for p in points {
        for (row, v) in out.iter_mut().zip(p) {
            row.push(v);
        }
    }
    out
}

/// Landmark indices for `policy`, sorted ascending.
pub fn choose_landmarks(policy: LandmarkPolicy, n_points: usize) -> Vec<usize> {
    match policy {
        LandmarkPolicy::All => (0..n_points).collect(),
        LandmarkPolicy::Random { count, seed } if count < n_points => {
            let mut rng = seed::rng(seed);
            let mut v = index::sample(&mut rng, n_points, count).into_vec();
            v.sort_unstable();
            v
        }
        LandmarkPolicy::Random { .. } => (0..n_points).collect(),
    }
}

pub fn transduce(
    dataset: &Dataset,
    labeled_indices: &[usize],
    config: &ModeConfig,
) -> Result<FuzzyLabeling, ClassifierError> {
    transduce_detailed(dataset, Reference::Labeled(labeled_indices), config).map(|t| t.labeling)
}

/// Build, solve and wrap, keeping the LP and its solution.
pub fn transduce_detailed(
    dataset: &Dataset,
    reference: Reference<'_>,
    config: &ModeConfig,
) -> Result<Transduction, ClassifierError> {
    let built = build(dataset, reference, config)?;
    let solution = lp::solve(&built.problem, &config.solver);
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(ClassifierError::Infeasible {
                residual: solution.infeasibility,
            })
        }
        LpStatus::IterationLimit => {
            return Err(ClassifierError::IterationLimit {
                iterations: solution.iterations,
            })
        }
        LpStatus::Unbounded => return Err(ClassifierError::Unbounded),
    }
    let labeling = FuzzyLabeling {
        values: solution.values.clone(),
        labeled_indices: built.labeled.clone(),
        objective: solution.objective_value,
    };
    Ok(Transduction {
        labeling,
        built,
        solution,
    })
}

/// Member iff `h >= threshold`.
pub fn harden(labeling: &FuzzyLabeling, threshold: f64) -> Vec<bool> {
    labeling.values.iter().map(|&v| v >= threshold).collect()
}

/// `normal · x + offset = 0`, `‖normal‖ = 1`, positive on the class side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        crate::lp::dot(&self.normal, x) + self.offset
    }
}

/// Separating hyperplane of a LINEAR-mode solution, read off the row duals.
///
/// At an optimum the reduced cost of point `i` is `1 - y · (x_i - α)`, so
/// points with `h = 1` lie on one side of the hyperplane orthogonal to `y`,
/// points with `h = 0` on the other, and fractional points on it. The offset
/// is fitted by least squares through the fractional points, or placed midway
/// between the two sides when there are none.
pub fn recover_hyperplane(
    problem: &LpProblem,
    solution: &LpSolution,
    dataset: &Dataset,
    fraction_threshold: f64,
) -> Result<Hyperplane, ClassifierError> {
    if problem.num_rows() != dataset.dim() || problem.num_vars() != dataset.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: dataset.dim(),
            found: problem.num_rows(),
        });
    }
    if solution.status != LpStatus::Optimal {
        return Err(ClassifierError::InvalidConfig(format!(
            "solution status is {}",
            solution.status
        )));
    }
    let y = &solution.row_duals;
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if y.iter().all(|v| v.abs() <= 1e-12) {
        return Err(ClassifierError::NoSupportingDirection);
    }
    let mut normal: Vec<f64> = y.iter().map(|v| -v / norm).collect();
    let proj: Vec<f64> = dataset.rows().map(|x| crate::lp::dot(&normal, x)).collect();

    let fractional = solution.fractional_indices(problem, fraction_threshold);
    let mut offset = if fractional.is_empty() {
        let v = &solution.values;
        let high = (0..v.len()).filter(|&i| v[i] >= 0.5).map(|i| proj[i]);
        let low = (0..v.len()).filter(|&i| v[i] < 0.5).map(|i| proj[i]);
        let top_of_low = low.fold(f64::NEG_INFINITY, f64::max);
        let bottom_of_high = high.fold(f64::INFINITY, f64::min);
        if !top_of_low.is_finite() || !bottom_of_high.is_finite() {
            return Err(ClassifierError::NoSupportingDirection);
        }
        -(top_of_low + bottom_of_high) / 2.0
    } else {
        -fractional.iter().map(|&i| proj[i]).sum::<f64>() / fractional.len() as f64
    };

    // Orient so the h = 1 side is positive.
    let (mut pos, mut neg) = (0.0, 0.0);
    for (i, &v) in solution.values.iter().enumerate() {
        let s = proj[i] + offset;
        pos += v * s;
        neg += (1.0 - v) * s;
    }
    let ones: f64 = solution.values.iter().sum();
    let zeros = solution.values.len() as f64 - ones;
    if ones > 0.0 && zeros > 0.0 && pos / ones < neg / zeros {
        normal.iter_mut().for_each(|c| *c = -*c);
        offset = -offset;
    }
    Ok(Hyperplane { normal, offset })
}

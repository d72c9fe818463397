//! Sample moments and the feature maps the mean constraints are written in.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("empty labeled sample")]
    EmptySample,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("landmark index {index} out of range for {len} points")]
    InvalidLandmark { index: usize, len: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32, offset: f64 },
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<(), FeatureError> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, offset } => {
                if degree < 1 {
                    Err(FeatureError::InvalidKernel(
                        "polynomial degree must be >= 1".into(),
                    ))
                } else if !(offset.is_finite() && offset >= 0.0) {
                    Err(FeatureError::InvalidKernel(
                        "polynomial offset must be finite and non-negative".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Rbf { gamma } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(FeatureError::InvalidKernel(
                        "rbf gamma must be positive".into(),
                    ))
                }
            }
        }
    }
}

/// Mean of a labeled sample together with its per-coordinate spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub alpha: Vec<f64>,
    /// Sample standard deviation per coordinate (`l - 1` denominator).
    pub spread: Vec<f64>,
    pub sample_size: usize,
}

impl MeanEstimate {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Standard error of the mean per coordinate.
    pub fn standard_error(&self) -> Vec<f64> {
        let root = (self.sample_size as f64).sqrt();
        self.spread.iter().map(|s| s / root).collect()
    }
}

pub fn sample_mean<'a, I>(points: I) -> Result<MeanEstimate, FeatureError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let points: Vec<&[f64]> = points.into_iter().collect();
    let first = points.first().ok_or(FeatureError::EmptySample)?;
    let dim = first.len();
    let mut alpha = vec![0.0; dim];
    for p in &points {
        if p.len() != dim {
            return Err(FeatureError::DimensionMismatch {
                left: dim,
                right: p.len(),
            });
        }
        for (a, v) in alpha.iter_mut().zip(p.iter()) {
            *a += v;
        }
    }
    let l = points.len() as f64;
    alpha.iter_mut().for_each(|a| *a /= l);

    let spread = if points.len() == 1 {
        vec![0.0; dim]
    } else {
        let mut ss = vec![0.0; dim];
        for p in &points {
            for ((s, v), a) in ss.iter_mut().zip(p.iter()).zip(&alpha) {
                *s += (v - a) * (v - a);
            }
        }
        ss.into_iter().map(|s| (s / (l - 1.0)).sqrt()).collect()
    };

    Ok(MeanEstimate {
        alpha,
        spread,
        sample_size: points.len(),
    })
}

/// Dimension of [`enrich_second_order`]'s output for `n` inputs.
pub fn second_order_dim(n: usize) -> usize {
    n + n * (n + 1) / 2
}

/// `x` followed by every product `x[t] * x[r]` with `t <= r`, lexicographic.
pub fn enrich_second_order(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(second_order_dim(n));
    out.extend_from_slice(x);
    for t in 0..n {
        for r in t..n {
            out.push(x[t] * x[r]);
        }
    }
    out
}

pub fn kernel_value(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, FeatureError> {
    if x.len() != y.len() {
        return Err(FeatureError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(kernel_unchecked(spec, x, y))
}

pub(crate) fn kernel_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match *spec {
        KernelSpec::Linear => crate::lp::dot(x, y),
        KernelSpec::Polynomial { degree, offset } => {
            (crate::lp::dot(x, y) + offset).powi(degree as i32)
        }
        KernelSpec::Rbf { gamma } => {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (-gamma * d2).exp()
        }
    }
}

/// One row per landmark `r`: `K(x_i, x_r)` for every point `i`.
pub fn kernel_feature_rows(
    spec: &KernelSpec,
    all_points: &[&[f64]],
    landmarks: &[usize],
) -> Result<Vec<Vec<f64>>, FeatureError> {
    let len = all_points.len();
    if let Some(&index) = landmarks.iter().find(|&&r| r >= len) {
        return Err(FeatureError::InvalidLandmark { index, len });
    }
    if let Some(first) = all_points.first() {
        if let Some(bad) = all_points.iter().find(|p| p.len() != first.len()) {
            return Err(FeatureError::DimensionMismatch {
                left: first.len(),
                right: bad.len(),
            });
        }
    }
    Ok(landmarks
        .iter()
        .map(|&r| {
            all_points
                .iter()
                .map(|x| kernel_unchecked(spec, x, all_points[r]))
                .collect()
        })
        .collect())
}

/// Per-coordinate zero-mean, unit-variance rescaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fit on `points`; constant coordinates keep scale 1.
    pub fn fit<'a, I>(points: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let est = sample_mean(points)?;
        let scale = est
            .spread
            .iter()
            .map(|&s| if s > 0.0 { s } else { 1.0 })
            .collect();
        Ok(Self {
            center: est.alpha,
            scale,
        })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .zip(&self.scale)
            .map(|((v, c), s)| (v - c) / s)
            .collect()
    }
}

//! Datasets: CSV I/O, the synthetic scenario generators, and seeded splits.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt::sig9;
use crate::seed;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error at line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("ragged row at line {line}: expected {expected} columns, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell `{cell}` at line {line}, column {column}")]
    NonNumeric {
        line: u64,
        column: usize,
        cell: String,
    },
    #[error("no rows")]
    NoRows,
    #[error("label column {column} out of range for {width} columns")]
    LabelColumn { column: usize, width: usize },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("dataset has no truth labels")]
    NoTruth,
    #[error("need {needed} class members in the pool, only {available} available")]
    InsufficientClass { needed: usize, available: usize },
}

/// `N` points in `n` dimensions, optionally with class-membership truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dim: usize,
    /// Row-major `N × n`.
    points: Vec<f64>,
    truth: Option<Vec<bool>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        points: Vec<f64>,
        truth: Option<Vec<bool>>,
    ) -> Result<Self, DataError> {
        if dim == 0 {
            return Err(DataError::Invalid("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(DataError::NoRows);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(DataError::Invalid(format!(
                "{} values do not fill rows of {dim}",
                points.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Invalid("non-finite coordinate".into()));
        }
        let len = points.len() / dim;
        if let Some(t) = &truth {
            if t.len() != len {
                return Err(DataError::Invalid(format!(
                    "truth has {} entries for {len} points",
                    t.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            points,
            truth,
        })
    }

    /// Build from a list of equal-length rows.
    pub fn from_rows(
        name: impl Into<String>,
        rows: &[Vec<f64>],
        truth: Option<Vec<bool>>,
    ) -> Result<Self, DataError> {
        let dim = rows.first().ok_or(DataError::NoRows)?.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(DataError::Invalid("rows differ in length".into()));
        }
        Self::new(name, dim, rows.concat(), truth)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn truth(&self) -> Option<&[bool]> {
        self.truth.as_deref()
    }

    /// Indices `i` with `truth[i]` set.
    pub fn class_indices(&self) -> Option<Vec<usize>> {
        self.truth.as_ref().map(|t| {
            t.iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| i)
                .collect()
        })
    }

    /// Points (and truth) at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            points.extend_from_slice(self.point(i));
        }
        Dataset {
            name: self.name.clone(),
            dim: self.dim,
            points,
            truth: self
                .truth
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
        }
    }

    /// Same points with every coordinate mapped through `f`.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Dataset {
        let mut points = Vec::with_capacity(self.points.len());
        for row in self.rows() {
            points.extend(f(row));
        }
        Dataset {
            name: self.name.clone(),
            dim: points.len() / self.len(),
            points,
            truth: self.truth.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Zero-based column holding class membership; excluded from the features.
    pub label_column: Option<usize>,
    /// When set, a row is a member iff its label equals this value;
    /// otherwise any nonzero label marks a member.
    pub positive_label: Option<f64>,
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, &name, options)
}

pub fn read_csv<R: Read>(
    reader: R,
    name: &str,
    options: &CsvOptions,
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width: Option<usize> = None;
    let mut points = Vec::new();
    let mut truth = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(DataError::Ragged {
                line,
                expected: w,
                found: record.len(),
            });
        }
        if let Some(c) = options.label_column {
            if c >= w {
                return Err(DataError::LabelColumn {
                    column: c,
                    width: w,
                });
            }
        }
        for (column, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                line,
                column,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonNumeric {
                    line,
                    column,
                    cell: cell.to_string(),
                });
            }
            if Some(column) == options.label_column {
                truth.push(match options.positive_label {
                    Some(p) => v == p,
                    None => v != 0.0,
                });
            } else {
                points.push(v);
            }
        }
    }
    let width = width.ok_or(DataError::NoRows)?;
    let dim = width - usize::from(options.label_column.is_some());
    let truth = options.label_column.map(|_| truth);
    Dataset::new(name, dim, points, truth)
}

/// Header `x0,…,x{n-1}` plus `label` when truth is present; 9 significant digits.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<(), DataError> {
    let mut w = std::io::BufWriter::new(writer);
    let mut header: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
    if dataset.truth().is_some() {
        header.push("label".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, row) in dataset.rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|&v| sig9(v)).collect();
        if let Some(t) = dataset.truth() {
            cells.push(if t[i] { "1" } else { "0" }.into());
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// CSV options matching [`write_csv`]'s layout for a dataset of `dim` features.
pub fn written_csv_options(dim: usize) -> CsvOptions {
    CsvOptions {
        has_header: true,
        label_column: Some(dim),
        positive_label: None,
    }
}

fn check_counts(n_class: usize, n_other: usize, dim: usize) -> Result<(), DataError> {
    if n_class == 0 || n_other == 0 || dim == 0 {
        return Err(DataError::Invalid(
            "generator counts and dimension must be positive".into(),
        ));
    }
    Ok(())
}

fn gaussian_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, dim);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Hyperplane `normal · x = offset` used to build a halfspace dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingPlane {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Width of the empty slab around the plane.
    pub margin: f64,
}

/// Width of the empty slab between the two halfspace clouds, in cloud radii.
pub const HALFSPACE_MARGIN: f64 = 4.0;

/// Two unit-ball clouds on opposite sides of a random hyperplane, each at
/// distance `HALFSPACE_MARGIN / 2` from it; the class is on the positive side.
pub fn gen_halfspace(
    seed: u64,
    n_class: usize,
    n_other: usize,
    dim: usize,
) -> Result<Dataset, DataError> {
    gen_halfspace_with_plane(seed, n_class, n_other, dim).map(|(d, _)| d)
}

pub fn gen_halfspace_with_plane(
    seed: u64,
    n_class: usize,
    n_other: usize,
    dim: usize,
) -> Result<(Dataset, GeneratingPlane), DataError> {
    check_counts(n_class, n_other, dim)?;
    let mut rng = seed::rng(seed);
    let normal = unit_vec(&mut rng, dim);
    let offset = rng.random_range(-0.25..0.25);
    let margin = HALFSPACE_MARGIN;

    let mut points = Vec::with_capacity((n_class + n_other) * dim);
    let mut truth = Vec::with_capacity(n_class + n_other);
    for (count, side) in [(n_class, 1.0), (n_other, -1.0)] {
        let shift = offset + side * (1.0 + margin / 2.0);
        for _ in 0..count {
            points.extend(
                ball_point(&mut rng, dim, 0.0, 1.0)
                    .zip(&normal)
                    .map(|(u, n)| u + shift * n),
            );
            truth.push(side > 0.0);
        }
    }
    let ds = Dataset::new("halfspace", dim, points, Some(truth))?;
    Ok((
        ds,
        GeneratingPlane {
            normal,
            offset,
            margin,
        },
    ))
}

/// Uniform point in the shell between radii `lo` and `hi` around the origin.
fn ball_point<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let d = dim as i32;
    let r = rng
        .random_range(lo.powi(d)..=hi.powi(d))
        .powf(1.0 / dim as f64);
    unit_vec(rng, dim).into_iter().map(move |v| v * r)
}

/// Random rotation times `diag(sqrt(lambda))`, with eigenvalues in `[0.1, 1]`
/// and the largest pinned at 1, so the covariance condition number is at most 10.
fn random_covariance_factor<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let mut lambda: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..1.0)).collect();
    lambda[0] = 1.0;
    let mut l = q;
    for (j, lam) in lambda.iter().enumerate() {
        let s = lam.sqrt();
        l.column_mut(j).iter_mut().for_each(|v| *v *= s);
    }
    l
}

/// Mahalanobis radius of the class ellipsoid the other points avoid.
pub const GAUSSIAN_EXCLUSION_RADIUS: f64 = 3.0;
const GAUSSIAN_OUTER_RADIUS: f64 = 6.0;

/// Class drawn from a full-covariance Gaussian; other points uniform in the
/// elliptical shell between Mahalanobis radii 3 and 6 of that Gaussian.
pub fn gen_gaussian(
    seed: u64,
    n_class: usize,
    n_other: usize,
    dim: usize,
) -> Result<Dataset, DataError> {
    check_counts(n_class, n_other, dim)?;
    let mut rng = seed::rng(seed);
    let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let factor = random_covariance_factor(&mut rng, dim);
    let place = |u: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|i| center[i] + (0..dim).map(|j| factor[(i, j)] * u[j]).sum::<f64>())
            .collect()
    };

    let mut points = Vec::with_capacity((n_class + n_other) * dim);
    for _ in 0..n_class {
        points.extend(place(&gaussian_vec(&mut rng, dim)));
    }
    let d = dim as i32;
    let (inner, outer) = (
        GAUSSIAN_EXCLUSION_RADIUS.powi(d),
        GAUSSIAN_OUTER_RADIUS.powi(d),
    );
    for _ in 0..n_other {
        let r = rng.random_range(inner..outer).powf(1.0 / dim as f64);
        let u: Vec<f64> = unit_vec(&mut rng, dim).into_iter().map(|v| v * r).collect();
        points.extend(place(&u));
    }
    Dataset::new("gaussian", dim, points, Some(split_truth(n_class, n_other)))
}

fn split_truth(n_class: usize, n_other: usize) -> Vec<bool> {
    let mut truth = vec![true; n_class];
    truth.resize(n_class + n_other, false);
    truth
}

pub const RING_CLASS_RADIUS: f64 = 1.0;
pub const RING_OTHER_RADII: (f64, f64) = (1.5, 2.5);

/// Class uniform in the unit ball; other points uniform in the shell with
/// radii 1.5 to 2.5 around it.
pub fn gen_ring(
    seed: u64,
    n_class: usize,
    n_other: usize,
    dim: usize,
) -> Result<Dataset, DataError> {
    check_counts(n_class, n_other, dim)?;
    let mut rng = seed::rng(seed);
    let mut points = Vec::with_capacity((n_class + n_other) * dim);
    for _ in 0..n_class {
        points.extend(ball_point(&mut rng, dim, 0.0, RING_CLASS_RADIUS));
    }
    for _ in 0..n_other {
        points.extend(ball_point(
            &mut rng,
            dim,
            RING_OTHER_RADII.0,
            RING_OTHER_RADII.1,
        ));
    }
    Dataset::new("ring", dim, points, Some(split_truth(n_class, n_other)))
}

/// How to carve a dataset into a labeling pool `T` and an evaluation set `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub labeled_count: usize,
    pub train_size: usize,
    /// Defaults to everything not in `T`.
    pub eval_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Sorted indices of the pool `T`.
    pub train: Vec<usize>,
    /// Sorted indices of the evaluation set `S`.
    pub eval: Vec<usize>,
    /// Labeled sample drawn from `T ∩ A`, in draw order.
    pub labeled: Vec<usize>,
}

pub fn split(dataset: &Dataset, plan: &SplitPlan) -> Result<Split, DataError> {
    let truth = dataset.truth().ok_or(DataError::NoTruth)?;
    let mut rng = seed::rng(plan.seed);
    let (train, eval) =
        shuffle_partition(dataset.len(), plan.train_size, plan.eval_size, &mut rng)?;
    let pool: Vec<usize> = train.iter().copied().filter(|&i| truth[i]).collect();
    let labeled = sample_from_pool(&pool, plan.labeled_count, &mut rng)?;
    Ok(Split {
        train,
        eval,
        labeled,
    })
}

/// The `(T, S)` part of [`split`] alone: same seed, same sets.
pub fn partition(
    n: usize,
    train_size: usize,
    eval_size: Option<usize>,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    shuffle_partition(n, train_size, eval_size, &mut seed::rng(seed))
}

fn shuffle_partition<R: Rng>(
    n: usize,
    train_size: usize,
    eval_size: Option<usize>,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    let eval_size = eval_size.unwrap_or(n.saturating_sub(train_size));
    if train_size + eval_size > n || eval_size == 0 {
        return Err(DataError::Invalid(format!(
            "split sizes {train_size} + {eval_size} do not fit {n} points"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut train = order[..train_size].to_vec();
    let mut eval = order[train_size..train_size + eval_size].to_vec();
    train.sort_unstable();
    eval.sort_unstable();
    Ok((train, eval))
}

/// `count` distinct entries of `pool`, drawn with the stream seeded by `seed`.
pub fn sample_labeled(pool: &[usize], count: usize, seed: u64) -> Result<Vec<usize>, DataError> {
    sample_from_pool(pool, count, &mut seed::rng(seed))
}

fn sample_from_pool<R: Rng>(
    pool: &[usize],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>, DataError> {
    if count == 0 || count > pool.len() {
        return Err(DataError::InsufficientClass {
            needed: count.max(1),
            available: pool.len(),
        });
    }
    Ok(index::sample(rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(label: Option<usize>) -> CsvOptions {
        CsvOptions {
            has_header: false,
            label_column: label,
            positive_label: None,
        }
    }

    #[test]
    fn parses_label_column() {
        let d = read_csv("1,0,1\n0,3,0".as_bytes(), "t", &opts(Some(2))).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.truth(), Some(&[true, false][..]));
        assert_eq!(d.point(1), &[0.0, 3.0]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_csv("".as_bytes(), "t", &opts(None)),
            Err(DataError::NoRows)
        ));
        match read_csv("1,2\n3\n".as_bytes(), "t", &opts(None)) {
            Err(DataError::Ragged {
                line,
                expected,
                found,
            }) => {
                assert_eq!((line, expected, found), (2, 2, 1));
            }
            other => panic!("{other:?}"),
        }
        match read_csv("1,2\n3,x\n".as_bytes(), "t", &opts(None)) {
            Err(DataError::NonNumeric { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_csv("1,2\n".as_bytes(), "t", &opts(Some(5))),
            Err(DataError::LabelColumn { .. })
        ));
    }

    #[test]
    fn positive_label_selects_one_value() {
        let o = CsvOptions {
            has_header: true,
            label_column: Some(0),
            positive_label: Some(0.0),
        };
        let d = read_csv("digit,p\n0,1\n3,1\n0,2\n".as_bytes(), "t", &o).unwrap();
        assert_eq!(d.truth(), Some(&[true, false, true][..]));
    }

    #[test]
    fn written_csv_reads_back() {
        let d = gen_ring(3, 5, 7, 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = read_csv(&buf[..], "ring", &written_csv_options(2)).unwrap();
        assert_eq!(back.truth(), d.truth());
        for (a, b) in back.rows().zip(d.rows()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn generator_counts_and_determinism() {
        type Gen = fn(u64, usize, usize, usize) -> Result<Dataset, DataError>;
        let gens: [(Gen, usize, usize); 3] = [
            (gen_halfspace, 300, 750),
            (gen_gaussian, 300, 750),
            (gen_ring, 450, 600),
        ];
        for (g, c, o) in gens {
            let a = g(17, c, o, 2).unwrap();
            assert_eq!(a.len(), c + o);
            assert_eq!(a.class_indices().unwrap().len(), c);
            assert_eq!(a, g(17, c, o, 2).unwrap());
            assert_ne!(a, g(18, c, o, 2).unwrap());
        }
    }

    #[test]
    fn halfspace_tiny_and_separated() {
        let (d, plane) = gen_halfspace_with_plane(4, 1, 1, 1).unwrap();
        assert_eq!(d.len(), 2);
        for (i, x) in d.rows().enumerate() {
            let s = crate::lp::dot(&plane.normal, x) - plane.offset;
            if d.truth().unwrap()[i] {
                assert!(s >= plane.margin / 2.0);
            } else {
                assert!(s <= -plane.margin / 2.0);
            }
        }
    }

    #[test]
    fn gaussian_one_dimensional() {
        let d = gen_gaussian(2, 50, 80, 1).unwrap();
        assert_eq!(d.dim(), 1);
        let class = d.class_indices().unwrap();
        let mean = class.iter().map(|&i| d.point(i)[0]).sum::<f64>() / class.len() as f64;
        // Other points sit outside an interval around the class.
        let nearest_other = (0..d.len())
            .filter(|i| !class.contains(i))
            .map(|i| (d.point(i)[0] - mean).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest_other > 0.5);
    }

    #[test]
    fn ring_radii_ordered() {
        let d = gen_ring(9, 450, 600, 2).unwrap();
        let t = d.truth().unwrap();
        let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let max_class = (0..d.len())
            .filter(|&i| t[i])
            .map(|i| norm(d.point(i)))
            .fold(0.0, f64::max);
        let min_other = (0..d.len())
            .filter(|&i| !t[i])
            .map(|i| norm(d.point(i)))
            .fold(f64::INFINITY, f64::min);
        assert!(max_class <= 1.0 && min_other >= 1.5 - 1e-12);
    }

    #[test]
    fn split_partitions_and_samples_from_pool() {
        let d = gen_halfspace(1, 200, 300, 2).unwrap();
        let plan = SplitPlan {
            seed: 5,
            labeled_count: 30,
            train_size: 200,
            eval_size: None,
        };
        let s = split(&d, &plan).unwrap();
        assert_eq!(s.train.len() + s.eval.len(), d.len());
        let mut all: Vec<usize> = s.train.iter().chain(&s.eval).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..d.len()).collect::<Vec<_>>());
        let t = d.truth().unwrap();
        assert!(s
            .labeled
            .iter()
            .all(|i| t[*i] && s.train.binary_search(i).is_ok()));
        assert_eq!(s, split(&d, &plan).unwrap());
        assert_eq!(
            partition(d.len(), 200, None, 5).unwrap(),
            (s.train.clone(), s.eval.clone())
        );

        let too_many = SplitPlan {
            labeled_count: 10_000,
            ..plan
        };
        assert!(matches!(
            split(&d, &too_many),
            Err(DataError::InsufficientClass { .. })
        ));
    }
}

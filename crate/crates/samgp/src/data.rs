//! Dataset ingestion, Monte-Carlo splitting, per-feature statistics, and the
//! four synthetic benchmark generators.

use std::f64::consts::{E, PI};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("cell at row {row}, column {col} does not parse as a real: `{value}`")]
    Parse {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("cell at row {row}, column {col} is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("target column `{0}` not found")]
    MissingTargetColumn(String),
    #[error("dataset is empty")]
    Empty,
    #[error("dataset needs at least one feature column besides the target")]
    NoFeatures,
    #[error("rows have inconsistent widths (row {row} has {got}, expected {expected})")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("train fraction {0} produces an empty partition")]
    DegenerateSplit(f64),
    #[error("split requires at least 2 rows, dataset has {0}")]
    TooFewRows(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { data, rows, cols }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Matrix {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for r in &rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { data, rows: n, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Copy of the selected rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }

    /// Writes column `col` into `out[0..rows]`.
    pub fn copy_column_into(&self, col: usize, out: &mut [f64]) {
        for (r, slot) in out.iter_mut().enumerate().take(self.rows) {
            *slot = self.get(r, col);
        }
    }
}

/// Population standard deviation (divide by N), 0 for a single value.
pub fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n == 0 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    var.sqrt()
}

/// A regression dataset: features, target, and per-feature population
/// standard deviations recomputed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Matrix,
    pub target: Vec<f64>,
    pub feature_std: Vec<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Matrix, target: Vec<f64>) -> Result<Dataset, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Empty);
        }
        if features.cols() == 0 {
            return Err(DataError::NoFeatures);
        }
        if features.rows() != target.len() {
            return Err(DataError::Shape(format!(
                "{} feature rows vs {} target values",
                features.rows(),
                target.len()
            )));
        }
        for (r, t) in target.iter().enumerate() {
            for c in 0..features.cols() {
                if !features.get(r, c).is_finite() {
                    return Err(DataError::NonFinite { row: r, col: c });
                }
            }
            if !t.is_finite() {
                return Err(DataError::NonFinite {
                    row: r,
                    col: features.cols(),
                });
            }
        }
        let feature_std: Vec<f64> = (0..features.cols())
            .map(|c| population_std((0..features.rows()).map(|r| features.get(r, c))))
            .collect();
        if let Some(c) = feature_std.iter().position(|s| !s.is_finite()) {
            // Finite cells whose variance overflows f64.
            return Err(DataError::Shape(format!(
                "standard deviation of feature column {c} overflows"
            )));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            target,
            feature_std,
        })
    }

    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// New dataset holding a copy of the selected rows; statistics are
    /// recomputed on those rows only.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let features = self.features.select_rows(indices);
        let target = indices.iter().map(|&i| self.target[i]).collect();
        Dataset::new(self.name.clone(), features, target)
            .expect("row subset of a valid dataset is valid")
    }
}

/// Disjoint, exhaustive train/test partition of a parent dataset.
#[derive(Clone, Debug)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_fraction: f64,
}

/// How the target column of a CSV file is identified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TargetColumn {
    Index(usize),
    Name(String),
}

/// Load a CSV of finite reals. `has_header` controls whether the first row
/// is treated as column names (required when the target is given by name).
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &TargetColumn,
    has_header: bool,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DataError::Io {
                path: path_str.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => DataError::Csv {
                path: path_str.clone(),
                source: e,
            },
        })?;

    let headers: Vec<String> = if has_header {
        reader
            .headers()
            .map_err(|e| DataError::Csv {
                path: path_str.clone(),
                source: e,
            })?
            .iter()
            .map(str::to_string)
            .collect()
    } else {
        Vec::new()
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DataError::Csv {
            path: path_str.clone(),
            source: e,
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue; // blank line
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                row: r,
                col: c,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite { row: r, col: c });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(DataError::RaggedRow {
                    row: r,
                    got: row.len(),
                    expected: first.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }

    let width = rows[0].len();
    let target_idx = match target {
        TargetColumn::Index(i) => {
            if *i >= width {
                return Err(DataError::MissingTargetColumn(i.to_string()));
            }
            *i
        }
        TargetColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingTargetColumn(name.clone()))?,
    };
    if width < 2 {
        return Err(DataError::NoFeatures);
    }

    let mut target_vec = Vec::with_capacity(rows.len());
    let mut feature_rows = Vec::with_capacity(rows.len());
    for row in rows {
        let mut features = Vec::with_capacity(width - 1);
        for (c, v) in row.into_iter().enumerate() {
            if c == target_idx {
                target_vec.push(v);
            } else {
                features.push(v);
            }
        }
        feature_rows.push(features);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.clone());
    Dataset::new(name, Matrix::from_rows(feature_rows), target_vec)
}

/// Uniformly random permutation split; `|train| = round(train_fraction * rows)`.
/// Train and test statistics are recomputed on their own rows.
pub fn monte_carlo_split<R: Rng>(
    d: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<SplitPair, DataError> {
    if d.rows() < 2 {
        return Err(DataError::TooFewRows(d.rows()));
    }
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(DataError::DegenerateSplit(train_fraction));
    }
    let n_train = (train_fraction * d.rows() as f64).round() as usize;
    if n_train == 0 || n_train == d.rows() {
        return Err(DataError::DegenerateSplit(train_fraction));
    }
    let mut perm: Vec<usize> = (0..d.rows()).collect();
    use rand::seq::SliceRandom;
    perm.shuffle(rng);
    let train = d.select_rows(&perm[..n_train]);
    let test = d.select_rows(&perm[n_train..]);
    Ok(SplitPair {
        train,
        test,
        train_fraction,
    })
}

/// The four synthetic benchmark functions, each with its sampling box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyntheticFn {
    Levy,
    Ackley,
    Rastrigin,
    Rosenbrock,
}

impl SyntheticFn {
    pub const ALL: [SyntheticFn; 4] = [
        SyntheticFn::Levy,
        SyntheticFn::Ackley,
        SyntheticFn::Rastrigin,
        SyntheticFn::Rosenbrock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticFn::Levy => "levy",
            SyntheticFn::Ackley => "ackley",
            SyntheticFn::Rastrigin => "rastrigin",
            SyntheticFn::Rosenbrock => "rosenbrock",
        }
    }

    pub fn from_name(name: &str) -> Option<SyntheticFn> {
        SyntheticFn::ALL
            .iter()
            .copied()
            .find(|f| f.name() == name.to_lowercase())
    }

    /// Per-coordinate sampling box.
    pub fn domain(self) -> (f64, f64) {
        match self {
            SyntheticFn::Levy => (-10.0, 10.0),
            SyntheticFn::Ackley => (-32.768, 32.768),
            SyntheticFn::Rastrigin => (-5.12, 5.12),
            SyntheticFn::Rosenbrock => (-2.048, 2.048),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            SyntheticFn::Levy => synth_levy(x),
            SyntheticFn::Ackley => synth_ackley(x),
            SyntheticFn::Rastrigin => synth_rastrigin(x),
            SyntheticFn::Rosenbrock => synth_rosenbrock(x),
        }
    }
}

pub fn synth_levy(x: &[f64]) -> f64 {
    assert!(!x.is_empty());
    let w: Vec<f64> = x.iter().map(|xi| 1.0 + (xi - 1.0) / 4.0).collect();
    let d = w.len();
    let mut sum = (PI * w[0]).sin().powi(2);
    for wi in &w[..d - 1] {
        sum += (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2));
    }
    let wd = w[d - 1];
    sum + (wd - 1.0).powi(2) * (1.0 + (2.0 * PI * wd).sin().powi(2))
}

pub fn synth_ackley(x: &[f64]) -> f64 {
    assert!(!x.is_empty());
    let (a, b, c) = (20.0, 0.2, 2.0 * PI);
    let d = x.len() as f64;
    let sum_sq: f64 = x.iter().map(|xi| xi * xi).sum();
    let sum_cos: f64 = x.iter().map(|xi| (c * xi).cos()).sum();
    -a * (-b * (sum_sq / d).sqrt()).exp() - (sum_cos / d).exp() + a + E
}

pub fn synth_rastrigin(x: &[f64]) -> f64 {
    assert!(!x.is_empty());
    10.0 * x.len() as f64
        + x.iter()
            .map(|xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
            .sum::<f64>()
}

pub fn synth_rosenbrock(x: &[f64]) -> f64 {
    assert!(x.len() >= 2);
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

/// Sample `n_points` i.i.d. uniform points from the function's 2-D box and
/// label them with the function value.
pub fn sample_synthetic<R: Rng>(f: SyntheticFn, n_points: usize, rng: &mut R) -> Dataset {
    let (lo, hi) = f.domain();
    let mut rows = Vec::with_capacity(n_points);
    let mut target = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let x = [rng.random_range(lo..=hi), rng.random_range(lo..=hi)];
        target.push(f.eval(&x));
        rows.push(x.to_vec());
    }
    Dataset::new(f.name(), Matrix::from_rows(rows), target)
        .expect("synthetic sample is finite and non-empty")
}

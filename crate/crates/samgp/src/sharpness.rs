//! The two sharpness estimators: terminal-side (input) perturbation and
//! semantics-side (output) perturbation.
//!
//! Input mode draws one shared noise object per generation — a row subsample
//! and its perturbed copy — and scores every individual against that same
//! pair. Output mode needs no tree execution at all: neighbors are the
//! individual's semantics plus bounded elementwise noise.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{population_std, Dataset, Matrix};
use crate::eval::{evaluate, Semantics};
use crate::expr::{perturb_constants, ExprTree};
use crate::fitness::{fitness_of, r_squared, Fitness};

#[derive(Debug, Error)]
pub enum SharpnessError {
    #[error("invalid sharpness configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamMode {
    None,
    In,
    Out,
}

/// Sharpness-estimation parameters: `n` perturbations of magnitude `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamConfig {
    pub mode: SamMode,
    pub n: usize,
    pub epsilon: f64,
}

impl SamConfig {
    pub fn none() -> SamConfig {
        SamConfig {
            mode: SamMode::None,
            n: 1,
            epsilon: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SharpnessError> {
        if self.n == 0 {
            return Err(SharpnessError::InvalidConfig(
                "perturbation count must be at least 1".into(),
            ));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(SharpnessError::InvalidConfig(
                "epsilon must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Per-individual sharpness; lower is better, `Worst` loses every
/// comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Sharpness {
    Finite(f64),
    Worst,
}

impl Sharpness {
    pub fn value(self) -> Option<f64> {
        match self {
            Sharpness::Finite(v) => Some(v),
            Sharpness::Worst => None,
        }
    }

    /// Ordering in "goodness": `Greater` means `self` is strictly better
    /// (smaller sharpness).
    pub fn cmp_better(self, other: Sharpness) -> Ordering {
        match (self, other) {
            (Sharpness::Worst, Sharpness::Worst) => Ordering::Equal,
            (Sharpness::Worst, Sharpness::Finite(_)) => Ordering::Less,
            (Sharpness::Finite(_), Sharpness::Worst) => Ordering::Greater,
            (Sharpness::Finite(a), Sharpness::Finite(b)) => b.total_cmp(&a),
        }
    }
}

/// The shared per-generation noise for input-mode sharpness: the sampled row
/// indices, the unperturbed subsample, its perturbed copy, and the matching
/// target slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SamInGenerationNoise {
    pub sample_rows: Vec<usize>,
    pub base_features: Matrix,
    pub perturbed_features: Matrix,
    pub target: Vec<f64>,
}

/// Draw the generation's shared noise: `n` training rows sampled without
/// replacement, each cell shifted by a uniform draw in
/// `[-epsilon * sigma_j, epsilon * sigma_j]` for its feature's std.
pub fn draw_sam_in_noise<R: Rng>(
    train: &Dataset,
    cfg: &SamConfig,
    rng: &mut R,
) -> Result<SamInGenerationNoise, SharpnessError> {
    cfg.validate()?;
    if cfg.n > train.rows() {
        return Err(SharpnessError::InvalidConfig(format!(
            "perturbation count {} exceeds training rows {}",
            cfg.n,
            train.rows()
        )));
    }
    let sample_rows: Vec<usize> =
        rand::seq::index::sample(rng, train.rows(), cfg.n).into_vec();
    let base_features = train.features.select_rows(&sample_rows);
    let target: Vec<f64> = sample_rows.iter().map(|&i| train.target[i]).collect();

    let cols = train.n_features();
    let mut perturbed = Vec::with_capacity(cfg.n * cols);
    for r in 0..cfg.n {
        for (c, sigma) in train.feature_std.iter().enumerate().take(cols) {
            let half = cfg.epsilon * sigma;
            perturbed.push(base_features.get(r, c) + rng.random_range(-half..=half));
        }
    }
    Ok(SamInGenerationNoise {
        sample_rows,
        base_features,
        perturbed_features: Matrix::new(cfg.n, cols, perturbed),
        target,
    })
}

/// Input-mode sharpness of one tree: `|f_t - f_{t+eps}|` where `f_t` is the
/// R² of the tree on the unperturbed subsample and `f_{t+eps}` the R² of its
/// constant-perturbed copy on the perturbed subsample. Either evaluation
/// being invalid yields `Worst`.
pub fn sam_in_sharpness<R: Rng>(
    tree: &ExprTree,
    noise: &SamInGenerationNoise,
    cfg: &SamConfig,
    rng: &mut R,
) -> Sharpness {
    let base = evaluate(tree, &noise.base_features)
        .expect("tree references features beyond the training matrix");
    let f_base = fitness_of(&base, &noise.target);

    let perturbed_tree = perturb_constants(tree, cfg.epsilon, rng);
    let shifted = evaluate(&perturbed_tree, &noise.perturbed_features)
        .expect("tree references features beyond the training matrix");
    let f_shifted = fitness_of(&shifted, &noise.target);

    match (f_base, f_shifted) {
        (Fitness::Finite(a), Fitness::Finite(b)) => Sharpness::Finite((a - b).abs()),
        _ => Sharpness::Worst,
    }
}

/// Population variance with an exactness guard: identical samples give 0.
fn population_variance(values: &[f64]) -> f64 {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Output-mode sharpness: variance of the R² of `n` semantic neighbors, each
/// the semantics plus fresh elementwise uniform noise in
/// `[-epsilon * sigma_y, epsilon * sigma_y]`. No tree execution happens.
pub fn sam_out_sharpness<R: Rng>(
    s: &Semantics,
    target: &[f64],
    cfg: &SamConfig,
    rng: &mut R,
) -> Sharpness {
    if !s.valid {
        return Sharpness::Worst;
    }
    let sigma = population_std(s.values.iter().copied());
    let half = cfg.epsilon * sigma;
    if !half.is_finite() {
        // Finite entries can still overflow the variance; such a program
        // cannot be scored and counts as maximally sharp.
        return Sharpness::Worst;
    }
    let mut fits = Vec::with_capacity(cfg.n);
    let mut neighbor = vec![0.0; s.len()];
    for _ in 0..cfg.n {
        for (slot, v) in neighbor.iter_mut().zip(&s.values) {
            *slot = v + rng.random_range(-half..=half);
        }
        match r_squared(&neighbor, target) {
            Fitness::Finite(f) => fits.push(f),
            Fitness::Worst => return Sharpness::Worst,
        }
    }
    Sharpness::Finite(population_variance(&fits))
}

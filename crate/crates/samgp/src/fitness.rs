//! Fitness metrics. R² is the selection metric (maximized); RMSE exists for
//! the noise-placement property checks. Invalid semantics map to a `Worst`
//! sentinel that loses every comparison against any finite value.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::eval::Semantics;

/// Training/test fitness under R² maximization. `Worst` is strictly below
/// every finite value, including arbitrarily negative R².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Fitness {
    Finite(f64),
    Worst,
}

impl Fitness {
    pub fn r2(self) -> Option<f64> {
        match self {
            Fitness::Finite(v) => Some(v),
            Fitness::Worst => None,
        }
    }

    pub fn is_valid(self) -> bool {
        matches!(self, Fitness::Finite(_))
    }

    /// Ordering in "goodness": `Greater` means `self` is strictly better.
    pub fn cmp_better(self, other: Fitness) -> Ordering {
        match (self, other) {
            (Fitness::Worst, Fitness::Worst) => Ordering::Equal,
            (Fitness::Worst, Fitness::Finite(_)) => Ordering::Less,
            (Fitness::Finite(_), Fitness::Worst) => Ordering::Greater,
            (Fitness::Finite(a), Fitness::Finite(b)) => a.total_cmp(&b),
        }
    }
}

/// Coefficient of determination, `1 - SS_res / SS_tot` about the target
/// mean. A constant target (or a non-finite result) yields `Worst`.
pub fn r_squared(pred: &[f64], target: &[f64]) -> Fitness {
    assert_eq!(pred.len(), target.len(), "length mismatch");
    assert!(target.len() >= 2, "r_squared needs at least 2 observations");
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let ss_tot: f64 = target.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Fitness::Worst;
    }
    let ss_res: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    let r2 = 1.0 - ss_res / ss_tot;
    if r2.is_finite() {
        Fitness::Finite(r2)
    } else {
        Fitness::Worst
    }
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], target: &[f64]) -> f64 {
    assert_eq!(pred.len(), target.len(), "length mismatch");
    assert!(!target.is_empty());
    let mse = pred
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / target.len() as f64;
    mse.sqrt()
}

/// Fitness of a semantics vector: invalid semantics are assigned `Worst`.
pub fn fitness_of(s: &Semantics, target: &[f64]) -> Fitness {
    assert_eq!(s.len(), target.len(), "length mismatch");
    if !s.valid {
        return Fitness::Worst;
    }
    r_squared(&s.values, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_is_one() {
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r_squared(&y, &y), Fitness::Finite(1.0));
    }

    #[test]
    fn mean_predictor_is_zero() {
        let y = [1.0, 2.0, 3.0, 6.0];
        let mean = y.iter().sum::<f64>() / 4.0;
        let pred = [mean; 4];
        match r_squared(&pred, &y) {
            Fitness::Finite(v) => assert!(v.abs() < 1e-12),
            Fitness::Worst => panic!("unexpected worst"),
        }
    }

    #[test]
    fn constant_target_is_worst() {
        assert_eq!(r_squared(&[1.0, 2.0], &[3.0, 3.0]), Fitness::Worst);
    }

    #[test]
    fn r2_can_go_negative_and_still_beats_worst() {
        let y = [0.0, 1.0, 2.0];
        let bad = [100.0, -50.0, 7.0];
        let f = r_squared(&bad, &y);
        let v = f.r2().unwrap();
        assert!(v < -1.0, "expected strongly negative R², got {v}");
        assert_eq!(f.cmp_better(Fitness::Worst), std::cmp::Ordering::Greater);
        assert_eq!(
            Fitness::Finite(-1e9).cmp_better(Fitness::Worst),
            std::cmp::Ordering::Greater
        );
    }

    #[test]
    fn rmse_basics() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&y, &y), 0.0);
        let shifted = [3.5, 4.5, 5.5];
        assert!((rmse(&shifted, &y) - 2.5).abs() < 1e-15);
    }

    fn fixture() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        // Generic (target, prediction, noise) triple with asymmetric values.
        let y = vec![2.0, -1.0, 4.0, 0.5, 3.0, -2.5];
        let pred = vec![1.8, -0.6, 3.1, 0.9, 2.2, -2.0];
        let eps = vec![0.4, -0.2, 0.3, -0.5, 0.1, 0.25];
        (y, pred, eps)
    }

    #[test]
    fn rmse_noise_placement_identity() {
        let (y, pred, eps) = fixture();
        let pred_plus: Vec<f64> = pred.iter().zip(&eps).map(|(p, e)| p + e).collect();
        let y_minus: Vec<f64> = y.iter().zip(&eps).map(|(t, e)| t - e).collect();
        let a = rmse(&pred_plus, &y);
        let b = rmse(&pred, &y_minus);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn r2_noise_placement_differs() {
        // Perturbing the prediction is not the same as perturbing the target
        // under R², because SS_tot moves with the target.
        let (y, pred, eps) = fixture();
        let pred_plus: Vec<f64> = pred.iter().zip(&eps).map(|(p, e)| p + e).collect();
        let y_minus: Vec<f64> = y.iter().zip(&eps).map(|(t, e)| t - e).collect();
        let a = r_squared(&pred_plus, &y).r2().unwrap();
        let b = r_squared(&pred, &y_minus).r2().unwrap();
        assert!((a - b).abs() > 1e-6, "expected distinct R², got {a} vs {b}");
    }

    #[test]
    fn fitness_of_invalid_semantics_is_worst() {
        let s = Semantics::from_values(vec![1.0, f64::NAN, 3.0]);
        assert!(!s.valid);
        assert_eq!(fitness_of(&s, &[1.0, 2.0, 3.0]), Fitness::Worst);
    }

    #[test]
    fn fitness_of_exact_semantics_is_one() {
        let s = Semantics::from_values(vec![1.0, 2.0, 3.0]);
        assert_eq!(fitness_of(&s, &[1.0, 2.0, 3.0]), Fitness::Finite(1.0));
    }

    #[test]
    fn reversed_prediction_on_asymmetric_fixture_scores_below_one() {
        let y = vec![0.0, 1.0, 5.0, 9.0];
        let mut rev = y.clone();
        rev.reverse();
        let s = Semantics::from_values(rev);
        match fitness_of(&s, &y) {
            Fitness::Finite(v) => assert!(v < 1.0),
            Fitness::Worst => panic!("unexpected worst"),
        }
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        #[test]
        fn rmse_identity_over_1000_random_triples() {
            let mut rng = ChaCha8Rng::seed_from_u64(20260810);
            for _ in 0..1000 {
                let n = rng.random_range(2..40);
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
                let p: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
                let e: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let p_plus: Vec<f64> = p.iter().zip(&e).map(|(a, b)| a + b).collect();
                let y_minus: Vec<f64> = y.iter().zip(&e).map(|(a, b)| a - b).collect();
                assert!((rmse(&p_plus, &y) - rmse(&p, &y_minus)).abs() < 1e-12);
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn r2_invariant_under_joint_permutation(seed in 0u64..10_000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = rng.random_range(3..30usize);
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                let p: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                let mut idx: Vec<usize> = (0..n).collect();
                use rand::seq::SliceRandom;
                idx.shuffle(&mut rng);
                let yp: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
                let pp: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
                match (r_squared(&p, &y), r_squared(&pp, &yp)) {
                    (Fitness::Finite(a), Fitness::Finite(b)) => {
                        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
                    }
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }
    }
}

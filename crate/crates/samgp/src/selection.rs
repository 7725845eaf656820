//! Randomized double-tournament selection over training fitness and
//! sharpness.
//!
//! Each selection event draws one criterion at random (fitness or
//! sharpness), runs `size_b` qualifier tournaments of `size_a` slots on it,
//! then a final over the qualifier winners on the same criterion. Sampling
//! is uniform with replacement; ties break uniformly at random.

use std::cmp::Ordering;

use rand::Rng;

use crate::eval::Semantics;
use crate::expr::ExprTree;
use crate::fitness::Fitness;
use crate::sharpness::{SamMode, Sharpness};

/// The unit of selection: a tree with its cached scores. Test fitness is
/// reporting-only and never consulted here.
#[derive(Clone, Debug)]
pub struct Individual {
    pub tree: ExprTree,
    pub semantics_train: Semantics,
    pub fitness_train: Fitness,
    pub fitness_test: Fitness,
    pub sharpness: Sharpness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    TrainFitness,
    Sharpness,
}

impl Criterion {
    fn compare(self, a: &Individual, b: &Individual) -> Ordering {
        match self {
            Criterion::TrainFitness => a.fitness_train.cmp_better(b.fitness_train),
            Criterion::Sharpness => a.sharpness.cmp_better(b.sharpness),
        }
    }
}

/// Criterion for one selection event: a fair coin between training fitness
/// and sharpness, except in baseline mode where fitness always applies.
pub fn event_criterion<R: Rng>(mode: SamMode, rng: &mut R) -> Criterion {
    match mode {
        SamMode::None => Criterion::TrainFitness,
        _ => {
            if rng.random_bool(0.5) {
                Criterion::TrainFitness
            } else {
                Criterion::Sharpness
            }
        }
    }
}

/// Best slot among `slots` under `criterion`; ties break uniformly at
/// random over the tied slots.
fn best_of<R: Rng>(
    pop: &[Individual],
    slots: &[usize],
    criterion: Criterion,
    rng: &mut R,
) -> usize {
    debug_assert!(!slots.is_empty());
    let mut tied = vec![slots[0]];
    for &s in &slots[1..] {
        match criterion.compare(&pop[s], &pop[tied[0]]) {
            Ordering::Greater => {
                tied.clear();
                tied.push(s);
            }
            Ordering::Equal => tied.push(s),
            Ordering::Less => {}
        }
    }
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// One double-tournament selection event; returns the winner's index.
pub fn double_tournament<R: Rng>(
    pop: &[Individual],
    size_a: usize,
    size_b: usize,
    mode: SamMode,
    rng: &mut R,
) -> usize {
    assert!(!pop.is_empty(), "selection over an empty population");
    assert!(size_a >= 1 && size_b >= 1, "tournament sizes must be >= 1");
    let criterion = event_criterion(mode, rng);

    let mut finalists = Vec::with_capacity(size_b);
    for _ in 0..size_b {
        let slots: Vec<usize> = (0..size_a)
            .map(|_| rng.random_range(0..pop.len()))
            .collect();
        finalists.push(best_of(pop, &slots, criterion, rng));
    }
    best_of(pop, &finalists, criterion, rng)
}

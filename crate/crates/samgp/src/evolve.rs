//! The generational loop: evaluation, sharpness scoring, selection,
//! variation, elitism, and per-generation metric capture.
//!
//! Every randomized step draws from a substream derived from the run seed,
//! the generation, and the item index, so a rayon-parallel schedule and a
//! serial one produce identical results.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, SplitPair};
use crate::eval::{evaluate, EvalError};
use crate::expr::{
    rhh_init, subtree_mutation, swap_crossover, ExprError, ExprTree, VariationConfig,
};
use crate::fitness::fitness_of;
use crate::gpm::{extract_phenotype, DEFAULT_TOL};
use crate::rng::{derive_rng, tag};
use crate::selection::{double_tournament, Individual};
use crate::sharpness::{
    draw_sam_in_noise, sam_in_sharpness, sam_out_sharpness, SamConfig, SamMode, Sharpness,
    SharpnessError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Sharpness(#[from] SharpnessError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

/// Experiment parameters for one evolutionary run. Defaults mirror the
/// standard setup: population 100, 50 generations, crossover 0.8 / mutation
/// 0.2, ramped init depth 5, double tournament (6, 3), one elite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub elitism_count: usize,
    pub tournament_size_a: usize,
    pub tournament_size_b: usize,
    pub variation: VariationConfig,
    pub sam: SamConfig,
    pub seed: u64,
    /// Schedule only; results are identical either way.
    pub parallel: bool,
    /// Measure the genotype-phenotype mapping every k-th generation
    /// (the final generation is always measured).
    pub gpm_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pop_size: 100,
            generations: 50,
            elitism_count: 1,
            tournament_size_a: 6,
            tournament_size_b: 3,
            variation: VariationConfig::default(),
            sam: SamConfig::none(),
            seed: 0,
            parallel: false,
            gpm_every: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.pop_size < 2 {
            return Err(RunError::InvalidConfig("pop_size must be at least 2".into()));
        }
        if self.elitism_count > self.pop_size {
            return Err(RunError::InvalidConfig(
                "elitism_count cannot exceed pop_size".into(),
            ));
        }
        if self.tournament_size_a < 1 || self.tournament_size_b < 1 {
            return Err(RunError::InvalidConfig(
                "tournament sizes must be at least 1".into(),
            ));
        }
        if self.gpm_every == 0 {
            return Err(RunError::InvalidConfig("gpm_every must be at least 1".into()));
        }
        self.variation.validate()?;
        self.sam.validate()?;
        Ok(())
    }
}

/// Per-generation metric record. Means run over the full population with
/// `Worst` values excluded (and separately counted); missing entries stay
/// empty in the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub mean_train_r2: Option<f64>,
    pub median_train_r2: Option<f64>,
    pub mean_test_r2: Option<f64>,
    pub median_test_r2: Option<f64>,
    pub elite_train_r2: Option<f64>,
    pub elite_test_r2: Option<f64>,
    pub mean_tree_size: f64,
    pub mean_phenotype_size: Option<f64>,
    pub mean_redundancy: Option<f64>,
    pub mean_sharpness: Option<f64>,
    pub invalid_count: usize,
}

impl GenerationStats {
    pub const CSV_HEADER: &'static str = "generation,mean_train_r2,median_train_r2,mean_test_r2,median_test_r2,elite_train_r2,elite_test_r2,mean_tree_size,mean_phenotype_size,mean_redundancy,mean_sharpness,invalid_count";

    pub fn to_csv_row(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.generation,
            cell(self.mean_train_r2),
            cell(self.median_train_r2),
            cell(self.mean_test_r2),
            cell(self.median_test_r2),
            cell(self.elite_train_r2),
            cell(self.elite_test_r2),
            self.mean_tree_size,
            cell(self.mean_phenotype_size),
            cell(self.mean_redundancy),
            cell(self.mean_sharpness),
            self.invalid_count,
        )
    }
}

/// Render a stats series as the run CSV (header + one row per generation).
pub fn stats_to_csv(stats: &[GenerationStats]) -> String {
    let mut out = String::from(GenerationStats::CSV_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&s.to_csv_row());
        out.push('\n');
    }
    out
}

/// Parse a stats CSV produced by [`stats_to_csv`].
pub fn stats_from_csv(text: &str) -> Result<Vec<GenerationStats>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty stats file")?;
    if header != GenerationStats::CSV_HEADER {
        return Err(format!("unexpected stats header: {header}"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 12 {
            return Err(format!("row {i} has {} cells, expected 12", cells.len()));
        }
        let opt = |s: &str| -> Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| format!("row {i}: {e}"))
            }
        };
        out.push(GenerationStats {
            generation: cells[0].parse().map_err(|e| format!("row {i}: {e}"))?,
            mean_train_r2: opt(cells[1])?,
            median_train_r2: opt(cells[2])?,
            mean_test_r2: opt(cells[3])?,
            median_test_r2: opt(cells[4])?,
            elite_train_r2: opt(cells[5])?,
            elite_test_r2: opt(cells[6])?,
            mean_tree_size: cells[7].parse().map_err(|e| format!("row {i}: {e}"))?,
            mean_phenotype_size: opt(cells[8])?,
            mean_redundancy: opt(cells[9])?,
            mean_sharpness: opt(cells[10])?,
            invalid_count: cells[11].parse().map_err(|e| format!("row {i}: {e}"))?,
        });
    }
    Ok(out)
}

/// Outcome of a run: stats for generations `0..=generations`, the serialized
/// elite per generation, and the final elite scores. The instrumentation
/// counters back the "no sharpness work in baseline mode" and "one noise
/// draw per generation" contracts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub stats: Vec<GenerationStats>,
    pub elites_by_generation: Vec<String>,
    pub final_elite_expr: String,
    pub final_elite_train_r2: Option<f64>,
    pub final_elite_test_r2: Option<f64>,
    pub config: RunConfig,
    pub dataset_name: String,
    pub wall_time_secs: f64,
    pub sharpness_evals: u64,
    pub noise_draws: u64,
}

/// Rolling state of a run between generations.
pub struct EvoState {
    pub generation: usize,
    pub population: Vec<Individual>,
    pub stats: Vec<GenerationStats>,
    pub elites: Vec<String>,
    pub sharpness_evals: u64,
    pub noise_draws: u64,
}

fn make_individual(tree: ExprTree, split: &SplitPair) -> Result<Individual, EvalError> {
    let semantics_train = evaluate(&tree, &split.train.features)?;
    let semantics_test = evaluate(&tree, &split.test.features)?;
    let fitness_train = fitness_of(&semantics_train, &split.train.target);
    let fitness_test = fitness_of(&semantics_test, &split.test.target);
    Ok(Individual {
        tree,
        semantics_train,
        fitness_train,
        fitness_test,
        sharpness: Sharpness::Worst,
    })
}

fn evaluate_population(
    trees: Vec<ExprTree>,
    split: &SplitPair,
    parallel: bool,
) -> Result<Vec<Individual>, EvalError> {
    if parallel {
        trees
            .into_par_iter()
            .map(|t| make_individual(t, split))
            .collect()
    } else {
        trees.into_iter().map(|t| make_individual(t, split)).collect()
    }
}

/// Index of the elite: best train fitness, ties broken by smaller tree,
/// then by position.
pub fn elite_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for i in 1..pop.len() {
        let ord = pop[i]
            .fitness_train
            .cmp_better(pop[best].fitness_train)
            .then(pop[best].tree.size().cmp(&pop[i].tree.size()));
        if ord == std::cmp::Ordering::Greater {
            best = i;
        }
    }
    best
}

/// Indices of the `count` best individuals (same ordering as
/// [`elite_index`]), returned in ascending position order.
fn elite_indices(pop: &[Individual], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        pop[b]
            .fitness_train
            .cmp_better(pop[a].fitness_train)
            .then(pop[a].tree.size().cmp(&pop[b].tree.size()))
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(count).collect();
    picked.sort_unstable();
    picked
}

fn score_sharpness(
    pop: &mut [Individual],
    train: &Dataset,
    cfg: &RunConfig,
    generation: usize,
) -> Result<(u64, u64), RunError> {
    match cfg.sam.mode {
        SamMode::None => Ok((0, 0)),
        SamMode::In => {
            let mut noise_rng = derive_rng(cfg.seed, &[tag::SAM_NOISE, generation as u64]);
            let noise = draw_sam_in_noise(train, &cfg.sam, &mut noise_rng)?;
            let score = |(i, ind): (usize, &mut Individual)| {
                let mut rng =
                    derive_rng(cfg.seed, &[tag::SHARPNESS, generation as u64, i as u64]);
                ind.sharpness = sam_in_sharpness(&ind.tree, &noise, &cfg.sam, &mut rng);
            };
            if cfg.parallel {
                pop.par_iter_mut().enumerate().for_each(|(i, ind)| score((i, ind)));
            } else {
                pop.iter_mut().enumerate().for_each(|(i, ind)| score((i, ind)));
            }
            Ok((pop.len() as u64, 1))
        }
        SamMode::Out => {
            let score = |(i, ind): (usize, &mut Individual)| {
                let mut rng =
                    derive_rng(cfg.seed, &[tag::SHARPNESS, generation as u64, i as u64]);
                ind.sharpness =
                    sam_out_sharpness(&ind.semantics_train, &train.target, &cfg.sam, &mut rng);
            };
            if cfg.parallel {
                pop.par_iter_mut().enumerate().for_each(|(i, ind)| score((i, ind)));
            } else {
                pop.iter_mut().enumerate().for_each(|(i, ind)| score((i, ind)));
            }
            Ok((pop.len() as u64, 0))
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn generation_stats(
    generation: usize,
    pop: &[Individual],
    train: &Dataset,
    with_gpm: bool,
    parallel: bool,
) -> Result<GenerationStats, RunError> {
    let train_r2: Vec<f64> = pop.iter().filter_map(|i| i.fitness_train.r2()).collect();
    let test_r2: Vec<f64> = pop.iter().filter_map(|i| i.fitness_test.r2()).collect();
    let sharp: Vec<f64> = pop.iter().filter_map(|i| i.sharpness.value()).collect();
    let sizes: Vec<f64> = pop.iter().map(|i| i.tree.size() as f64).collect();
    let invalid_count = pop.iter().filter(|i| !i.semantics_train.valid).count();

    let (mean_phenotype_size, mean_redundancy) = if with_gpm {
        let reports: Result<Vec<(f64, f64)>, RunError> = if parallel {
            pop.par_iter()
                .map(|i| {
                    let rep = extract_phenotype(&i.tree, &train.features, DEFAULT_TOL)?;
                    Ok((rep.phenotype_size as f64, rep.redundancy as f64))
                })
                .collect()
        } else {
            pop.iter()
                .map(|i| {
                    let rep = extract_phenotype(&i.tree, &train.features, DEFAULT_TOL)?;
                    Ok((rep.phenotype_size as f64, rep.redundancy as f64))
                })
                .collect()
        };
        let reports = reports?;
        let ps: Vec<f64> = reports.iter().map(|r| r.0).collect();
        let rd: Vec<f64> = reports.iter().map(|r| r.1).collect();
        (mean(&ps), mean(&rd))
    } else {
        (None, None)
    };

    let elite = &pop[elite_index(pop)];
    Ok(GenerationStats {
        generation,
        mean_train_r2: mean(&train_r2),
        median_train_r2: median(&train_r2),
        mean_test_r2: mean(&test_r2),
        median_test_r2: median(&test_r2),
        elite_train_r2: elite.fitness_train.r2(),
        elite_test_r2: elite.fitness_test.r2(),
        mean_tree_size: mean(&sizes).unwrap_or(0.0),
        mean_phenotype_size,
        mean_redundancy,
        mean_sharpness: mean(&sharp),
        invalid_count,
    })
}

/// Breed the next population: `pop_size - elitism_count` offspring, each via
/// double-tournament parents and exactly one variation operator, plus the
/// elites copied unchanged (in their original order).
fn breed(
    pop: &[Individual],
    cfg: &RunConfig,
    split: &SplitPair,
    next_generation: usize,
) -> Result<Vec<Individual>, RunError> {
    let n_offspring = cfg.pop_size - cfg.elitism_count;
    let n_features = split.train.n_features();
    let make = |j: usize| -> Result<Individual, RunError> {
        let mut rng = derive_rng(
            cfg.seed,
            &[tag::OFFSPRING, next_generation as u64, j as u64],
        );
        let use_crossover = rng.random_bool(cfg.variation.p_crossover);
        let p1 = double_tournament(
            pop,
            cfg.tournament_size_a,
            cfg.tournament_size_b,
            cfg.sam.mode,
            &mut rng,
        );
        let child = if use_crossover {
            let p2 = double_tournament(
                pop,
                cfg.tournament_size_a,
                cfg.tournament_size_b,
                cfg.sam.mode,
                &mut rng,
            );
            swap_crossover(&pop[p1].tree, &pop[p2].tree, &mut rng)
        } else {
            subtree_mutation(&pop[p1].tree, n_features, &cfg.variation, &mut rng)
        };
        Ok(make_individual(child, split)?)
    };

    let offspring: Result<Vec<Individual>, RunError> = if cfg.parallel {
        (0..n_offspring).into_par_iter().map(make).collect()
    } else {
        (0..n_offspring).map(make).collect()
    };
    let offspring = offspring?;

    let mut next: Vec<Individual> = elite_indices(pop, cfg.elitism_count)
        .into_iter()
        .map(|i| pop[i].clone())
        .collect();
    next.extend(offspring);
    Ok(next)
}

/// Score sharpness and record stats for the state's current generation.
fn score_and_record(
    state: &mut EvoState,
    cfg: &RunConfig,
    split: &SplitPair,
) -> Result<(), RunError> {
    let g = state.generation;
    let (evals, draws) = score_sharpness(&mut state.population, &split.train, cfg, g)?;
    state.sharpness_evals += evals;
    state.noise_draws += draws;
    let with_gpm = g.is_multiple_of(cfg.gpm_every) || g == cfg.generations;
    state.stats.push(generation_stats(
        g,
        &state.population,
        &split.train,
        with_gpm,
        cfg.parallel,
    )?);
    state
        .elites
        .push(state.population[elite_index(&state.population)].tree.to_string());
    Ok(())
}

/// Initialize generation 0: ramped half-and-half population, evaluated on
/// both partitions.
pub fn init_state(cfg: &RunConfig, split: &SplitPair) -> Result<EvoState, RunError> {
    cfg.validate()?;
    crate::init_parallelism();
    let mut init_rng = derive_rng(cfg.seed, &[tag::INIT]);
    let trees = rhh_init(
        cfg.pop_size,
        split.train.n_features(),
        &cfg.variation,
        &mut init_rng,
    )?;
    let population = evaluate_population(trees, split, cfg.parallel)?;
    Ok(EvoState {
        generation: 0,
        population,
        stats: Vec::new(),
        elites: Vec::new(),
        sharpness_evals: 0,
        noise_draws: 0,
    })
}

/// One full generational step: score and record the current generation,
/// then breed, evaluate and install its successor.
pub fn evolve_generation(
    state: &mut EvoState,
    cfg: &RunConfig,
    split: &SplitPair,
) -> Result<(), RunError> {
    score_and_record(state, cfg, split)?;
    state.population = breed(&state.population, cfg, split, state.generation + 1)?;
    state.generation += 1;
    Ok(())
}

/// Execute a full run: generation 0 plus `cfg.generations` evolved
/// generations, all recorded.
pub fn run(cfg: &RunConfig, split: &SplitPair) -> Result<RunResult, RunError> {
    let start = Instant::now();
    let mut state = init_state(cfg, split)?;
    for _ in 0..cfg.generations {
        evolve_generation(&mut state, cfg, split)?;
    }
    score_and_record(&mut state, cfg, split)?;

    let elite = &state.population[elite_index(&state.population)];
    Ok(RunResult {
        final_elite_expr: elite.tree.to_string(),
        final_elite_train_r2: elite.fitness_train.r2(),
        final_elite_test_r2: elite.fitness_test.r2(),
        stats: state.stats,
        elites_by_generation: state.elites,
        config: cfg.clone(),
        dataset_name: split.train.name.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        sharpness_evals: state.sharpness_evals,
        noise_draws: state.noise_draws,
    })
}

//! Acceptance suite. One test per criterion; each prints a PASS line on
//! success (run with `--nocapture` to see them) and fails loudly otherwise.
//!
//! Criterion 8 needs the four real-world CSVs and is skipped with a SKIP
//! line when they are absent (set `SAMGP_DATA_DIR` or put them in `data/`
//! at the workspace root).

use std::path::PathBuf;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use samgp::data::{
    load_csv, monte_carlo_split, sample_synthetic, synth_ackley, synth_levy, synth_rastrigin,
    synth_rosenbrock, Dataset, SplitPair, TargetColumn,
};
use samgp::eval::evaluate;
use samgp::evolve::{run, RunConfig, RunResult};
use samgp::expr::{rhh_init, VariationConfig};
use samgp::fitness::{r_squared, rmse, Fitness};
use samgp::gpm::{extract_phenotype, DEFAULT_TOL};
use samgp::rng::{derive_rng, derive_seed, hash_label, tag};
use samgp::selection::{double_tournament, Individual};
use samgp::sharpness::{
    draw_sam_in_noise, sam_in_sharpness, sam_out_sharpness, SamConfig, SamMode, Sharpness,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn criterion_1_synthetic_function_correctness() {
    assert!(synth_levy(&[1.0, 1.0]).abs() < 1e-9);
    assert!(synth_ackley(&[0.0, 0.0]).abs() < 1e-9);
    assert!(synth_rastrigin(&[0.0, 0.0]).abs() < 1e-9);
    assert!(synth_rosenbrock(&[1.0, 1.0]).abs() < 1e-9);
    assert!((synth_rastrigin(&[1.0, 0.0]) - 1.0).abs() < 1e-9);
    assert!((synth_rosenbrock(&[0.0, 0.0]) - 1.0).abs() < 1e-9);
    println!("ACCEPTANCE 1: PASS - synthetic functions hit their reference values");
}

#[test]
fn criterion_2_noise_placement_metric_property() {
    let mut r = rng(0xACCE_0002);
    for _ in 0..1000 {
        let n = r.random_range(2..50);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
        let pred: Vec<f64> = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
        let eps: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
        let pred_plus: Vec<f64> = pred.iter().zip(&eps).map(|(p, e)| p + e).collect();
        let y_minus: Vec<f64> = y.iter().zip(&eps).map(|(t, e)| t - e).collect();
        let a = rmse(&pred_plus, &y);
        let b = rmse(&pred, &y_minus);
        assert!((a - b).abs() < 1e-12, "rmse identity violated: {a} vs {b}");
    }

    // Generic fixture: the same perturbation placed on prediction vs target
    // must give measurably different R².
    let y = [2.0, -1.0, 4.0, 0.5, 3.0, -2.5];
    let pred = [1.8, -0.6, 3.1, 0.9, 2.2, -2.0];
    let eps = [0.4, -0.2, 0.3, -0.5, 0.1, 0.25];
    let pred_plus: Vec<f64> = pred.iter().zip(&eps).map(|(p, e)| p + e).collect();
    let y_minus: Vec<f64> = y.iter().zip(&eps).map(|(t, e)| t - e).collect();
    let a = r_squared(&pred_plus, &y).r2().unwrap();
    let b = r_squared(&pred, &y_minus).r2().unwrap();
    assert!(
        (a - b).abs() > 1e-6,
        "R² should differ across noise placements: {a} vs {b}"
    );
    println!("ACCEPTANCE 2: PASS - rmse identity holds to 1e-12, R² placements differ");
}

#[test]
fn criterion_3_sharpness_zero_noise_law() {
    let dataset = sample_synthetic(samgp::data::SyntheticFn::Rastrigin, 60, &mut rng(33));
    let vcfg = VariationConfig::default();
    let sam_in = SamConfig {
        mode: SamMode::In,
        n: 10,
        epsilon: 0.0,
    };
    let sam_out = SamConfig {
        mode: SamMode::Out,
        n: 20,
        epsilon: 0.0,
    };
    let noise = draw_sam_in_noise(&dataset, &sam_in, &mut rng(34)).unwrap();

    let mut tree_rng = rng(35);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 100 {
        attempts += 1;
        assert!(attempts < 10_000, "could not find 100 valid trees");
        let tree = &rhh_init(2, 2, &vcfg, &mut tree_rng).unwrap()[0];
        let s_in = sam_in_sharpness(tree, &noise, &sam_in, &mut rng(36 + attempts));
        let semantics = evaluate(tree, &dataset.features).unwrap();
        let s_out = sam_out_sharpness(&semantics, &dataset.target, &sam_out, &mut rng(37 + attempts));
        match (s_in, s_out) {
            (Sharpness::Finite(a), Sharpness::Finite(b)) => {
                assert_eq!(a, 0.0, "SAM-IN sharpness not exactly 0 at eps=0");
                assert_eq!(b, 0.0, "SAM-OUT sharpness not exactly 0 at eps=0");
                checked += 1;
            }
            _ => continue, // invalid on this data; the law covers valid trees
        }
    }
    println!("ACCEPTANCE 3: PASS - sharpness is exactly 0 at eps=0 for 100 random valid trees");
}

/// Independent brute-force transcription of the output-perturbation
/// procedure, sharing only the RNG stream contract (neighbor-major,
/// element-minor draws).
fn sam_out_brute_force(values: &[f64], target: &[f64], n: usize, eps: f64, r: &mut ChaCha8Rng) -> f64 {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let sigma = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len).sqrt();

    let mut fits = Vec::with_capacity(n);
    for _ in 0..n {
        let neighbor: Vec<f64> = values
            .iter()
            .map(|v| v + r.random_range(-(eps * sigma)..=(eps * sigma)))
            .collect();
        let ty_mean = target.iter().sum::<f64>() / target.len() as f64;
        let ss_tot: f64 = target.iter().map(|y| (y - ty_mean) * (y - ty_mean)).sum();
        let ss_res: f64 = neighbor
            .iter()
            .zip(target)
            .map(|(p, y)| (p - y) * (p - y))
            .sum();
        fits.push(1.0 - ss_res / ss_tot);
    }
    let fmean = fits.iter().sum::<f64>() / n as f64;
    fits.iter().map(|f| (f - fmean) * (f - fmean)).sum::<f64>() / n as f64
}

#[test]
fn criterion_4_sam_out_oracle_equivalence() {
    // 10-point linear semantics against a fixed target.
    let values: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
    let target: Vec<f64> = (0..10).map(|i| 1.5 * (i as f64 * 0.5) - 2.0 + (i % 3) as f64 * 0.1).collect();
    let cfg = SamConfig {
        mode: SamMode::Out,
        n: 20,
        epsilon: 0.1,
    };
    let semantics = samgp::eval::Semantics::from_values(values.clone());
    let engine = match sam_out_sharpness(&semantics, &target, &cfg, &mut rng(0xBEEF)) {
        Sharpness::Finite(v) => v,
        Sharpness::Worst => panic!("fixture must be scoreable"),
    };
    let oracle = sam_out_brute_force(&values, &target, cfg.n, cfg.epsilon, &mut rng(0xBEEF));
    assert!(
        (engine - oracle).abs() <= 1e-12,
        "engine {engine} vs oracle {oracle}"
    );
    println!("ACCEPTANCE 4: PASS - SAM-OUT matches the brute-force oracle to 1e-12 ({engine})");
}

#[test]
fn criterion_5_gpm_soundness_over_1000_trees() {
    let dataset = sample_synthetic(samgp::data::SyntheticFn::Levy, 24, &mut rng(51));
    let vcfg = VariationConfig::default();
    let trees = rhh_init(1000, 2, &vcfg, &mut rng(52)).unwrap();
    for tree in &trees {
        let rep = extract_phenotype(tree, &dataset.features, DEFAULT_TOL).unwrap();
        assert!(rep.phenotype_size <= rep.genotype_size);

        let original = evaluate(tree, &dataset.features).unwrap();
        let reduced = evaluate(&rep.phenotype, &dataset.features).unwrap();
        if original.valid {
            for (a, b) in original.values.iter().zip(&reduced.values) {
                let diff = (a - b).abs();
                assert!(
                    diff <= 1e-10 * a.abs().max(b.abs()) || diff <= 1e-10,
                    "semantics drifted beyond 1e-10: {a} vs {b} on {tree}"
                );
            }
        } else {
            assert_eq!(rep.phenotype, *tree, "invalid trees must pass through");
        }

        let again = extract_phenotype(&rep.phenotype, &dataset.features, DEFAULT_TOL).unwrap();
        assert_eq!(again.phenotype, rep.phenotype, "mapping must be idempotent");
    }
    println!("ACCEPTANCE 5: PASS - GPM preserves semantics, shrinks monotonically, idempotent");
}

fn samgp_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_samgp"))
}

#[test]
fn criterion_6_cli_determinism_and_parallel_equivalence() {
    let base = tempfile::tempdir().unwrap();
    let dirs: Vec<PathBuf> = (0..3).map(|i| base.path().join(format!("d{i}"))).collect();
    for (i, dir) in dirs.iter().enumerate() {
        let mut cmd = samgp_bin();
        cmd.args([
            "run",
            "--synthetic",
            "ackley",
            "--sam",
            "in",
            "--epsilon",
            "0.1",
            "--n",
            "10",
            "--seed",
            "7",
            "--out",
        ])
        .arg(dir);
        if i == 2 {
            cmd.arg("--parallel");
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "run failed: {:?}", out);
    }
    let bytes: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| std::fs::read(d.join("run.stats.csv")).unwrap())
        .collect();
    assert_eq!(bytes[0], bytes[1], "repeated runs must be byte-identical");
    assert_eq!(bytes[0], bytes[2], "parallel schedule must match serial");
    println!("ACCEPTANCE 6: PASS - byte-identical stats across repeats and schedules");
}

const RECOMMENDED_IN: SamConfig = SamConfig {
    mode: SamMode::In,
    n: 10,
    epsilon: 0.1,
};
const RECOMMENDED_OUT: SamConfig = SamConfig {
    mode: SamMode::Out,
    n: 20,
    epsilon: 0.1,
};

fn algorithm_tag(sam: &SamConfig) -> String {
    samgp::cli::algorithm_label(sam)
}

/// Monte-Carlo cell: `runs` independent splits and runs of one algorithm on
/// one dataset, seeds derived exactly like the grid command.
fn run_cell(
    dataset: &Dataset,
    fraction: f64,
    sam: SamConfig,
    base_seed: u64,
    runs: usize,
) -> Vec<RunResult> {
    samgp::init_parallelism();
    let label = algorithm_tag(&sam);
    (0..runs)
        .into_par_iter()
        .map(|k| {
            let run_seed = derive_seed(
                base_seed,
                &[hash_label(&label), hash_label(&dataset.name), k as u64],
            );
            let mut split_rng = derive_rng(run_seed, &[tag::SPLIT]);
            let split = monte_carlo_split(dataset, fraction, &mut split_rng).unwrap();
            let cfg = RunConfig {
                sam,
                seed: run_seed,
                gpm_every: 51, // generations 0 and 50 are measured
                ..RunConfig::default()
            };
            run(&cfg, &split).unwrap()
        })
        .collect()
}

fn final_mean(results: &[RunResult], get: impl Fn(&RunResult) -> f64) -> f64 {
    results.iter().map(&get).sum::<f64>() / results.len() as f64
}

#[test]
fn criterion_7_sam_shrinks_trees_and_redundancy_at_desk_scale() {
    let base_seed = 20260810;
    let runs = 20;
    let mut size_wins_in = 0;
    let mut size_wins_out = 0;
    let mut red_wins_in = 0;
    let mut red_wins_out = 0;

    for f in samgp::data::SyntheticFn::ALL {
        let mut data_rng = derive_rng(base_seed, &[tag::DATA, hash_label(f.name())]);
        let dataset = sample_synthetic(f, 100, &mut data_rng);

        let gp = run_cell(&dataset, 0.5, SamConfig::none(), base_seed, runs);
        let sam_in = run_cell(&dataset, 0.5, RECOMMENDED_IN, base_seed, runs);
        let sam_out = run_cell(&dataset, 0.5, RECOMMENDED_OUT, base_seed, runs);

        let size = |r: &RunResult| r.stats.last().unwrap().mean_tree_size;
        let red = |r: &RunResult| r.stats.last().unwrap().mean_redundancy.unwrap();
        let (gp_size, gp_red) = (final_mean(&gp, size), final_mean(&gp, red));
        let (in_size, in_red) = (final_mean(&sam_in, size), final_mean(&sam_in, red));
        let (out_size, out_red) = (final_mean(&sam_out, size), final_mean(&sam_out, red));

        println!(
            "  {:<11} size gp={gp_size:8.2} in={in_size:8.2} out={out_size:8.2} | redundancy gp={gp_red:8.2} in={in_red:8.2} out={out_red:8.2}",
            f.name()
        );
        size_wins_in += usize::from(in_size < gp_size);
        size_wins_out += usize::from(out_size < gp_size);
        red_wins_in += usize::from(in_red < gp_red);
        red_wins_out += usize::from(out_red < gp_red);
    }

    println!(
        "  wins/4: size in={size_wins_in} out={size_wins_out}, redundancy in={red_wins_in} out={red_wins_out}"
    );
    assert!(size_wins_in >= 3, "SAM-IN mean final tree size smaller on only {size_wins_in}/4 problems");
    assert!(size_wins_out >= 3, "SAM-OUT mean final tree size smaller on only {size_wins_out}/4 problems");
    assert!(red_wins_in >= 3, "SAM-IN mean redundancy smaller on only {red_wins_in}/4 problems");
    assert!(red_wins_out >= 3, "SAM-OUT mean redundancy smaller on only {red_wins_out}/4 problems");
    println!("ACCEPTANCE 7: PASS - both SAM variants shrink size and redundancy on >=3/4 problems");
}

fn real_world_dir() -> PathBuf {
    std::env::var_os("SAMGP_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("..")
                .join("..")
                .join("data")
        })
}

fn load_real_dataset(path: &PathBuf) -> Option<Dataset> {
    let text = std::fs::read_to_string(path).ok()?;
    let first = text.lines().next()?;
    let width = first.split(',').count();
    let has_header = first.split(',').any(|cell| cell.trim().parse::<f64>().is_err());
    load_csv(path, &TargetColumn::Index(width - 1), has_header).ok()
}

#[test]
fn criterion_8_real_world_generalization_not_worse() {
    let dir = real_world_dir();
    let names = ["boston", "heating", "diabetes", "concrete"];
    let datasets: Vec<Dataset> = names
        .iter()
        .filter_map(|n| load_real_dataset(&dir.join(format!("{n}.csv"))))
        .collect();
    if datasets.len() < 4 {
        println!(
            "ACCEPTANCE 8: SKIP - real-world CSVs not found under {} ({} of 4 present)",
            dir.display(),
            datasets.len()
        );
        return;
    }

    let base_seed = 20260811;
    let runs = 20;
    let mut wins_in = 0;
    let mut wins_out = 0;
    for dataset in &datasets {
        let elite = |r: &RunResult| r.final_elite_test_r2;
        let mean_elite = |results: &[RunResult]| {
            let vals: Vec<f64> = results.iter().filter_map(elite).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let gp = mean_elite(&run_cell(dataset, 0.7, SamConfig::none(), base_seed, runs));
        let sam_in = mean_elite(&run_cell(dataset, 0.7, RECOMMENDED_IN, base_seed, runs));
        let sam_out = mean_elite(&run_cell(dataset, 0.7, RECOMMENDED_OUT, base_seed, runs));
        println!(
            "  {:<10} ({} rows, {} features): elite test R² gp={gp:.4} in={sam_in:.4} out={sam_out:.4}",
            dataset.name,
            dataset.rows(),
            dataset.n_features()
        );
        wins_in += usize::from(sam_in >= gp - 0.05);
        wins_out += usize::from(sam_out >= gp - 0.05);
    }
    assert!(wins_in >= 3, "SAM-IN within 0.05 of GP on only {wins_in}/4 problems");
    assert!(wins_out >= 3, "SAM-OUT within 0.05 of GP on only {wins_out}/4 problems");
    println!("ACCEPTANCE 8: PASS - recommended SAM configs generalize within 0.05 of GP on >=3/4 problems");
}

#[test]
fn criterion_9_double_tournament_matches_closed_form() {
    let n = 30usize;
    let (size_a, size_b) = (6, 3);
    let make = |fit: Fitness, sharp: Sharpness| Individual {
        tree: "x0".parse().unwrap(),
        semantics_train: samgp::eval::Semantics::from_values(vec![0.0, 1.0]),
        fitness_train: fit,
        fitness_test: fit,
        sharpness: sharp,
    };
    let mut pop: Vec<Individual> = (0..n)
        .map(|_| make(Fitness::Worst, Sharpness::Worst))
        .collect();
    pop[11] = make(Fitness::Finite(1.0), Sharpness::Finite(0.0));

    let q = 1.0 - (1.0 - 1.0 / n as f64).powi(size_a as i32);
    let expected = 1.0 - (1.0 - q).powi(size_b as i32);

    let mut r = rng(0xACCE_0009);
    let events = 10_000;
    let wins = (0..events)
        .filter(|_| double_tournament(&pop, size_a, size_b, SamMode::None, &mut r) == 11)
        .count();
    let observed = wins as f64 / events as f64;
    assert!(
        (observed - expected).abs() <= 0.02,
        "observed {observed:.4}, closed form {expected:.4}"
    );
    println!(
        "ACCEPTANCE 9: PASS - dominant wins {observed:.4} of events vs closed-form {expected:.4}"
    );
}

// Shared helper so criterion 8 can reuse split plumbing if needed later.
#[allow(dead_code)]
fn split_of(dataset: &Dataset, fraction: f64, seed: u64) -> SplitPair {
    let mut split_rng = derive_rng(seed, &[tag::SPLIT]);
    monte_carlo_split(dataset, fraction, &mut split_rng).unwrap()
}

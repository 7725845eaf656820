//! Command-line entry points: single runs, experiment grids, rank reports,
//! and phenotype inspection.
//!
//! Every subcommand is deterministic given its flags and seed. Grid cells
//! derive independent seeds from (base seed, algorithm label, problem name,
//! run index), so completed cells can be skipped and re-runs reproduce the
//! same bytes regardless of order or parallelism. `SAMGP_OUT_DIR`, when set,
//! overrides the output directory flag.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    load_csv, monte_carlo_split, sample_synthetic, Dataset, SyntheticFn, TargetColumn,
};
use crate::evolve::{run, stats_from_csv, stats_to_csv, RunConfig, RunResult};
use crate::expr::{ExprTree, VariationConfig};
use crate::gpm::extract_phenotype;
use crate::report::{export_curves, rank_report, CurveRun};
use crate::rng::{derive_rng, derive_seed, hash_label, tag};
use crate::sharpness::{SamConfig, SamMode};

pub const OUT_DIR_ENV: &str = "SAMGP_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "samgp",
    about = "Tree GP for symbolic regression with sharpness-aware selection",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute one evolutionary run and write its stats, elite and config.
    Run(RunArgs),
    /// Execute an (algorithms x problems x runs) grid; resumable.
    Grid(GridArgs),
    /// Aggregate grid outputs into a rank table (optionally curve CSVs).
    Rank(RankArgs),
    /// Map a serialized tree to its phenotype on a dataset.
    Phenotype(PhenotypeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamModeArg {
    None,
    In,
    Out,
}

impl From<SamModeArg> for SamMode {
    fn from(m: SamModeArg) -> SamMode {
        match m {
            SamModeArg::None => SamMode::None,
            SamModeArg::In => SamMode::In,
            SamModeArg::Out => SamMode::Out,
        }
    }
}

/// Data-source flags shared by the subcommands. Exactly one of `--dataset`
/// and `--synthetic` must be given.
#[derive(Args, Clone, Debug)]
pub struct DataArgs {
    /// CSV file with one target column and numeric features.
    #[arg(long, conflicts_with = "synthetic")]
    pub dataset: Option<PathBuf>,

    /// Synthetic problem: levy, ackley, rastrigin or rosenbrock.
    #[arg(long)]
    pub synthetic: Option<String>,

    /// Target column: name (needs --header) or 0-based index.
    /// Defaults to the last column.
    #[arg(long)]
    pub target: Option<String>,

    /// Treat the first CSV row as a header.
    #[arg(long)]
    pub header: bool,

    /// Sample size for synthetic problems.
    #[arg(long, default_value_t = 100)]
    pub points: usize,

    /// Train fraction; defaults to 0.7 for CSV data and 0.5 for synthetic.
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

impl DataArgs {
    fn default_fraction(&self) -> f64 {
        if self.synthetic.is_some() {
            0.5
        } else {
            0.7
        }
    }

    /// Load or sample the dataset; data seed is derived from `seed` so the
    /// same flags reproduce the same bytes.
    pub fn build(&self, seed: u64) -> Result<Dataset> {
        match (&self.dataset, &self.synthetic) {
            (Some(path), None) => load_dataset(path, &self.target, self.header),
            (None, Some(name)) => {
                let f = SyntheticFn::from_name(name)
                    .ok_or_else(|| anyhow!("unknown synthetic function `{name}`"))?;
                let mut rng = derive_rng(seed, &[tag::DATA, hash_label(f.name())]);
                Ok(sample_synthetic(f, self.points, &mut rng))
            }
            (None, None) => bail!("exactly one data source required: --dataset or --synthetic"),
            (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
        }
    }
}

fn load_dataset(path: &Path, target: &Option<String>, header: bool) -> Result<Dataset> {
    // Peek the width so "last column" can be resolved without a flag.
    use std::io::BufRead;
    let file = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut first_line = String::new();
    std::io::BufReader::new(file)
        .read_line(&mut first_line)
        .with_context(|| format!("reading {}", path.display()))?;
    let width = first_line.trim_end().split(',').count();
    let column = match target {
        None => TargetColumn::Index(width.saturating_sub(1)),
        Some(t) => match t.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(t.clone()),
        },
    };
    load_csv(path, &column, header).with_context(|| format!("loading {}", path.display()))
}

#[derive(Args, Clone, Debug)]
pub struct EvolutionArgs {
    #[arg(long, default_value_t = 100)]
    pub pop_size: usize,

    #[arg(long, default_value_t = 50)]
    pub generations: usize,

    #[arg(long, default_value_t = 0.8)]
    pub p_crossover: f64,

    #[arg(long, default_value_t = 0.2)]
    pub p_mutation: f64,

    #[arg(long, default_value_t = 5)]
    pub init_max_depth: usize,

    #[arg(long, default_value_t = 1)]
    pub elitism: usize,

    #[arg(long, default_value_t = 6)]
    pub tournament_a: usize,

    #[arg(long, default_value_t = 3)]
    pub tournament_b: usize,

    /// Measure the genotype-phenotype mapping every k-th generation.
    #[arg(long, default_value_t = 1)]
    pub gpm_every: usize,

    /// Evaluate and score in parallel (results identical to serial).
    #[arg(long)]
    pub parallel: bool,
}

impl EvolutionArgs {
    fn run_config(&self, sam: SamConfig, seed: u64) -> RunConfig {
        RunConfig {
            pop_size: self.pop_size,
            generations: self.generations,
            elitism_count: self.elitism,
            tournament_size_a: self.tournament_a,
            tournament_size_b: self.tournament_b,
            variation: VariationConfig {
                p_crossover: self.p_crossover,
                p_mutation: self.p_mutation,
                init_max_depth: self.init_max_depth,
                constant_range: (-1.0, 1.0),
            },
            sam,
            seed,
            parallel: self.parallel,
            gpm_every: self.gpm_every,
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub evolution: EvolutionArgs,

    /// Sharpness mode.
    #[arg(long, value_enum, default_value_t = SamModeArg::None)]
    pub sam: SamModeArg,

    /// Sharpness noise magnitude.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,

    /// Sharpness perturbation count.
    #[arg(long, default_value_t = 10)]
    pub n: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory (overridden by SAMGP_OUT_DIR).
    #[arg(long, default_value = "samgp_out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Synthetic problems: "all", a comma list of names, or "none".
    #[arg(long, default_value = "all")]
    pub synthetic: String,

    /// Additional CSV problems (target/header flags apply to each).
    #[arg(long)]
    pub dataset: Vec<PathBuf>,

    #[arg(long)]
    pub target: Option<String>,

    #[arg(long)]
    pub header: bool,

    #[arg(long, default_value_t = 100)]
    pub points: usize,

    #[arg(long)]
    pub train_fraction: Option<f64>,

    /// Which sharpness families to include: in, out, both or none.
    #[arg(long, default_value = "both")]
    pub modes: String,

    /// Noise magnitudes of the grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.5, 1.0])]
    pub epsilons: Vec<f64>,

    /// Perturbation counts of the grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 50])]
    pub ns: Vec<usize>,

    /// Monte-Carlo runs per (algorithm, problem) cell.
    #[arg(long, default_value_t = 60)]
    pub runs: usize,

    #[command(flatten)]
    pub evolution: EvolutionArgs,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "samgp_grid")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    /// Directory written by `samgp grid`.
    #[arg(long)]
    pub grid_dir: PathBuf,

    /// Where to write rank.txt / rank.csv (default: the grid directory).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also export per-(problem, metric) curve CSVs under <out>/curves.
    #[arg(long)]
    pub export_curves: bool,
}

#[derive(Args, Debug)]
pub struct PhenotypeArgs {
    /// Prefix expression, e.g. "(add x0 0.0)".
    #[arg(long, conflicts_with = "tree_file")]
    pub tree: Option<String>,

    /// File holding the prefix expression.
    #[arg(long)]
    pub tree_file: Option<PathBuf>,

    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Filesystem-safe algorithm label, e.g. `gp`, `sam_in_n10_e0.1`.
pub fn algorithm_label(sam: &SamConfig) -> String {
    match sam.mode {
        SamMode::None => "gp".to_string(),
        SamMode::In => format!("sam_in_n{}_e{}", sam.n, sam.epsilon),
        SamMode::Out => format!("sam_out_n{}_e{}", sam.n, sam.epsilon),
    }
}

fn out_dir(flag: &Path) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| flag.to_path_buf())
}

/// Everything needed to rebuild a run, written alongside its outputs.
#[derive(Serialize, Deserialize, Debug)]
pub struct ConfigEcho {
    pub problem: String,
    pub algorithm: String,
    pub data_source: String,
    pub points: Option<usize>,
    pub train_fraction: f64,
    pub run: RunConfig,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct RunSummary {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub final_elite_expr: String,
    pub final_elite_train_r2: Option<f64>,
    pub final_elite_test_r2: Option<f64>,
    pub generations: usize,
    pub wall_time_secs: f64,
    pub sharpness_evals: u64,
    pub noise_draws: u64,
}

fn write_run_outputs(
    dir: &Path,
    stem: &str,
    result: &RunResult,
    echo: &ConfigEcho,
) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    write(&format!("{stem}.stats.csv"), stats_to_csv(&result.stats))?;
    write(&format!("{stem}.elite.txt"), format!("{}\n", result.final_elite_expr))?;
    write(
        &format!("{stem}.config.json"),
        serde_json::to_string_pretty(echo)? + "\n",
    )?;
    let summary = RunSummary {
        problem: echo.problem.clone(),
        algorithm: echo.algorithm.clone(),
        seed: result.config.seed,
        final_elite_expr: result.final_elite_expr.clone(),
        final_elite_train_r2: result.final_elite_train_r2,
        final_elite_test_r2: result.final_elite_test_r2,
        generations: result.config.generations,
        wall_time_secs: result.wall_time_secs,
        sharpness_evals: result.sharpness_evals,
        noise_draws: result.noise_draws,
    };
    // The summary is written last and marks the run as complete.
    write(
        &format!("{stem}.summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let sam = SamConfig {
        mode: args.sam.into(),
        n: args.n,
        epsilon: args.epsilon,
    };
    let label = algorithm_label(&sam);
    let dataset = args.data.build(args.seed)?;
    let fraction = args
        .data
        .train_fraction
        .unwrap_or_else(|| args.data.default_fraction());
    let mut split_rng = derive_rng(args.seed, &[tag::SPLIT]);
    let split = monte_carlo_split(&dataset, fraction, &mut split_rng)?;

    let cfg = args.evolution.run_config(sam, args.seed);
    let result = run(&cfg, &split)?;

    let echo = ConfigEcho {
        problem: dataset.name.clone(),
        algorithm: label.clone(),
        data_source: args
            .data
            .dataset
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| format!("synthetic:{}", dataset.name)),
        points: args.data.synthetic.as_ref().map(|_| args.data.points),
        train_fraction: fraction,
        run: cfg,
    };
    let dir = out_dir(&args.out);
    write_run_outputs(&dir, "run", &result, &echo)?;

    println!("problem:   {}", dataset.name);
    println!("algorithm: {label}");
    println!("elite:     {}", result.final_elite_expr);
    match result.final_elite_test_r2 {
        Some(v) => println!("test R^2:  {v}"),
        None => println!("test R^2:  invalid"),
    }
    println!("outputs:   {}", dir.display());
    Ok(())
}

fn parse_modes(modes: &str) -> Result<Vec<SamMode>> {
    match modes {
        "in" => Ok(vec![SamMode::In]),
        "out" => Ok(vec![SamMode::Out]),
        "both" => Ok(vec![SamMode::In, SamMode::Out]),
        "none" => Ok(vec![]),
        other => bail!("unknown --modes value `{other}` (in, out, both, none)"),
    }
}

fn grid_algorithms(args: &GridArgs) -> Result<Vec<SamConfig>> {
    let mut algos = vec![SamConfig::none()];
    for mode in parse_modes(&args.modes)? {
        for &n in &args.ns {
            for &epsilon in &args.epsilons {
                algos.push(SamConfig { mode, n, epsilon });
            }
        }
    }
    Ok(algos)
}

fn grid_problems(args: &GridArgs) -> Result<Vec<(String, f64, Arc<Dataset>)>> {
    let mut problems = Vec::new();
    if args.synthetic != "none" {
        let names: Vec<&str> = if args.synthetic == "all" {
            SyntheticFn::ALL.iter().map(|f| f.name()).collect()
        } else {
            args.synthetic.split(',').collect()
        };
        for name in names {
            let f = SyntheticFn::from_name(name)
                .ok_or_else(|| anyhow!("unknown synthetic function `{name}`"))?;
            // One fixed sample per problem; runs differ only in their splits.
            let mut rng = derive_rng(args.seed, &[tag::DATA, hash_label(f.name())]);
            let d = sample_synthetic(f, args.points, &mut rng);
            problems.push((
                d.name.clone(),
                args.train_fraction.unwrap_or(0.5),
                Arc::new(d),
            ));
        }
    }
    for path in &args.dataset {
        let d = load_dataset(path, &args.target, args.header)?;
        problems.push((
            d.name.clone(),
            args.train_fraction.unwrap_or(0.7),
            Arc::new(d),
        ));
    }
    if problems.is_empty() {
        bail!("grid needs at least one problem (--synthetic or --dataset)");
    }
    Ok(problems)
}

struct GridCellRun {
    problem: String,
    fraction: f64,
    dataset: Arc<Dataset>,
    sam: SamConfig,
    label: String,
    run_idx: usize,
}

fn execute_cell_run(item: &GridCellRun, args: &GridArgs, root: &Path) -> Result<bool> {
    let dir = root.join(&item.problem).join(&item.label);
    let stem = format!("r{:03}", item.run_idx);
    if dir.join(format!("{stem}.summary.json")).exists() {
        return Ok(false); // completed earlier; resume skips it
    }

    let run_seed = derive_seed(
        args.seed,
        &[
            hash_label(&item.label),
            hash_label(&item.problem),
            item.run_idx as u64,
        ],
    );
    let mut split_rng = derive_rng(run_seed, &[tag::SPLIT]);
    let split = monte_carlo_split(&item.dataset, item.fraction, &mut split_rng)?;

    // Grid-level parallelism runs cells concurrently; keep each run serial.
    let mut cfg = args.evolution.run_config(item.sam, run_seed);
    cfg.parallel = false;
    let result = run(&cfg, &split)?;
    let echo = ConfigEcho {
        problem: item.problem.clone(),
        algorithm: item.label.clone(),
        data_source: format!("grid:{}", item.problem),
        points: Some(item.dataset.rows()),
        train_fraction: item.fraction,
        run: cfg,
    };
    write_run_outputs(&dir, &stem, &result, &echo)?;
    Ok(true)
}

pub fn cmd_grid(args: &GridArgs) -> Result<()> {
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let root = out_dir(&args.out);
    let algorithms = grid_algorithms(args)?;
    let problems = grid_problems(args)?;

    let mut items = Vec::new();
    for (problem, fraction, dataset) in &problems {
        for sam in &algorithms {
            for run_idx in 0..args.runs {
                items.push(GridCellRun {
                    problem: problem.clone(),
                    fraction: *fraction,
                    dataset: Arc::clone(dataset),
                    sam: *sam,
                    label: algorithm_label(sam),
                    run_idx,
                });
            }
        }
    }
    println!(
        "grid: {} algorithms x {} problems x {} runs = {} cells",
        algorithms.len(),
        problems.len(),
        args.runs,
        items.len()
    );

    let outcomes: Vec<(String, Result<bool>)> = if args.evolution.parallel {
        items
            .par_iter()
            .map(|item| {
                let key = format!("{}/{}/r{:03}", item.problem, item.label, item.run_idx);
                (key, execute_cell_run(item, args, &root))
            })
            .collect()
    } else {
        items
            .iter()
            .map(|item| {
                let key = format!("{}/{}/r{:03}", item.problem, item.label, item.run_idx);
                (key, execute_cell_run(item, args, &root))
            })
            .collect()
    };

    let mut executed = 0usize;
    let mut skipped = 0usize;
    let mut failures = Vec::new();
    for (key, outcome) in outcomes {
        match outcome {
            Ok(true) => executed += 1,
            Ok(false) => skipped += 1,
            Err(e) => failures.push(format!("{key}: {e:#}")),
        }
    }
    println!("executed {executed}, skipped {skipped}, failed {}", failures.len());
    for f in &failures {
        eprintln!("cell failed: {f}");
    }
    if !failures.is_empty() {
        bail!("{} grid cells failed", failures.len());
    }
    Ok(())
}

fn sorted_dirs(path: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

type CellMeans = BTreeMap<(String, String), f64>;

/// Collect (algorithm, problem) -> mean final elite test R² plus the stats
/// series of every completed run under a grid directory.
fn collect_grid_results(grid_dir: &Path) -> Result<(CellMeans, Vec<CurveRun>)> {
    let mut samples: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut curves = Vec::new();
    for problem_dir in sorted_dirs(grid_dir)? {
        let problem = problem_dir
            .file_name()
            .unwrap()
            .to_string_lossy()
            .into_owned();
        for algo_dir in sorted_dirs(&problem_dir)? {
            let algorithm = algo_dir
                .file_name()
                .unwrap()
                .to_string_lossy()
                .into_owned();
            let mut files: Vec<PathBuf> = std::fs::read_dir(&algo_dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.file_name()
                        .map(|n| n.to_string_lossy().ends_with(".summary.json"))
                        .unwrap_or(false)
                })
                .collect();
            files.sort();
            for summary_path in files {
                let text = std::fs::read_to_string(&summary_path)?;
                let summary: RunSummary = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", summary_path.display()))?;
                if let Some(r2) = summary.final_elite_test_r2 {
                    samples
                        .entry((algorithm.clone(), problem.clone()))
                        .or_default()
                        .push(r2);
                }
                let stats_path = summary_path
                    .to_string_lossy()
                    .replace(".summary.json", ".stats.csv");
                if let Ok(text) = std::fs::read_to_string(&stats_path) {
                    if let Ok(stats) = stats_from_csv(&text) {
                        curves.push(CurveRun {
                            problem: problem.clone(),
                            algorithm: algorithm.clone(),
                            stats,
                        });
                    }
                }
            }
        }
    }
    if samples.is_empty() {
        bail!("no completed runs under {}", grid_dir.display());
    }
    let cells = samples
        .into_iter()
        .map(|(k, v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (k, mean)
        })
        .collect();
    Ok((cells, curves))
}

pub fn cmd_rank(args: &RankArgs) -> Result<()> {
    let (cells, curves) = collect_grid_results(&args.grid_dir)?;
    let table = rank_report(&cells)?;
    let text = table.render_text();
    print!("{text}");

    let dest = args
        .out
        .clone()
        .map(|p| out_dir(&p))
        .unwrap_or_else(|| args.grid_dir.clone());
    std::fs::create_dir_all(&dest)?;
    std::fs::write(dest.join("rank.txt"), &text)?;
    std::fs::write(dest.join("rank.csv"), table.to_csv())?;
    if args.export_curves {
        let files = export_curves(&curves, &dest.join("curves"))?;
        println!("wrote {} curve files to {}", files.len(), dest.join("curves").display());
    }
    println!("rank table written to {}", dest.display());
    Ok(())
}

pub fn cmd_phenotype(args: &PhenotypeArgs) -> Result<()> {
    let text = match (&args.tree, &args.tree_file) {
        (Some(t), None) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        (None, None) => bail!("provide --tree or --tree-file"),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let tree: ExprTree = text
        .trim()
        .parse()
        .map_err(|e| anyhow!("cannot parse tree: {e}"))?;
    let dataset = args.data.build(args.seed)?;
    if let Some(max) = tree.max_feature_index() {
        if max >= dataset.n_features() {
            bail!(
                "tree references x{max} but the dataset has {} features",
                dataset.n_features()
            );
        }
    }
    let report = extract_phenotype(&tree, &dataset.features, args.tol)?;
    println!("genotype:       {tree}");
    println!("phenotype:      {}", report.phenotype);
    println!("genotype size:  {}", report.genotype_size);
    println!("phenotype size: {}", report.phenotype_size);
    println!("redundancy:     {}", report.redundancy);
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Grid(args) => cmd_grid(&args),
        Command::Rank(args) => cmd_rank(&args),
        Command::Phenotype(args) => cmd_phenotype(&args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_filesystem_safe_and_stable() {
        assert_eq!(algorithm_label(&SamConfig::none()), "gp");
        let sam = SamConfig {
            mode: SamMode::In,
            n: 10,
            epsilon: 0.1,
        };
        assert_eq!(algorithm_label(&sam), "sam_in_n10_e0.1");
        let sam = SamConfig {
            mode: SamMode::Out,
            n: 50,
            epsilon: 1.0,
        };
        assert_eq!(algorithm_label(&sam), "sam_out_n50_e1");
    }

    #[test]
    fn grid_algorithm_count_matches_mode_selection() {
        let args = GridArgs {
            synthetic: "all".into(),
            dataset: vec![],
            target: None,
            header: false,
            points: 100,
            train_fraction: None,
            modes: "in".into(),
            epsilons: vec![0.1, 0.2, 0.5, 1.0],
            ns: vec![10, 20, 50],
            runs: 1,
            evolution: EvolutionArgs {
                pop_size: 100,
                generations: 50,
                p_crossover: 0.8,
                p_mutation: 0.2,
                init_max_depth: 5,
                elitism: 1,
                tournament_a: 6,
                tournament_b: 3,
                gpm_every: 1,
                parallel: false,
            },
            seed: 0,
            out: PathBuf::from("unused"),
        };
        // GP + 12 SAM cells.
        assert_eq!(grid_algorithms(&args).unwrap().len(), 13);
        let both = GridArgs {
            modes: "both".into(),
            ..args
        };
        assert_eq!(grid_algorithms(&both).unwrap().len(), 25);
    }

    #[test]
    fn unknown_mode_is_rejected() {
        assert!(parse_modes("sideways").is_err());
    }
}

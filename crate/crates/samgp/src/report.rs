//! Cross-run aggregation: rank tables over final-generation test fitness and
//! plot-ready per-metric curve exports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evolve::GenerationStats;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("missing result cell: algorithm `{algorithm}`, problem `{problem}`")]
    MissingCell { algorithm: String, problem: String },
    #[error("no results to aggregate")]
    EmptyInput,
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Grouping convention for algorithm labels: `gp`, `sam_in_n10_e0.1`,
/// `sam_out_n20_e0.5`, ...
pub fn algorithm_group(label: &str) -> &str {
    if label.starts_with("sam_in") {
        "sam_in"
    } else if label.starts_with("sam_out") {
        "sam_out"
    } else {
        label
    }
}

/// Per-problem ranks of final test fitness per algorithm. Ranks ascend with
/// fitness: the best algorithm on a problem receives rank `|algorithms|`.
/// Ties share the average of the covered ranks.
#[derive(Clone, Debug)]
pub struct RankTable {
    pub algorithms: Vec<String>,
    pub problems: Vec<String>,
    /// `ranks[p][a]` for problem `p`, algorithm `a`.
    pub ranks: Vec<Vec<f64>>,
    /// Mean rank per algorithm across problems.
    pub average_by_algorithm: Vec<f64>,
    /// Mean rank per algorithm family (`gp`, `sam_in`, `sam_out`, ...).
    pub group_averages: Vec<(String, f64)>,
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1..=j + 1).sum::<usize>() as f64 / (j - i + 1) as f64;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Build a rank table from mean final-generation test R² per
/// (algorithm, problem) cell. Every algorithm must be populated for every
/// problem.
pub fn rank_report(cells: &BTreeMap<(String, String), f64>) -> Result<RankTable, ReportError> {
    if cells.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut algorithms: Vec<String> = cells.keys().map(|(a, _)| a.clone()).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut problems: Vec<String> = cells.keys().map(|(_, p)| p.clone()).collect();
    problems.sort();
    problems.dedup();

    let mut ranks = Vec::with_capacity(problems.len());
    for p in &problems {
        let mut values = Vec::with_capacity(algorithms.len());
        for a in &algorithms {
            let v = cells.get(&(a.clone(), p.clone())).ok_or_else(|| {
                ReportError::MissingCell {
                    algorithm: a.clone(),
                    problem: p.clone(),
                }
            })?;
            values.push(*v);
        }
        ranks.push(average_ranks(&values));
    }

    let average_by_algorithm: Vec<f64> = (0..algorithms.len())
        .map(|a| ranks.iter().map(|row| row[a]).sum::<f64>() / problems.len() as f64)
        .collect();

    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (a, avg) in algorithms.iter().zip(&average_by_algorithm) {
        groups.entry(algorithm_group(a)).or_default().push(*avg);
    }
    let group_averages = groups
        .into_iter()
        .map(|(g, vals)| (g.to_string(), vals.iter().sum::<f64>() / vals.len() as f64))
        .collect();

    Ok(RankTable {
        algorithms,
        problems,
        ranks,
        average_by_algorithm,
        group_averages,
    })
}

/// Highest-average-rank algorithm within a labelled family.
pub fn best_in_group<'a>(averages: &'a [(String, f64)], group: &str) -> Option<(&'a str, f64)> {
    averages
        .iter()
        .filter(|(label, _)| algorithm_group(label) == group)
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(label, v)| (label.as_str(), *v))
}

impl RankTable {
    pub fn best_in_group(&self, group: &str) -> Option<(&str, f64)> {
        let pairs: Vec<(String, f64)> = self
            .algorithms
            .iter()
            .cloned()
            .zip(self.average_by_algorithm.iter().copied())
            .collect();
        best_in_group(&pairs, group).map(|(label, v)| {
            let idx = self.algorithms.iter().position(|a| a == label).unwrap();
            (self.algorithms[idx].as_str(), v)
        })
    }

    /// Plain-text rendering: one row per problem plus the averages, and,
    /// when the algorithm set forms the full two-family grid, a pivot with
    /// one column per (n, eps) cell and IN / OUT / AVG rows.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Generalization ranks (higher = better)\n");
        let width = self
            .algorithms
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(8)
            .max(10);
        out.push_str(&format!("{:<14}", "problem"));
        for a in &self.algorithms {
            out.push_str(&format!(" {a:>width$}"));
        }
        out.push('\n');
        for (p, row) in self.problems.iter().zip(&self.ranks) {
            out.push_str(&format!("{p:<14}"));
            for r in row {
                out.push_str(&format!(" {r:>width$.2}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("{:<14}", "AVG"));
        for v in &self.average_by_algorithm {
            out.push_str(&format!(" {v:>width$.2}"));
        }
        out.push('\n');
        if let Some(pivot) = self.render_family_pivot() {
            out.push('\n');
            out.push_str(&pivot);
        }
        out.push_str("\nFamily averages:\n");
        for (g, v) in &self.group_averages {
            out.push_str(&format!("  {g:<10} {v:.2}\n"));
        }
        out
    }

    fn render_family_pivot(&self) -> Option<String> {
        // Labels follow sam_<mode>_n<count>_e<eps>; the pivot requires a gp
        // column and both families over the same cells.
        fn parse_cell(label: &str) -> Option<(&str, usize, String)> {
            let rest = label.strip_prefix("sam_")?;
            let (mode, rest) = rest.split_once("_n")?;
            let (n, eps) = rest.split_once("_e")?;
            Some((mode, n.parse().ok()?, eps.to_string()))
        }
        let gp_avg = self
            .algorithms
            .iter()
            .position(|a| a == "gp")
            .map(|i| self.average_by_algorithm[i])?;

        let mut cells: Vec<(usize, String)> = Vec::new();
        let mut by_cell: BTreeMap<(String, (usize, String)), f64> = BTreeMap::new();
        for (a, avg) in self.algorithms.iter().zip(&self.average_by_algorithm) {
            if a == "gp" {
                continue;
            }
            let (mode, n, eps) = parse_cell(a)?;
            let cell = (n, eps);
            if !cells.contains(&cell) {
                cells.push(cell.clone());
            }
            by_cell.insert((mode.to_string(), cell), *avg);
        }
        cells.sort();
        for cell in &cells {
            by_cell.get(&("in".to_string(), cell.clone()))?;
            by_cell.get(&("out".to_string(), cell.clone()))?;
        }

        let mut out = String::from("By sharpness configuration (average rank):\n");
        out.push_str(&format!("{:<5} {:>8}", "", "gp"));
        for (n, eps) in &cells {
            out.push_str(&format!(" {:>8}", format!("n{n}/e{eps}")));
        }
        out.push('\n');
        for mode in ["in", "out"] {
            out.push_str(&format!("{:<5} {:>8}", mode.to_uppercase(), ""));
            for cell in &cells {
                let v = by_cell[&(mode.to_string(), cell.clone())];
                out.push_str(&format!(" {v:>8.2}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("{:<5} {gp_avg:>8.2}", "AVG"));
        for cell in &cells {
            let v = (by_cell[&("in".to_string(), cell.clone())]
                + by_cell[&("out".to_string(), cell.clone())])
                / 2.0;
            out.push_str(&format!(" {v:>8.2}"));
        }
        out.push('\n');
        Some(out)
    }

    /// CSV rendering of the rank matrix plus the average row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("problem");
        for a in &self.algorithms {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for (p, row) in self.problems.iter().zip(&self.ranks) {
            out.push_str(p);
            for r in row {
                out.push_str(&format!(",{r}"));
            }
            out.push('\n');
        }
        out.push_str("AVG");
        for v in &self.average_by_algorithm {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        out
    }
}

/// One completed run's stats series, tagged for aggregation.
#[derive(Clone, Debug)]
pub struct CurveRun {
    pub problem: String,
    pub algorithm: String,
    pub stats: Vec<GenerationStats>,
}

type MetricGetter = fn(&GenerationStats) -> Option<f64>;

/// The exported per-generation metrics.
pub const CURVE_METRICS: [(&str, MetricGetter); 8] = [
    ("mean_train_r2", |s| s.mean_train_r2),
    ("mean_test_r2", |s| s.mean_test_r2),
    ("elite_train_r2", |s| s.elite_train_r2),
    ("elite_test_r2", |s| s.elite_test_r2),
    ("mean_tree_size", |s| Some(s.mean_tree_size)),
    ("mean_phenotype_size", |s| s.mean_phenotype_size),
    ("mean_redundancy", |s| s.mean_redundancy),
    ("mean_sharpness", |s| s.mean_sharpness),
];

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Write one CSV per (problem, metric) with columns
/// `generation,algorithm,mean,std` aggregated across runs. Deterministic:
/// re-exporting the same results produces identical bytes.
pub fn export_curves(runs: &[CurveRun], out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if runs.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| ReportError::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;

    let mut grouped: BTreeMap<&str, BTreeMap<&str, Vec<&CurveRun>>> = BTreeMap::new();
    for r in runs {
        grouped
            .entry(&r.problem)
            .or_default()
            .entry(&r.algorithm)
            .or_default()
            .push(r);
    }

    let mut written = Vec::new();
    for (problem, by_algo) in &grouped {
        for (metric, getter) in CURVE_METRICS {
            let mut body = String::from("generation,algorithm,mean,std\n");
            for (algo, cell_runs) in by_algo {
                let gens = cell_runs.iter().map(|r| r.stats.len()).min().unwrap_or(0);
                for g in 0..gens {
                    let values: Vec<f64> =
                        cell_runs.iter().filter_map(|r| getter(&r.stats[g])).collect();
                    if values.is_empty() {
                        body.push_str(&format!("{g},{algo},,\n"));
                    } else {
                        let (m, s) = mean_std(&values);
                        body.push_str(&format!("{g},{algo},{m},{s}\n"));
                    }
                }
            }
            let path = out_dir.join(format!("{problem}__{metric}.csv"));
            std::fs::write(&path, body).map_err(|e| ReportError::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            written.push(path);
        }
    }
    Ok(written)
}

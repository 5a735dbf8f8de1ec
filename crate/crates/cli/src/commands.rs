use std::path::Path;

use serde::Serialize;

use mgcmn::data::{DatasetSummary, Splits};
use mgcmn::gradcheck::{run_gradcheck, GradcheckOptions};
use mgcmn::model::{self, ModelConfig, DEFAULT_GRID_SEEDS};
use mgcmn::motif::{motif_stats as compute_stats, MixRecipe, MotifSemantics, MotifStats};
use mgcmn::oracle_check::{run_oracle_check, OracleCheckOptions};

use crate::config::RunConfig;
use crate::CliError;

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SplitSizes {
    train: usize,
    validation: usize,
    test: usize,
}

impl From<&Splits> for SplitSizes {
    fn from(s: &Splits) -> Self {
        Self {
            train: s.train.len(),
            validation: s.validation.len(),
            test: s.test.len(),
        }
    }
}

#[derive(Serialize)]
struct MotifStatsOutput {
    dataset: DatasetSummary,
    #[serde(flatten)]
    stats: MotifStats,
}

pub fn motif_stats(rc: &RunConfig) -> Result<bool, CliError> {
    let d = rc.load_graph()?;
    let stats = compute_stats(&d.graph)?;
    let holds = stats.wedge_bound_holds && stats.triangle_support_holds;
    emit(
        &MotifStatsOutput {
            dataset: d.summary(),
            stats,
        },
        rc.out.as_deref(),
    )?;
    Ok(holds)
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    dataset: DatasetSummary,
    splits: SplitSizes,
    config: &'a ModelConfig,
    report: model::TrainReport,
}

pub fn train(rc: &RunConfig) -> Result<bool, CliError> {
    let config = rc.model_config()?;
    let (d, splits) = rc.load_dataset()?;
    let (trained, report) = model::train(&config, &d.graph, &splits)?;
    let model_path = rc
        .model_out
        .clone()
        .or_else(|| rc.out.as_ref().map(|p| p.with_extension("model")));
    match &model_path {
        Some(p) => model::save_model(p, &trained, &config)?,
        None => log::warn!("no --out or --model-out given; trained weights are not saved"),
    }
    emit(
        &TrainOutput {
            dataset: d.summary(),
            splits: (&splits).into(),
            config: &config,
            report,
        },
        rc.out.as_deref(),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct EvaluateOutput {
    dataset: DatasetSummary,
    config: ModelConfig,
    train_accuracy: f64,
    val_accuracy: f64,
    test_accuracy: f64,
}

pub fn evaluate(rc: &RunConfig, model_path: &Path) -> Result<bool, CliError> {
    let (d, splits) = rc.load_dataset()?;
    let (m, config) = model::load_model(model_path, &d.graph)?;
    let g = &d.graph;
    let score = |mask: &[usize]| -> Result<f64, CliError> {
        if mask.is_empty() {
            return Ok(f64::NAN);
        }
        Ok(model::evaluate(&m, g.features(), g.labels(), mask)?)
    };
    emit(
        &EvaluateOutput {
            dataset: d.summary(),
            train_accuracy: score(&splits.train)?,
            val_accuracy: score(&splits.validation)?,
            test_accuracy: score(&splits.test)?,
            config,
        },
        rc.out.as_deref(),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct ProtocolOutput<'a> {
    dataset: DatasetSummary,
    splits: SplitSizes,
    config: &'a ModelConfig,
    n_runs: usize,
    #[serde(flatten)]
    result: model::ProtocolResult,
}

pub fn protocol(rc: &RunConfig) -> Result<bool, CliError> {
    let config = rc.model_config()?;
    let n_runs = rc.runs()?;
    let (d, splits) = rc.load_dataset()?;
    let result = model::run_protocol(&config, &d.graph, &splits, n_runs)?;
    emit(
        &ProtocolOutput {
            dataset: d.summary(),
            splits: (&splits).into(),
            config: &config,
            n_runs,
            result,
        },
        rc.out.as_deref(),
    )?;
    Ok(true)
}

pub fn gradcheck(seed: Option<u64>, dropout: f64, inject_error: bool, out: Option<&Path>) -> Result<bool, CliError> {
    let opts = GradcheckOptions {
        seed: seed.unwrap_or(0),
        dropout,
        inject_error,
        ..GradcheckOptions::default()
    };
    let report = run_gradcheck(&opts)?;
    eprintln!(
        "max relative gradient error {:.3e} (tolerance {:.0e}): {}",
        report.max_relative_error,
        report.tolerance,
        if report.passed { "pass" } else { "FAIL" }
    );
    emit(&report, out)?;
    Ok(report.passed)
}

pub fn oracle_check(
    n_graphs: usize,
    min_n: usize,
    max_n: usize,
    seed: u64,
    semantics: MotifSemantics,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let report = run_oracle_check(&OracleCheckOptions {
        n_graphs,
        min_n,
        max_n,
        seed,
        semantics,
    })?;
    for m in &report.mismatches {
        eprintln!(
            "graph {} {} ({}, {}): kernel {} oracle {}",
            m.graph, m.motif, m.row, m.col, m.kernel, m.oracle
        );
    }
    for note in &report.intentionally_divergent {
        eprintln!("note: {note}");
    }
    emit(&report, out)?;
    Ok(report.passed)
}

/// Reads one recipe per non-blank line; `#` starts a comment.
pub fn read_grid(path: &Path) -> Result<Vec<MixRecipe>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut grid = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let recipe = line
            .parse()
            .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        grid.push(recipe);
    }
    if grid.is_empty() {
        return Err(CliError::Config(format!("{} lists no recipes", path.display())));
    }
    Ok(grid)
}

#[derive(Serialize)]
struct GridOutput<'a> {
    dataset: DatasetSummary,
    config: &'a ModelConfig,
    n_seeds: usize,
    #[serde(flatten)]
    result: model::GridSearchResult,
}

pub fn grid_search(rc: &RunConfig, grid_path: &Path) -> Result<bool, CliError> {
    let config = rc.model_config()?;
    let grid = read_grid(grid_path)?;
    let n_seeds = rc.grid_seeds.unwrap_or(DEFAULT_GRID_SEEDS);
    let (d, splits) = rc.load_dataset()?;
    let result = model::grid_search(&config, &d.graph, &splits, &grid, n_seeds)?;
    emit(
        &GridOutput {
            dataset: d.summary(),
            config: &config,
            n_seeds,
            result,
        },
        rc.out.as_deref(),
    )?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("grid.txt");
        std::fs::write(&p, "# ratios\nedge:1\n\nedge:8,triangle:1  # comment\n").unwrap();
        let g = read_grid(&p).unwrap();
        assert_eq!(g.len(), 2);
        std::fs::write(&p, "edge:1\nedge:x\n").unwrap();
        assert!(matches!(read_grid(&p), Err(CliError::Config(m)) if m.contains(":2:")));
    }
}

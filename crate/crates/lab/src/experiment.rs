use std::time::{Duration, Instant};

use selfnorm_core::empirics::EmpiricalSample;
use selfnorm_core::rng::mix64;
use selfnorm_core::{BoundEvaluation, Model};

use crate::config::{Cell, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::parallel::Runner;

/// Seed of one cell's replications, derived from the master seed and the
/// cell's model.
pub fn cell_seed(master_seed: u64, cell: &Cell) -> u64 {
    mix64(master_seed ^ cell.spec.fingerprint())
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub eval: BoundEvaluation,
    pub degenerate_count: usize,
    /// Fraction of replicates with statistic `<= 0`.
    pub p_nonpositive: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
    pub workers: usize,
    pub elapsed: Duration,
}

/// Replicates one cell and measures it against Φ and its bound.
pub fn run_cell(config: &ExperimentConfig, cell: &Cell, runner: &Runner) -> Result<(EmpiricalSample, CellResult)> {
    let wrap = |source| LabError::Cell {
        cell: cell.describe(),
        source,
    };
    let model = Model::new(cell.spec).map_err(wrap)?;
    let seed = cell_seed(config.seed, cell);
    let sample = runner
        .replicate(&model, config.statistic, config.m, seed)
        .map_err(wrap)?;
    let nn = runner
        .estimate_nn(&model, config.p, config.plug_in_m, seed)
        .map_err(wrap)?;
    let eval = BoundEvaluation::evaluate(cell.n, cell.alpha, config.statistic, &sample, nn, config.delta);
    let result = CellResult {
        cell: *cell,
        eval,
        degenerate_count: sample.degenerate_count(),
        p_nonpositive: sample.ecdf(0.0),
    };
    Ok((sample, result))
}

pub fn run_experiment(config: &ExperimentConfig, runner: &Runner) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let cells = config
        .cells()
        .iter()
        .map(|cell| run_cell(config, cell, runner).map(|(_, r)| r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        cells,
        workers: runner.workers(),
        elapsed: start.elapsed(),
    })
}

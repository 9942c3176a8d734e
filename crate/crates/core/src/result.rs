//! End-to-end run: evolve an embedding, then score it against the original data.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, DatasetMeta};
use crate::evaluate::{accuracy_pair, EvalError, ForestConfig};
use crate::fitness::{FitnessError, PreparedFitness};
use crate::gp::{evolve_with_progress, EvolveError, Individual, RunConfig};
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Everything a finished run produces. Holds dataset metadata and per-row
/// class labels for plotting, never the feature values themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub dataset: DatasetMeta,
    pub expressions: Vec<String>,
    pub best_individual: Individual,
    pub embedding: Matrix,
    pub embedding_labels: Vec<String>,
    pub fitness_history: Vec<f64>,
    pub accuracy_original: f64,
    pub accuracy_embedding: f64,
}

impl RunResult {
    pub fn dimensions(&self) -> usize {
        self.embedding.cols()
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_individual.fitness
    }
}

/// Forest settings used to score a run: defaults with the run's seed.
pub fn forest_for(config: &RunConfig) -> ForestConfig {
    ForestConfig::with_seed(config.seed)
}

pub fn run(dataset: &Dataset, config: &RunConfig) -> Result<RunResult, RunError> {
    run_with_progress(dataset, config, &forest_for(config), |_, _| {})
}

/// Full pipeline. `on_generation` receives (generations completed, best
/// fitness of that generation).
pub fn run_with_progress<F>(
    dataset: &Dataset,
    config: &RunConfig,
    forest: &ForestConfig,
    on_generation: F,
) -> Result<RunResult, RunError>
where
    F: FnMut(usize, f64),
{
    config.validate().map_err(EvolveError::from)?;
    let fitness = PreparedFitness::new(config.fitness, dataset.scaled())?;
    let evolution = evolve_with_progress(config, dataset.scaled(), &fitness, on_generation)?;
    let (accuracy_original, accuracy_embedding) =
        accuracy_pair(dataset, &evolution.embedding, forest)?;
    Ok(RunResult {
        config: config.clone(),
        dataset: dataset.meta(),
        expressions: evolution.best.render(Some(dataset.feature_names())),
        best_individual: evolution.best,
        embedding: evolution.embedding,
        embedding_labels: dataset.labels().to_vec(),
        fitness_history: evolution.fitness_history,
        accuracy_original,
        accuracy_embedding,
    })
}

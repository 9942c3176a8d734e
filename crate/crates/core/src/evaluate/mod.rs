//! Embedding quality as random-forest cross-validated accuracy.

pub mod forest;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use forest::{DecisionTree, ForestConfig, RandomForest};

use crate::data::Dataset;
use crate::matrix::Matrix;
use crate::par;

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{folds} folds requested for {n} instances")]
    TooManyFolds { folds: usize, n: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{rows} rows but {labels} labels")]
    LabelMismatch { rows: usize, labels: usize },
    #[error("forest needs at least one tree")]
    NoTrees,
}

/// Integer class codes in sorted label order.
pub fn encode_labels(labels: &[String]) -> (Vec<usize>, usize) {
    let mut codes = BTreeMap::new();
    for l in labels {
        codes.entry(l.as_str()).or_insert(0usize);
    }
    for (i, v) in codes.values_mut().enumerate() {
        *v = i;
    }
    let n_classes = codes.len();
    (labels.iter().map(|l| codes[l.as_str()]).collect(), n_classes)
}

/// Stratified fold index per instance. Each class is shuffled and dealt
/// round-robin, continuing the deal across classes so fold sizes stay
/// balanced.
pub fn stratified_folds(codes: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; codes.len()];
    let mut next = 0usize;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..codes.len()).filter(|&i| codes[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// Mean per-fold accuracy of a random forest under stratified k-fold CV.
pub fn cv_accuracy(
    x: &Matrix,
    labels: &[String],
    cfg: &ForestConfig,
    folds: usize,
) -> Result<f64, EvalError> {
    let n = x.rows();
    if labels.len() != n {
        return Err(EvalError::LabelMismatch {
            rows: n,
            labels: labels.len(),
        });
    }
    if folds < 2 {
        return Err(EvalError::TooFewFolds(folds));
    }
    if folds > n {
        return Err(EvalError::TooManyFolds { folds, n });
    }
    if cfg.n_trees == 0 {
        return Err(EvalError::NoTrees);
    }
    let (codes, n_classes) = encode_labels(labels);
    if n_classes < 2 {
        return Ok(1.0);
    }
    let assignment = stratified_folds(&codes, n_classes, folds, cfg.seed);
    let per_fold = par::map_range(folds, |f| {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assignment[i] == f);
        let forest = RandomForest::fit(x, &codes, &train, n_classes, cfg, f as u64);
        let correct = test
            .iter()
            .filter(|&&i| forest.predict_row(x.row(i)) == codes[i])
            .count();
        correct as f64 / test.len() as f64
    });
    Ok(per_fold.iter().sum::<f64>() / folds as f64)
}

/// Accuracy on the scaled original data and on the embedding, with the same
/// folds and forest seeds for both.
pub fn accuracy_pair(
    dataset: &Dataset,
    embedding: &Matrix,
    cfg: &ForestConfig,
) -> Result<(f64, f64), EvalError> {
    let original = cv_accuracy(dataset.scaled(), dataset.labels(), cfg, DEFAULT_FOLDS)?;
    let reduced = cv_accuracy(embedding, dataset.labels(), cfg, DEFAULT_FOLDS)?;
    Ok((original, reduced))
}

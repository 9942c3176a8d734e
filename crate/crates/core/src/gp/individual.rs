use serde::{Deserialize, Serialize};

use super::tree::Node;
use crate::matrix::Matrix;

/// A forest of trees, one per embedding dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub trees: Vec<Node>,
    /// Minimised cost; NaN until evaluated, +inf when penalised.
    pub fitness: f64,
    pub size: usize,
}

impl Individual {
    pub fn new(trees: Vec<Node>) -> Self {
        let size = trees.iter().map(Node::size).sum();
        Self {
            trees,
            fitness: f64::NAN,
            size,
        }
    }

    pub fn dimensions(&self) -> usize {
        self.trees.len()
    }

    pub fn is_evaluated(&self) -> bool {
        !self.fitness.is_nan()
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Node::depth).max().unwrap_or(0)
    }

    /// Replaces one tree, keeping `size` in sync and clearing the fitness.
    pub fn with_tree(&self, index: usize, tree: Node) -> Self {
        let mut trees = self.trees.clone();
        trees[index] = tree;
        Individual::new(trees)
    }

    pub fn validate(&self, n_features: usize) -> Result<(), String> {
        self.trees.iter().try_for_each(|t| t.validate(n_features))
    }

    pub fn render(&self, feature_names: Option<&[String]>) -> Vec<String> {
        self.trees.iter().map(|t| t.render(feature_names)).collect()
    }
}

/// Maps every row of `scaled` through each tree: column `j` of the result is
/// tree `j`'s output.
pub fn evaluate_individual(ind: &Individual, scaled: &Matrix) -> Matrix {
    let n = scaled.rows();
    let d = ind.trees.len();
    let mut out = Matrix::zeros(n, d);
    for (j, tree) in ind.trees.iter().enumerate() {
        for (i, v) in tree.eval_rows(scaled).into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    out
}

//! CART decision trees (Gini) and a bagged random forest of them.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(p))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn split_candidates(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TreeNode {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn majority(counts: &[usize]) -> usize {
    // ties go to the lowest class code
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn gini_mass(counts: &[usize], total: usize) -> f64 {
    // total * gini = total - sum(c^2) / total
    if total == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|&c| c * c).sum();
    total as f64 - sq as f64 / total as f64
}

/// Best midpoint split on one feature, or `None` when the feature is
/// constant over the samples.
fn best_split_on(
    x: &Matrix,
    y: &[usize],
    samples: &[usize],
    feature: usize,
    n_classes: usize,
    scratch: &mut Vec<(f64, usize)>,
) -> Option<SplitChoice> {
    scratch.clear();
    scratch.extend(samples.iter().map(|&i| (x.get(i, feature), y[i])));
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = scratch.len();
    let mut right = vec![0usize; n_classes];
    for &(_, c) in scratch.iter() {
        right[c] += 1;
    }
    let mut left = vec![0usize; n_classes];
    let mut best: Option<SplitChoice> = None;
    for i in 0..total - 1 {
        let (v, c) = scratch[i];
        left[c] += 1;
        right[c] -= 1;
        let next = scratch[i + 1].0;
        if next <= v {
            continue;
        }
        let n_left = i + 1;
        let score = gini_mass(&left, n_left) + gini_mass(&right, total - n_left);
        if best.as_ref().is_none_or(|b| score < b.score) {
            let mut threshold = v + (next - v) / 2.0;
            if threshold >= next {
                threshold = v;
            }
            best = Some(SplitChoice {
                feature,
                threshold,
                score,
            });
        }
    }
    best
}

impl DecisionTree {
    /// Grows a tree to purity on `samples` (indices into `x`, repeats allowed).
    pub fn fit<R: Rng + ?Sized>(
        x: &Matrix,
        y: &[usize],
        samples: Vec<usize>,
        n_classes: usize,
        candidates: usize,
        rng: &mut R,
    ) -> Self {
        let p = x.cols();
        let mut nodes = vec![TreeNode::Leaf(0)];
        let mut stack = vec![(0usize, samples)];
        let mut scratch = Vec::new();
        while let Some((slot, idx)) = stack.pop() {
            let mut counts = vec![0usize; n_classes];
            for &i in &idx {
                counts[y[i]] += 1;
            }
            let label = majority(&counts);
            if counts.iter().filter(|&&c| c > 0).count() <= 1 {
                nodes[slot] = TreeNode::Leaf(label);
                continue;
            }
            let mut drawn: Vec<usize> = sample(rng, p, candidates.min(p)).into_vec();
            drawn.sort_unstable();
            let mut choice = pick(x, y, &idx, &drawn, n_classes, &mut scratch);
            if choice.is_none() {
                // every drawn feature is constant here; fall back to the rest
                let rest: Vec<usize> = (0..p).filter(|f| !drawn.contains(f)).collect();
                choice = pick(x, y, &idx, &rest, n_classes, &mut scratch);
            }
            let Some(split) = choice else {
                nodes[slot] = TreeNode::Leaf(label);
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| x.get(i, split.feature) <= split.threshold);
            let left = nodes.len();
            nodes.push(TreeNode::Leaf(label));
            let right = nodes.len();
            nodes.push(TreeNode::Leaf(label));
            nodes[slot] = TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, r));
            stack.push((left, l));
        }
        Self { nodes }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf(c) => return *c,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Lowest score wins; features are scanned in ascending order and thresholds
/// ascending, so ties keep the lowest feature and then the lowest threshold.
fn pick(
    x: &Matrix,
    y: &[usize],
    samples: &[usize],
    features: &[usize],
    n_classes: usize,
    scratch: &mut Vec<(f64, usize)>,
) -> Option<SplitChoice> {
    let mut best: Option<SplitChoice> = None;
    for &f in features {
        if let Some(c) = best_split_on(x, y, samples, f, n_classes, scratch) {
            if best.as_ref().is_none_or(|b| c.score < b.score) {
                best = Some(c);
            }
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    /// Trains on the rows of `x` listed in `train`. Tree `t` draws its
    /// randomness from its own stream derived from `config.seed` and `stream`.
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        train: &[usize],
        n_classes: usize,
        config: &ForestConfig,
        stream: u64,
    ) -> Self {
        assert!(config.n_trees >= 1, "forest needs at least one tree");
        assert!(!train.is_empty(), "empty training set");
        let candidates = config.split_candidates(x.cols());
        let trees = par::map_range(config.n_trees, |t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(par::derive_seed(config.seed, stream, t as u64));
            let samples = if config.bootstrap {
                (0..train.len())
                    .map(|_| train[rng.random_range(0..train.len())])
                    .collect()
            } else {
                train.to_vec()
            };
            DecisionTree::fit(x, y, samples, n_classes, candidates, &mut rng)
        });
        Self { trees, n_classes }
    }

    /// Majority vote; ties go to the lowest class code.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        majority(&votes)
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

//! Structure-preservation costs for embeddings (lower is better).
//!
//! `gpmal` and `gpmal2` compare, for every instance, the order of a fixed set
//! of original-space neighbours with their order in the embedding, using the
//! Spearman footrule (summed absolute rank displacement) normalised by its
//! maximum. `gpmal` uses the `k` nearest neighbours; `gpmal2` uses neighbours
//! at geometrically spaced positions 1, 2, 4, 8, ... of the full distance
//! ordering. `nrmse` is the root-mean-square difference between original and
//! embedded pairwise distances, normalised by the original distance range.
//!
//! These are concrete, documented stand-ins for the published GP-MaL family
//! objectives, not reproductions of them.
//!
//! All distances are Euclidean; orderings compare squared distances and break
//! ties by ascending instance index, so an embedding identical to the scaled
//! data scores exactly 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{sq_dist, Matrix};
use crate::par;

/// Default neighbourhood size for `gpmal`, capped at `n - 1`.
pub const DEFAULT_K: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitnessError {
    #[error("neighbour count {k} must be between 1 and n-1 = {max}")]
    BadK { k: usize, max: usize },
    #[error("need at least 2 instances, got {0}")]
    TooFewInstances(usize),
    #[error("embedding has {got} rows, expected {expected}")]
    RowMismatch { got: usize, expected: usize },
    #[error("unknown fitness function {0:?} (expected gpmal, gpmal2 or nrmse)")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessId {
    Gpmal,
    Gpmal2,
    Nrmse,
}

impl FitnessId {
    pub const ALL: [FitnessId; 3] = [FitnessId::Gpmal, FitnessId::Gpmal2, FitnessId::Nrmse];

    pub fn as_str(self) -> &'static str {
        match self {
            FitnessId::Gpmal => "gpmal",
            FitnessId::Gpmal2 => "gpmal2",
            FitnessId::Nrmse => "nrmse",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            FitnessId::Gpmal => "GP-MaL",
            FitnessId::Gpmal2 => "GP-MaL-2",
            FitnessId::Nrmse => "NRMSE",
        }
    }
}

impl fmt::Display for FitnessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitnessId {
    type Err = FitnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FitnessId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| FitnessError::Unknown(s.to_string()))
    }
}

/// A cost over embeddings of one fixed dataset.
pub trait Fitness: Send + Sync {
    fn id(&self) -> &str;
    fn cost(&self, embedding: &Matrix) -> f64;
}

/// For each instance, an ordered list of reference neighbours in the scaled
/// original space.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    k: usize,
    neighbors: Vec<usize>,
}

impl NeighborTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }
}

/// Every other instance, nearest first (ties by index).
fn sorted_others(data: &Matrix, i: usize) -> Vec<usize> {
    let row = data.row(i);
    let mut others: Vec<(f64, usize)> = (0..data.rows())
        .filter(|&j| j != i)
        .map(|j| (sq_dist(row, data.row(j)), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().map(|(_, j)| j).collect()
}

/// Exact k-nearest-neighbour table over the scaled data.
pub fn build_neighbor_table(scaled: &Matrix, k: usize) -> Result<NeighborTable, FitnessError> {
    let n = scaled.rows();
    if k == 0 || k >= n {
        return Err(FitnessError::BadK {
            k,
            max: n.saturating_sub(1),
        });
    }
    let rows = par::map_range(n, |i| {
        let mut s = sorted_others(scaled, i);
        s.truncate(k);
        s
    });
    Ok(NeighborTable {
        k,
        neighbors: rows.concat(),
    })
}

/// 1-based neighbour positions 1, 2, 4, ... not exceeding `n - 1`.
pub fn multiscale_positions(n: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |p| p.checked_mul(2))
        .take_while(|&p| p < n)
        .collect()
}

/// Neighbours at the multiscale positions of each instance's full ordering.
pub fn build_multiscale_table(scaled: &Matrix) -> Result<NeighborTable, FitnessError> {
    let n = scaled.rows();
    if n < 2 {
        return Err(FitnessError::TooFewInstances(n));
    }
    let positions = multiscale_positions(n);
    let rows = par::map_range(n, |i| {
        let s = sorted_others(scaled, i);
        positions.iter().map(|&p| s[p - 1]).collect::<Vec<_>>()
    });
    Ok(NeighborTable {
        k: positions.len(),
        neighbors: rows.concat(),
    })
}

/// Largest possible footrule distance between two rankings of `k` items.
pub fn max_footrule(k: usize) -> usize {
    k * k / 2
}

/// Footrule displacement of instance `i`'s reference neighbours when they are
/// re-ranked by embedding distance.
pub fn instance_footrule(embedding: &Matrix, table: &NeighborTable, i: usize) -> usize {
    let here = embedding.row(i);
    let mut keyed: Vec<(f64, usize, usize)> = table
        .neighbors(i)
        .iter()
        .enumerate()
        .map(|(a, &j)| (sq_dist(here, embedding.row(j)), j, a))
        .collect();
    keyed.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    keyed
        .iter()
        .enumerate()
        .map(|(rank, &(_, _, a))| rank.abs_diff(a))
        .sum()
}

/// Mean normalised footrule between the table order and the embedding order.
pub fn footrule_cost(embedding: &Matrix, table: &NeighborTable) -> f64 {
    let n = embedding.rows();
    assert_eq!(table.len(), n, "embedding rows must match the neighbour table");
    let denom = max_footrule(table.k());
    if denom == 0 {
        return 0.0;
    }
    let total: usize = (0..n).map(|i| instance_footrule(embedding, table, i)).sum();
    total as f64 / (n as f64 * denom as f64)
}

/// Footrule neighbourhood-order cost over the `k`-NN table.
pub fn gpmal_cost(embedding: &Matrix, table: &NeighborTable) -> f64 {
    footrule_cost(embedding, table)
}

/// Footrule cost over the multiscale neighbours of the scaled data.
pub fn gpmal2_cost(embedding: &Matrix, scaled: &Matrix) -> Result<f64, FitnessError> {
    check_rows(embedding, scaled)?;
    Ok(footrule_cost(embedding, &build_multiscale_table(scaled)?))
}

fn check_rows(embedding: &Matrix, scaled: &Matrix) -> Result<(), FitnessError> {
    if embedding.rows() != scaled.rows() {
        return Err(FitnessError::RowMismatch {
            got: embedding.rows(),
            expected: scaled.rows(),
        });
    }
    Ok(())
}

/// Upper-triangle pairwise distances, row-major over `i < j`.
fn pair_distances(data: &Matrix) -> Vec<f64> {
    let n = data.rows();
    par::map_range(n, |i| {
        ((i + 1)..n)
            .map(|j| sq_dist(data.row(i), data.row(j)).sqrt())
            .collect::<Vec<_>>()
    })
    .concat()
}

#[derive(Debug, Clone)]
struct DistanceProfile {
    distances: Vec<f64>,
    range: f64,
}

impl DistanceProfile {
    fn new(scaled: &Matrix) -> Self {
        let distances = pair_distances(scaled);
        let lo = distances.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            distances,
            range: hi - lo,
        }
    }

    fn cost(&self, embedding: &Matrix) -> f64 {
        let n = embedding.rows();
        let mut sum = 0.0;
        let mut idx = 0;
        for i in 0..n {
            let here = embedding.row(i);
            for j in (i + 1)..n {
                let diff = self.distances[idx] - sq_dist(here, embedding.row(j)).sqrt();
                sum += diff * diff;
                idx += 1;
            }
        }
        let rmse = (sum / self.distances.len() as f64).sqrt();
        if self.range > 0.0 {
            rmse / self.range
        } else {
            rmse
        }
    }
}

/// Normalised RMSE between original and embedded pairwise distances. When all
/// original distances are equal the raw RMSE is returned.
pub fn nrmse_cost(embedding: &Matrix, scaled: &Matrix) -> Result<f64, FitnessError> {
    if scaled.rows() < 2 {
        return Err(FitnessError::TooFewInstances(scaled.rows()));
    }
    check_rows(embedding, scaled)?;
    Ok(DistanceProfile::new(scaled).cost(embedding))
}

/// A fitness function with its dataset-dependent tables precomputed.
pub struct PreparedFitness {
    id: FitnessId,
    inner: Prepared,
}

enum Prepared {
    Footrule(NeighborTable),
    Distances(DistanceProfile),
}

impl PreparedFitness {
    pub fn new(id: FitnessId, scaled: &Matrix) -> Result<Self, FitnessError> {
        let n = scaled.rows();
        if n < 2 {
            return Err(FitnessError::TooFewInstances(n));
        }
        let inner = match id {
            FitnessId::Gpmal => {
                Prepared::Footrule(build_neighbor_table(scaled, DEFAULT_K.min(n - 1))?)
            }
            FitnessId::Gpmal2 => Prepared::Footrule(build_multiscale_table(scaled)?),
            FitnessId::Nrmse => Prepared::Distances(DistanceProfile::new(scaled)),
        };
        Ok(Self { id, inner })
    }

    pub fn fitness_id(&self) -> FitnessId {
        self.id
    }
}

impl Fitness for PreparedFitness {
    fn id(&self) -> &str {
        self.id.as_str()
    }

    fn cost(&self, embedding: &Matrix) -> f64 {
        match &self.inner {
            Prepared::Footrule(table) => footrule_cost(embedding, table),
            Prepared::Distances(profile) => profile.cost(embedding),
        }
    }
}

/// Looks up a fitness function by registry identifier and prepares it.
pub fn registry(id: &str, scaled: &Matrix) -> Result<Box<dyn Fitness>, FitnessError> {
    let id: FitnessId = id.parse()?;
    Ok(Box::new(PreparedFitness::new(id, scaled)?))
}

//! Random tree construction (full / grow) and ramped half-and-half populations.

use rand::Rng;

use super::config::RunConfig;
use super::individual::Individual;
use super::tree::{Node, Op};

pub const INIT_MIN_DEPTH: usize = 2;
pub const INIT_MAX_DEPTH: usize = 6;

/// Builds a random tree whose height lies in `[min_depth, height]`.
///
/// `full` places terminals only at `height`; grow may stop any branch once it
/// is at least `min_depth` deep, with the terminal share of the primitive set
/// as the stopping probability.
pub fn random_tree<R: Rng + ?Sized>(
    rng: &mut R,
    n_features: usize,
    min_depth: usize,
    height: usize,
    full: bool,
) -> Node {
    let terminal_ratio = n_features as f64 / (n_features + Op::ALL.len()) as f64;
    build(rng, n_features, 0, min_depth, height, full, terminal_ratio)
}

fn build<R: Rng + ?Sized>(
    rng: &mut R,
    n_features: usize,
    level: usize,
    min_depth: usize,
    height: usize,
    full: bool,
    terminal_ratio: f64,
) -> Node {
    let terminal = level >= height
        || (!full && level >= min_depth && rng.random::<f64>() < terminal_ratio);
    if terminal {
        return Node::Feature(rng.random_range(0..n_features));
    }
    let op = Op::ALL[rng.random_range(0..Op::ALL.len())];
    let children = (0..op.arity())
        .map(|_| {
            build(
                rng,
                n_features,
                level + 1,
                min_depth,
                height,
                full,
                terminal_ratio,
            )
        })
        .collect();
    Node::Call(op, children)
}

/// Ramped half-and-half: even-indexed individuals use the full method, odd
/// ones grow; each tree draws its height from `[2, 6]` (capped by `max_depth`).
pub fn init_population<R: Rng + ?Sized>(
    config: &RunConfig,
    n_features: usize,
    rng: &mut R,
) -> Vec<Individual> {
    assert!(n_features >= 1, "need at least one feature");
    let max_h = INIT_MAX_DEPTH.min(config.max_depth);
    let min_h = INIT_MIN_DEPTH.min(max_h);
    (0..config.population_size)
        .map(|i| {
            let full = i % 2 == 0;
            let trees = (0..config.final_dimensions)
                .map(|_| {
                    let height = rng.random_range(min_h..=max_h);
                    random_tree(rng, n_features, min_h, height, full)
                })
                .collect();
            Individual::new(trees)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn population_shape_and_depths() {
        let cfg = RunConfig {
            population_size: 100,
            final_dimensions: 2,
            ..RunConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = init_population(&cfg, 13, &mut rng);
        assert_eq!(pop.len(), 100);
        for ind in &pop {
            assert_eq!(ind.trees.len(), 2);
            ind.validate(13).unwrap();
            for t in &ind.trees {
                assert!((2..=6).contains(&t.depth()), "depth {}", t.depth());
            }
        }
    }

    #[test]
    fn same_seed_same_population() {
        let cfg = RunConfig::default();
        let a = init_population(&cfg, 5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = init_population(&cfg, 5, &mut ChaCha8Rng::seed_from_u64(9));
        let trees = |p: &[Individual]| p.iter().map(|i| i.trees.clone()).collect::<Vec<_>>();
        assert_eq!(trees(&a), trees(&b));
    }

    #[test]
    fn single_individual() {
        let cfg = RunConfig {
            population_size: 1,
            ..RunConfig::default()
        };
        let pop = init_population(&cfg, 1, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(pop.len(), 1);
        pop[0].validate(1).unwrap();
    }

    #[test]
    fn full_trees_reach_height_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tree(&mut rng, 3, 2, 4, true);
        assert_eq!(t.depth(), 4);
    }
}

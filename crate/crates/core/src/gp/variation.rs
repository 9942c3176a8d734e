//! Subtree crossover and subtree mutation. Both act on a single tree of the
//! forest, chosen uniformly, so dimension `j` of a child only ever inherits
//! material from dimension `j` of its parents.

use rand::Rng;

use super::individual::Individual;
use super::init::random_tree;

/// Largest height of a subtree grown by mutation.
pub const MUTATION_MAX_DEPTH: usize = 3;

/// Swaps uniformly chosen subtrees between the same tree of both parents. A
/// child deeper than `max_depth` is replaced by its parent's tree.
pub fn crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    max_depth: usize,
    rng: &mut R,
) -> (Individual, Individual) {
    assert_eq!(a.trees.len(), b.trees.len(), "parents differ in dimensions");
    let t = rng.random_range(0..a.trees.len());
    let (ta, tb) = (&a.trees[t], &b.trees[t]);
    let pa = rng.random_range(0..ta.size());
    let pb = rng.random_range(0..tb.size());
    let sub_a = ta.subtree(pa).expect("index within tree").clone();
    let sub_b = tb.subtree(pb).expect("index within tree").clone();

    let mut child_a = ta.replace(pa, sub_b);
    let mut child_b = tb.replace(pb, sub_a);
    if child_a.depth() > max_depth {
        child_a = ta.clone();
    }
    if child_b.depth() > max_depth {
        child_b = tb.clone();
    }
    (a.with_tree(t, child_a), b.with_tree(t, child_b))
}

/// Replaces a uniformly chosen node of one tree with a freshly grown subtree
/// of height at most [`MUTATION_MAX_DEPTH`], never exceeding `max_depth`.
pub fn mutate<R: Rng + ?Sized>(
    ind: &Individual,
    n_features: usize,
    max_depth: usize,
    rng: &mut R,
) -> Individual {
    let t = rng.random_range(0..ind.trees.len());
    let tree = &ind.trees[t];
    let point = rng.random_range(0..tree.size());
    let level = tree.node_depth(point).expect("index within tree");
    let room = MUTATION_MAX_DEPTH.min(max_depth.saturating_sub(level));
    let height = rng.random_range(0..=room);
    let fresh = random_tree(rng, n_features, 0, height, false);
    ind.with_tree(t, tree.replace(point, fresh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::tree::{Node, Op};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn terminal_parents_swap_terminals() {
        let a = Individual::new(vec![Node::Feature(0)]);
        let b = Individual::new(vec![Node::Feature(1)]);
        let (c, d) = crossover(&a, &b, 8, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(c.trees, vec![Node::Feature(1)]);
        assert_eq!(d.trees, vec![Node::Feature(0)]);
        assert!(c.fitness.is_nan());
    }

    #[test]
    fn mutating_terminal_gives_shallow_tree() {
        let a = Individual::new(vec![Node::Feature(0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = mutate(&a, 4, 8, &mut rng);
            assert!(m.trees[0].depth() <= 3);
            m.validate(4).unwrap();
        }
    }

    #[test]
    fn mutation_is_deterministic_per_seed() {
        let a = Individual::new(vec![Node::binary(Op::Add, Node::Feature(0), Node::Feature(1))]);
        let x = mutate(&a, 3, 8, &mut ChaCha8Rng::seed_from_u64(11));
        let y = mutate(&a, 3, 8, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(x.trees, y.trees);
    }

    #[test]
    fn mutation_respects_max_depth_at_deep_points() {
        let mut t = Node::Feature(0);
        for _ in 0..8 {
            t = Node::unary(Op::Abs, t);
        }
        let a = Individual::new(vec![t]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            assert!(mutate(&a, 2, 8, &mut rng).max_depth() <= 8);
        }
    }

    #[test]
    fn self_crossover_conserves_material() {
        let t = Node::binary(
            Op::Max,
            Node::binary(Op::Add, Node::Feature(0), Node::Feature(1)),
            Node::unary(Op::Neg, Node::Feature(2)),
        );
        let a = Individual::new(vec![t]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (c, d) = crossover(&a, &a, 8, &mut rng);
            assert_eq!(c.size + d.size, 2 * a.size);
            let mut fc = c.trees[0].features();
            fc.extend(d.trees[0].features());
            fc.sort_unstable();
            assert_eq!(fc, vec![0, 0, 1, 1, 2, 2]);
        }
    }
}

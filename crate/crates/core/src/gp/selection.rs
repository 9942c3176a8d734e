//! Parent selection and the bloat-control schemes that hook into it.

use std::cmp::Ordering;

use rand::Rng;

use super::config::{BloatControl, RunConfig};
use super::individual::Individual;

/// Fitness order. The +inf sentinel loses to any finite fitness; two
/// sentinels are ordered by size.
pub fn compare_fitness(a: &Individual, b: &Individual) -> Ordering {
    match a.fitness.total_cmp(&b.fitness) {
        Ordering::Equal if a.fitness == f64::INFINITY => a.size.cmp(&b.size),
        o => o,
    }
}

/// Fitness first, then size.
pub fn compare_lexicographic(a: &Individual, b: &Individual) -> Ordering {
    a.fitness.total_cmp(&b.fitness).then(a.size.cmp(&b.size))
}

fn tournament<'a, R, F>(
    pop: &'a [Individual],
    size: usize,
    rng: &mut R,
    cmp: F,
) -> &'a Individual
where
    R: Rng + ?Sized,
    F: Fn(&Individual, &Individual) -> Ordering,
{
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let c = &pop[rng.random_range(0..pop.len())];
        if cmp(c, best) == Ordering::Less {
            best = c;
        }
    }
    best
}

/// Two-contestant size tournament: the smaller wins with probability `p_smaller`.
pub fn size_duel<'a, R: Rng + ?Sized>(
    a: &'a Individual,
    b: &'a Individual,
    p_smaller: f64,
    rng: &mut R,
) -> &'a Individual {
    let (small, large) = match a.size.cmp(&b.size) {
        Ordering::Equal => return a,
        Ordering::Less => (a, b),
        Ordering::Greater => (b, a),
    };
    if rng.random_bool(p_smaller) {
        small
    } else {
        large
    }
}

/// Picks one parent according to the configured bloat control. Tarpeian uses
/// plain fitness tournaments; its penalty is applied beforehand by
/// [`apply_tarpeian`].
pub fn select_parent<'a, R: Rng + ?Sized>(
    pop: &'a [Individual],
    config: &RunConfig,
    rng: &mut R,
) -> &'a Individual {
    assert!(!pop.is_empty(), "cannot select from an empty population");
    let k = config.tournament_size;
    match config.bloat {
        BloatControl::None | BloatControl::Tarpeian { .. } => {
            tournament(pop, k, rng, compare_fitness)
        }
        BloatControl::Lexicographic => tournament(pop, k, rng, compare_lexicographic),
        BloatControl::DoubleTournament {
            fitness_first: true,
            p_smaller,
        } => {
            let a = tournament(pop, k, rng, compare_lexicographic);
            let b = tournament(pop, k, rng, compare_lexicographic);
            size_duel(a, b, p_smaller, rng)
        }
        BloatControl::DoubleTournament {
            fitness_first: false,
            p_smaller,
        } => {
            let mut best: Option<&Individual> = None;
            for _ in 0..k {
                let a = &pop[rng.random_range(0..pop.len())];
                let b = &pop[rng.random_range(0..pop.len())];
                let w = size_duel(a, b, p_smaller, rng);
                best = match best {
                    Some(cur) if compare_lexicographic(w, cur) != Ordering::Less => Some(cur),
                    _ => Some(w),
                };
            }
            best.expect("tournament_size >= 1")
        }
    }
}

/// Gives every individual larger than the population mean size the worst
/// fitness with probability `p`. Returns how many were penalised.
pub fn apply_tarpeian<R: Rng + ?Sized>(pop: &mut [Individual], p: f64, rng: &mut R) -> usize {
    if pop.is_empty() || p <= 0.0 {
        return 0;
    }
    let mean = pop.iter().map(|i| i.size as f64).sum::<f64>() / pop.len() as f64;
    let mut hits = 0;
    for ind in pop.iter_mut() {
        if ind.size as f64 > mean && rng.random_bool(p.min(1.0)) {
            ind.fitness = f64::INFINITY;
            hits += 1;
        }
    }
    hits
}

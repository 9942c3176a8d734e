//! Generational loop with elitism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{BloatControl, ConfigError, RunConfig};
use super::individual::{evaluate_individual, Individual};
use super::init::init_population;
use super::selection::{apply_tarpeian, compare_lexicographic, select_parent};
use super::variation::{crossover, mutate};
use crate::fitness::Fitness;
use crate::matrix::Matrix;
use crate::par;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dataset has no features")]
    NoFeatures,
}

/// What a finished evolutionary run hands back.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: Individual,
    pub embedding: Matrix,
    /// Best fitness of each generation's population.
    pub fitness_history: Vec<f64>,
}

fn evaluate_population(pop: &mut [Individual], scaled: &Matrix, fitness: &dyn Fitness) {
    par::for_each_mut(pop, |ind| {
        if !ind.is_evaluated() {
            let emb = evaluate_individual(ind, scaled);
            let cost = fitness.cost(&emb);
            ind.fitness = if cost.is_finite() { cost } else { f64::INFINITY };
        }
    });
}

/// Indices of the population, best first by (fitness, size, index).
fn ranked(pop: &[Individual]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| compare_lexicographic(&pop[a], &pop[b]).then(a.cmp(&b)));
    idx
}

fn breed<R: Rng + ?Sized>(
    pop: &[Individual],
    pool: &[Individual],
    config: &RunConfig,
    n_features: usize,
    penalised: bool,
    rng: &mut R,
) -> Vec<Individual> {
    let size = config.population_size;
    let mut next: Vec<Individual> = ranked(pop)
        .into_iter()
        .take(config.elitism_count)
        .map(|i| pop[i].clone())
        .collect();
    while next.len() < size {
        let r: f64 = rng.random();
        if r < config.crossover_rate {
            let a = select_parent(pool, config, rng);
            let b = select_parent(pool, config, rng);
            let (c, d) = crossover(a, b, config.max_depth, rng);
            next.push(c);
            if next.len() < size {
                next.push(d);
            }
        } else if r < config.crossover_rate + config.mutation_rate {
            let p = select_parent(pool, config, rng);
            next.push(mutate(p, n_features, config.max_depth, rng));
        } else {
            let mut copy = select_parent(pool, config, rng).clone();
            if penalised {
                // pool scores may be Tarpeian penalties, so re-evaluate the copy
                copy.fitness = f64::NAN;
            }
            next.push(copy);
        }
    }
    next
}

/// Runs the evolutionary search over `scaled`, calling `on_generation` with
/// the generation count completed so far and that generation's best fitness.
///
/// Entry `g` of the history is the best fitness of the `g`-th evaluated
/// population (entry 0 is the initial population).
pub fn evolve_with_progress<F>(
    config: &RunConfig,
    scaled: &Matrix,
    fitness: &dyn Fitness,
    mut on_generation: F,
) -> Result<Evolution, EvolveError>
where
    F: FnMut(usize, f64),
{
    config.validate()?;
    let n_features = scaled.cols();
    if n_features == 0 {
        return Err(EvolveError::NoFeatures);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pop = init_population(config, n_features, &mut rng);
    let mut history = Vec::with_capacity(config.generations);
    let mut best: Option<Individual> = None;

    for generation in 0..config.generations {
        evaluate_population(&mut pop, scaled, fitness);
        let leader = &pop[ranked(&pop)[0]];
        history.push(leader.fitness);
        if best
            .as_ref()
            .is_none_or(|b| compare_lexicographic(leader, b).is_lt())
        {
            best = Some(leader.clone());
        }
        on_generation(generation + 1, leader.fitness);

        if generation + 1 == config.generations {
            break;
        }
        let next = match config.bloat {
            BloatControl::Tarpeian { p } => {
                let mut pool = pop.clone();
                apply_tarpeian(&mut pool, p, &mut rng);
                breed(&pop, &pool, config, n_features, true, &mut rng)
            }
            _ => breed(&pop, &pop, config, n_features, false, &mut rng),
        };
        pop = next;
    }

    let best = best.expect("at least one generation");
    let embedding = evaluate_individual(&best, scaled);
    Ok(Evolution {
        best,
        embedding,
        fitness_history: history,
    })
}

pub fn evolve(
    config: &RunConfig,
    scaled: &Matrix,
    fitness: &dyn Fitness,
) -> Result<Evolution, EvolveError> {
    evolve_with_progress(config, scaled, fitness, |_, _| {})
}

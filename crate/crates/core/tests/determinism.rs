//! Identical seeds give identical results regardless of thread count.

use gp4nldr_core::{examples, run, BloatControl, FitnessId, RunConfig, SessionArchive};

fn small_config(fitness: FitnessId, bloat: BloatControl) -> RunConfig {
    RunConfig {
        population_size: 40,
        generations: 8,
        fitness,
        bloat,
        seed: 11,
        ..RunConfig::default()
    }
}

fn run_json(threads: usize, config: &RunConfig) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let wine = examples::wine();
    let result = pool.install(|| run(&wine, config).unwrap());
    SessionArchive::new(result, None).to_json()
}

#[test]
fn thread_count_does_not_change_results() {
    for (fitness, bloat) in [
        (FitnessId::Gpmal, BloatControl::Lexicographic),
        (FitnessId::Gpmal2, BloatControl::Tarpeian { p: 0.3 }),
        (
            FitnessId::Nrmse,
            BloatControl::DoubleTournament {
                fitness_first: true,
                p_smaller: 0.7,
            },
        ),
    ] {
        let config = small_config(fitness, bloat);
        let one = run_json(1, &config);
        assert_eq!(one, run_json(4, &config), "{fitness:?} {bloat:?}");
        assert_eq!(one, run_json(1, &config));
    }
}

#[test]
fn different_seeds_differ() {
    let a = small_config(FitnessId::Gpmal, BloatControl::None);
    let b = RunConfig { seed: 12, ..a.clone() };
    assert_ne!(run_json(2, &a), run_json(2, &b));
}

#[test]
fn fitness_history_is_monotone_with_elitism() {
    let config = RunConfig {
        generations: 15,
        ..small_config(FitnessId::Gpmal, BloatControl::Tarpeian { p: 0.5 })
    };
    let result = run(&examples::wine(), &config).unwrap();
    assert_eq!(result.fitness_history.len(), 15);
    assert!(result.fitness_history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*result.fitness_history.last().unwrap(), result.best_fitness());
    assert_eq!(result.expressions.len(), 2);
    assert_eq!(result.embedding.cols(), 2);
    assert_eq!(result.embedding.rows(), 178);
}

//! Tree-based genetic programming for dimensionality reduction: each
//! individual holds one expression tree per embedding dimension.

pub mod config;
pub mod engine;
pub mod individual;
pub mod init;
pub mod selection;
pub mod tree;
pub mod variation;

pub use config::{BloatControl, ConfigError, RunConfig};
pub use engine::{evolve, evolve_with_progress, Evolution, EvolveError};
pub use individual::{evaluate_individual, Individual};
pub use init::init_population;
pub use selection::{apply_tarpeian, compare_fitness, compare_lexicographic, select_parent, size_duel};
pub use tree::{Node, Op, ParseError};
pub use variation::{crossover, mutate};

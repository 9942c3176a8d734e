use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::FitnessId;

/// Parsimony scheme applied during selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BloatControl {
    None,
    /// Tournament on fitness, ties resolved in favour of the smaller individual.
    Lexicographic,
    /// A fitness tournament and a size tournament composed in sequence.
    DoubleTournament {
        /// Run the fitness tournaments first (their winners meet in the size tournament).
        fitness_first: bool,
        /// Probability that the smaller contestant wins a size tournament.
        p_smaller: f64,
    },
    /// Above-average-size individuals get the worst fitness with probability `p`.
    Tarpeian { p: f64 },
}

impl BloatControl {
    pub fn label(&self) -> &'static str {
        match self {
            BloatControl::None => "none",
            BloatControl::Lexicographic => "lexicographic",
            BloatControl::DoubleTournament { .. } => "double_tournament",
            BloatControl::Tarpeian { .. } => "tarpeian",
        }
    }
}

impl fmt::Display for BloatControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BloatControl::DoubleTournament {
                fitness_first,
                p_smaller,
            } => write!(
                f,
                "double_tournament({} first, p_smaller={p_smaller})",
                if *fitness_first { "fitness" } else { "size" }
            ),
            BloatControl::Tarpeian { p } => write!(f, "tarpeian(p={p})"),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub population_size: usize,
    pub generations: usize,
    pub final_dimensions: usize,
    pub fitness: FitnessId,
    pub bloat: BloatControl,
    pub seed: u64,
    pub max_depth: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism_count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 100,
            final_dimensions: 2,
            fitness: FitnessId::Gpmal,
            bloat: BloatControl::Lexicographic,
            seed: 0,
            max_depth: 8,
            tournament_size: 7,
            crossover_rate: 0.8,
            mutation_rate: 0.15,
            elitism_count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

fn check_probability(field: &'static str, p: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("{p} is not in [0, 1]")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::new("population_size", "must be at least 1"));
        }
        if self.generations == 0 {
            return Err(ConfigError::new("generations", "must be at least 1"));
        }
        if self.final_dimensions == 0 {
            return Err(ConfigError::new("final_dimensions", "must be at least 1"));
        }
        if self.max_depth < 2 {
            return Err(ConfigError::new("max_depth", "must be at least 2"));
        }
        if self.tournament_size == 0 {
            return Err(ConfigError::new("tournament_size", "must be at least 1"));
        }
        check_probability("crossover_rate", self.crossover_rate)?;
        check_probability("mutation_rate", self.mutation_rate)?;
        if self.crossover_rate + self.mutation_rate > 1.0 + 1e-12 {
            return Err(ConfigError::new(
                "mutation_rate",
                "crossover_rate + mutation_rate must not exceed 1",
            ));
        }
        if self.elitism_count > self.population_size {
            return Err(ConfigError::new(
                "elitism_count",
                "must not exceed population_size",
            ));
        }
        match self.bloat {
            BloatControl::DoubleTournament { p_smaller, .. } => {
                check_probability("bloat.p_smaller", p_smaller)?
            }
            BloatControl::Tarpeian { p } => check_probability("bloat.p", p)?,
            _ => {}
        }
        Ok(())
    }
}

impl FromStr for BloatControl {
    type Err = ConfigError;

    /// Accepts `none`, `lexicographic`, `double` / `double_tournament` (fitness
    /// first, p_smaller 0.7) and `tarpeian` (p 0.3).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(BloatControl::None),
            "lexicographic" | "lexi" => Ok(BloatControl::Lexicographic),
            "double" | "double_tournament" => Ok(BloatControl::DoubleTournament {
                fitness_first: true,
                p_smaller: 0.7,
            }),
            "tarpeian" | "tarp" => Ok(BloatControl::Tarpeian { p: 0.3 }),
            other => Err(ConfigError::new(
                "bloat",
                format!("unknown bloat control {other:?}"),
            )),
        }
    }
}

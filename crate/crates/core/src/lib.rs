//! Core library: data handling, the GP engine, fitness functions, embedding
//! evaluation and the explanation pipeline.

pub mod archive;
pub mod data;
pub mod evaluate;
pub mod examples;
pub mod explain;
pub mod fitness;
pub mod gp;
pub mod llm;
pub mod matrix;
pub mod par;
pub mod result;
pub mod synthetic;

pub use archive::{ArchiveError, ChatState, SessionArchive};
pub use data::{CsvOptions, DataError, Dataset, LabelColumn};
pub use fitness::{Fitness, FitnessId, PreparedFitness};
pub use gp::{BloatControl, RunConfig};
pub use matrix::Matrix;
pub use result::{run, run_with_progress, RunError, RunResult};

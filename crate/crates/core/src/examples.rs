//! Preloaded case-study runs shipped with the library.
//!
//! Each example pairs a bundled dataset with a fixed run configuration. The
//! committed archives under `assets/examples` were produced by
//! [`generate`] (via `gp4nldr examples build`).

use std::io::Cursor;

use crate::archive::{ArchiveError, SessionArchive};
use crate::data::{load_csv, CsvOptions, Dataset, LabelColumn};
use crate::fitness::FitnessId;
use crate::gp::{BloatControl, RunConfig};
use crate::result::{run, RunError};
use crate::synthetic;

pub const WINE_CSV: &str = include_str!("../assets/datasets/wine.csv");
pub const DERMATOLOGY_CSV: &str = include_str!("../assets/datasets/dermatology.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example {
    pub id: &'static str,
    pub title: &'static str,
    pub archive: &'static str,
}

pub const EXAMPLES: [Example; 3] = [
    Example {
        id: "wine",
        title: "Wine: GP-MaL to 2 dimensions, lexicographic bloat control",
        archive: include_str!("../assets/examples/wine.json"),
    },
    Example {
        id: "dermatology",
        title: "Dermatology: GP-MaL-2 to 3 dimensions over 200 generations",
        archive: include_str!("../assets/examples/dermatology.json"),
    },
    Example {
        id: "coil20",
        title: "COIL-20 (synthetic stand-in): GP-MaL-2 to 2 dimensions over 1000 generations",
        archive: include_str!("../assets/examples/coil20.json"),
    },
];

pub fn ids() -> Vec<&'static str> {
    EXAMPLES.iter().map(|e| e.id).collect()
}

pub fn find(id: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.id == id)
}

/// The committed archive of example `id`.
pub fn archive(id: &str) -> Option<Result<SessionArchive, ArchiveError>> {
    find(id).map(|e| SessionArchive::from_json(e.archive))
}

pub fn wine() -> Dataset {
    load_csv(
        Cursor::new(WINE_CSV),
        &CsvOptions::new("Wine", LabelColumn::Name("class".into())),
    )
    .expect("bundled wine data is valid")
}

pub fn dermatology() -> Dataset {
    load_csv(
        Cursor::new(DERMATOLOGY_CSV),
        &CsvOptions::new("Dermatology", LabelColumn::Name("class".into())),
    )
    .expect("bundled dermatology data is valid")
}

/// Dataset behind example `id`.
pub fn dataset(id: &str) -> Option<Dataset> {
    match id {
        "wine" => Some(wine()),
        "dermatology" => Some(dermatology()),
        "coil20" => Some(synthetic::coil_like()),
        _ => None,
    }
}

/// Run configuration of example `id`.
pub fn config(id: &str) -> Option<RunConfig> {
    let base = RunConfig::default();
    match id {
        "wine" => Some(RunConfig {
            fitness: FitnessId::Gpmal,
            population_size: 100,
            generations: 100,
            final_dimensions: 2,
            bloat: BloatControl::Lexicographic,
            ..base
        }),
        "dermatology" => Some(RunConfig {
            fitness: FitnessId::Gpmal2,
            population_size: 100,
            generations: 200,
            final_dimensions: 3,
            bloat: BloatControl::Lexicographic,
            ..base
        }),
        "coil20" => Some(RunConfig {
            fitness: FitnessId::Gpmal2,
            population_size: 100,
            generations: 1000,
            final_dimensions: 2,
            bloat: BloatControl::None,
            ..base
        }),
        _ => None,
    }
}

/// Runs example `id` from scratch.
pub fn generate(id: &str) -> Option<Result<SessionArchive, RunError>> {
    let data = dataset(id)?;
    let cfg = config(id)?;
    Some(run(&data, &cfg).map(|r| SessionArchive::new(r, None)))
}

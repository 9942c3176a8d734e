//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeSet;

use gp4nldr_core::explain::ChatSession;
use gp4nldr_core::{examples, Dataset, RunResult};

pub fn example_result(id: &str) -> RunResult {
    examples::archive(id).expect("bundled example").expect("archive parses").result
}

/// Numeric tokens: maximal runs of `[A-Za-z0-9_.]` that parse as a number
/// once a trailing full stop is dropped.
pub fn numeric_tokens(text: &str) -> Vec<f64> {
    text.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '.'))
        .map(|t| t.trim_end_matches('.'))
        .filter(|t| !t.is_empty())
        .filter_map(|t| t.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .collect()
}

/// Numbers a prompt may legitimately mention: run metadata, configuration,
/// accuracies, session settings and the template's own wording.
pub fn allowed_numbers(result: &RunResult, session: &ChatSession, template_text: &str) -> BTreeSet<u64> {
    let c = &result.config;
    let mut allowed: Vec<f64> = vec![
        c.population_size as f64,
        c.generations as f64,
        c.final_dimensions as f64,
        c.tournament_size as f64,
        c.max_depth as f64,
        c.seed as f64,
        result.dataset.n_instances as f64,
        result.dataset.feature_names.len() as f64,
        result.dataset.class_names.len() as f64,
        session.word_limit as f64,
        10.0,
        format!("{:.4}", result.accuracy_original).parse().unwrap(),
        format!("{:.4}", result.accuracy_embedding).parse().unwrap(),
    ];
    allowed.extend((0..=result.expressions.len()).map(|i| i as f64));
    for text in result
        .dataset
        .class_names
        .iter()
        .chain(&result.dataset.feature_names)
        .chain(&result.expressions)
        .chain(std::iter::once(&result.dataset.name))
        .chain(session.messages.iter().map(|m| &m.text))
    {
        allowed.extend(numeric_tokens(text));
    }
    allowed.extend(numeric_tokens(&c.bloat.to_string()));
    allowed.extend(numeric_tokens(template_text));
    allowed.into_iter().map(f64::to_bits).collect()
}

/// Numeric tokens of `prompt` that equal an original data value and are not
/// explained by run metadata.
pub fn leaked_values(prompt: &str, dataset: &Dataset, allowed: &BTreeSet<u64>) -> Vec<f64> {
    let raw: BTreeSet<u64> = dataset.rows().as_slice().iter().map(|v| v.to_bits()).collect();
    numeric_tokens(prompt)
        .into_iter()
        .filter(|v| raw.contains(&v.to_bits()) && !allowed.contains(&v.to_bits()))
        .collect()
}

//! Prompt assembly from the editable template asset.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;
use thiserror::Error;

use super::session::{ChatSession, Role, INITIAL_QUESTION};
use crate::evaluate::DEFAULT_FOLDS;
use crate::result::RunResult;

/// Above this many features the prompt names a range instead of listing them.
pub const MAX_LISTED_FEATURES: usize = 40;

const BUNDLED_TEMPLATE: &str = include_str!("../../assets/prompt_template.toml");

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("invalid prompt template: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("prompt template has no fitness definition for `{0}`")]
    MissingDefinition(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Part {
    pub heading: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionsPart {
    pub heading: String,
    pub body: String,
    pub line: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConversationPart {
    pub heading: String,
    pub body: String,
    pub empty: String,
    pub human: String,
    pub ai: String,
}

/// The twelve prompt parts, in emission order.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub context: Part,
    pub fitness: Part,
    pub operators: Part,
    pub dataset: Part,
    pub features: Part,
    pub expressions: ExpressionsPart,
    pub accuracy: Part,
    pub word_limit: Part,
    pub guidance: Part,
    pub background: Part,
    pub initial_request: Part,
    pub conversation: ConversationPart,
    pub fitness_definitions: BTreeMap<String, String>,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::from_toml(BUNDLED_TEMPLATE).expect("bundled template is valid")
    }
}

impl PromptTemplate {
    pub fn from_toml(text: &str) -> Result<Self, TemplateError> {
        let t: Self = toml::from_str(text)?;
        for id in crate::fitness::FitnessId::ALL {
            if !t.fitness_definitions.contains_key(id.as_str()) {
                return Err(TemplateError::MissingDefinition(id.as_str().to_string()));
            }
        }
        Ok(t)
    }

    /// Headings of all twelve parts in order.
    pub fn headings(&self) -> [&str; 12] {
        [
            &self.context.heading,
            &self.fitness.heading,
            &self.operators.heading,
            &self.dataset.heading,
            &self.features.heading,
            &self.expressions.heading,
            &self.accuracy.heading,
            &self.word_limit.heading,
            &self.guidance.heading,
            &self.background.heading,
            &self.initial_request.heading,
            &self.conversation.heading,
        ]
    }

    pub fn build(&self, result: &RunResult, session: &ChatSession, retrieved: &[String]) -> String {
        let meta = &result.dataset;
        let config = &result.config;
        let mut vars: HashMap<&str, String> = HashMap::new();
        vars.insert("fitness_name", config.fitness.display_name().to_string());
        vars.insert(
            "fitness_definition",
            self.fitness_definitions
                .get(config.fitness.as_str())
                .cloned()
                .unwrap_or_default(),
        );
        vars.insert("dataset_name", one_line(&meta.name));
        vars.insert("n_instances", meta.n_instances.to_string());
        vars.insert("n_features", meta.feature_names.len().to_string());
        vars.insert("n_classes", meta.class_names.len().to_string());
        vars.insert(
            "class_names",
            meta.class_names.iter().map(|c| one_line(c)).collect::<Vec<_>>().join(", "),
        );
        vars.insert("population_size", config.population_size.to_string());
        vars.insert("generations", config.generations.to_string());
        vars.insert("dimensions", config.final_dimensions.to_string());
        vars.insert("bloat", config.bloat.to_string());
        vars.insert("features", feature_text(&meta.feature_names));
        let lines: Vec<String> = result
            .expressions
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut v = HashMap::new();
                v.insert("index", (i + 1).to_string());
                v.insert("expression", one_line(e));
                fill(&self.expressions.line, &v)
            })
            .collect();
        vars.insert("expressions", lines.join("\n"));
        vars.insert("folds", DEFAULT_FOLDS.to_string());
        vars.insert("accuracy_original", format!("{:.4}", result.accuracy_original));
        vars.insert("accuracy_embedding", format!("{:.4}", result.accuracy_embedding));
        vars.insert("word_limit", session.word_limit.to_string());
        vars.insert(
            "background",
            retrieved.iter().map(|r| block(r)).collect::<Vec<_>>().join("\n\n"),
        );
        vars.insert("initial_question", INITIAL_QUESTION.to_string());
        vars.insert("history", self.history_text(session));

        let mut sections: Vec<(&str, &str)> = vec![
            (&self.context.heading, &self.context.body),
            (&self.fitness.heading, &self.fitness.body),
            (&self.operators.heading, &self.operators.body),
            (&self.dataset.heading, &self.dataset.body),
            (&self.features.heading, &self.features.body),
            (&self.expressions.heading, &self.expressions.body),
            (&self.accuracy.heading, &self.accuracy.body),
            (&self.word_limit.heading, &self.word_limit.body),
            (&self.guidance.heading, &self.guidance.body),
        ];
        if !retrieved.is_empty() {
            sections.push((&self.background.heading, &self.background.body));
        }
        sections.push((&self.initial_request.heading, &self.initial_request.body));
        sections.push((&self.conversation.heading, &self.conversation.body));

        let mut out = String::new();
        for (heading, body) in sections {
            if !out.is_empty() {
                out.push_str("\n\n");
            }
            out.push_str(heading);
            out.push('\n');
            out.push_str(fill(body, &vars).trim_end());
        }
        out.push('\n');
        out
    }

    fn history_text(&self, session: &ChatSession) -> String {
        if session.messages.is_empty() {
            return self.conversation.empty.clone();
        }
        session
            .messages
            .iter()
            .map(|m| {
                let prefix = match m.role {
                    Role::Human => &self.conversation.human,
                    Role::Ai => &self.conversation.ai,
                };
                format!("{prefix}{}", block(&m.text))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Prompt for `result` and `session` with the bundled template.
pub fn build_prompt(result: &RunResult, session: &ChatSession, retrieved: &[String]) -> String {
    PromptTemplate::default().build(result, session, retrieved)
}

/// Feature names joined with commas, or the `f0 to f{m-1}` range when there
/// are more than [`MAX_LISTED_FEATURES`].
pub fn feature_text(names: &[String]) -> String {
    if names.len() > MAX_LISTED_FEATURES {
        format!("f0 to f{}", names.len() - 1)
    } else {
        names.iter().map(|n| one_line(n)).collect::<Vec<_>>().join(", ")
    }
}

/// Single-pass `{name}` substitution; unknown placeholders stay literal and
/// substituted text is never rescanned.
pub fn fill(template: &str, vars: &HashMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if vars.contains_key(&after[..close]) => {
                out.push_str(&vars[&after[..close]]);
                rest = &after[close + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Injected single-line value: control characters become spaces.
fn one_line(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect()
}

/// Injected multi-line value: continuation lines are indented so they cannot
/// pass for a heading or a speaker line.
fn block(text: &str) -> String {
    text.replace("\r\n", "\n")
        .replace('\r', "\n")
        .trim_end()
        .lines()
        .collect::<Vec<_>>()
        .join("\n  ")
}

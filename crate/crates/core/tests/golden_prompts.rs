//! Prompts for the bundled examples compared byte for byte with checked-in
//! copies. Set `UPDATE_GOLDENS=1` to rewrite them after an intended change.

mod common;

use std::fs;
use std::path::PathBuf;

use common::example_result;
use gp4nldr_core::explain::{ChatSession, Explainer, PromptTemplate};
use gp4nldr_core::llm::MockProvider;

pub const KEYWORD_QUESTION: &str = "How does lexicographic parsimony pressure shape these trees?";

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from golden copy");
}

/// Fresh-session prompt and the prompt of a keyword follow-up.
fn prompts(id: &str) -> (String, String) {
    let result = example_result(id);
    let explainer = Explainer::default();
    let llm = MockProvider::echo();
    let mut session = ChatSession::new(id, "mock");
    let fresh = explainer.begin(&mut session, &result, &llm).unwrap().prompt;
    let keyword = explainer.ask(&mut session, KEYWORD_QUESTION, &result, &llm).unwrap().prompt;
    (fresh, keyword)
}

#[test]
fn wine_prompts_match_golden() {
    let (fresh, keyword) = prompts("wine");
    check("wine_fresh.txt", &fresh);
    check("wine_keyword.txt", &keyword);
    for h in PromptTemplate::default().headings() {
        assert!(keyword.contains(h), "{h}");
    }
}

#[test]
fn coil_prompt_matches_golden() {
    let (fresh, _) = prompts("coil20");
    check("coil20_fresh.txt", &fresh);
}

#[test]
fn dermatology_prompt_matches_golden() {
    let (fresh, _) = prompts("dermatology");
    check("dermatology_fresh.txt", &fresh);
}

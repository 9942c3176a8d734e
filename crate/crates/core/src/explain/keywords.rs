//! Keyword triggers deciding when background retrieval is worth doing.

/// Default trigger fragments: fitness names, bloat methods and UMAP.
pub const DEFAULT_KEYWORDS: [&str; 10] = [
    "gp-mal", "gpmal", "gpmal2", "gp-mal2", "gp-mal-2", "tarp", "lexi", "tourn", "umap", "nrmse",
];

pub fn default_keywords() -> Vec<String> {
    DEFAULT_KEYWORDS.iter().map(|k| k.to_string()).collect()
}

/// Keywords occurring in `question` (case-insensitive substring match), in
/// keyword-list order.
pub fn detect_keywords(question: &str, keywords: &[String]) -> Vec<String> {
    let q = question.to_lowercase();
    keywords
        .iter()
        .filter(|k| !k.is_empty() && q.contains(&k.to_lowercase()))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitness_comparison_question() {
        let m = detect_keywords("Is GP-MaL better than GP-MaL-2?", &default_keywords());
        assert_eq!(m, vec!["gp-mal", "gp-mal-2"]);
    }

    #[test]
    fn no_trigger() {
        assert!(detect_keywords("what is hue?", &default_keywords()).is_empty());
    }

    #[test]
    fn substring_rule() {
        let m = detect_keywords("explain tournament selection", &default_keywords());
        assert_eq!(m, vec!["tourn"]);
    }

    #[test]
    fn empty_fragment_never_matches() {
        assert!(detect_keywords("anything", &[String::new()]).is_empty());
    }
}

//! Candidate and related-word generation over completion backends, plus the
//! list parser that turns free-form completions into clean name lists.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, ScoringBackend};
use crate::concept::{
    normalize_name, validate_candidate, Category, Concept, ConceptHierarchy, SiblingCandidate,
};
use crate::prompts::{related_word_prompt, PromptLibrary, RELATED_WORD_SEEDS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerationError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("no recognizable list in completion: {raw:?}")]
    NoItems { raw: String },
    #[error("no valid candidates survived validation (raw completion: {raw:?})")]
    NoValidCandidates { raw: String },
    #[error("no usable related words (raw completion: {raw:?})")]
    NoRelatedWords { raw: String },
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
}

/// A context word tied to the seed template that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatedWord {
    pub word: String,
    pub source_template: String,
}

/// Knobs for the generation phase. Counts are minimums of 1; the defaults
/// are eight candidates, eight related words, and six scoring templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub num_candidates: usize,
    pub num_related_words: usize,
    pub num_related_templates: usize,
    pub category: Category,
}

impl GenerationConfig {
    pub fn new(category: Category) -> GenerationConfig {
        GenerationConfig {
            num_candidates: 8,
            num_related_words: 8,
            num_related_templates: 6,
            category,
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.num_candidates == 0
            || self.num_related_words == 0
            || self.num_related_templates == 0
        {
            return Err(GenerationError::InvalidConfig(
                "all generation counts must be >= 1".to_owned(),
            ));
        }
        Ok(())
    }
}

fn strip_wrapping(item: &str) -> String {
    let mut s = item.trim();
    loop {
        let trimmed = s
            .trim_start_matches(['"', '\'', '\u{201c}', '\u{2018}', '`'])
            .trim_end_matches(['"', '\'', '\u{201d}', '\u{2019}', '`'])
            .trim_end_matches(['.', ',', ';', ':', '!', '?'])
            .trim();
        if trimmed == s {
            break;
        }
        s = trimmed;
    }
    s.to_owned()
}

/// Leading enumeration marker (`- `, `* `, `3. `, `12) `...) of a fragment.
fn strip_leading_marker(line: &str) -> &str {
    let s = line.trim_start();
    for bullet in ["- ", "* ", "\u{2022} ", "+ "] {
        if let Some(rest) = s.strip_prefix(bullet) {
            return rest;
        }
    }
    let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &s[digits..];
        if let Some(rest) = rest.strip_prefix(['.', ')']) {
            if rest.starts_with(char::is_whitespace) || rest.is_empty() {
                return rest;
            }
        }
    }
    s
}

/// Positions where an inline `N.`/`N)` marker starts (preceded by start of
/// line or whitespace, followed by whitespace).
fn inline_marker_spans(line: &str) -> Vec<(usize, usize)> {
    let bytes = line.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let at_boundary = i == 0 || bytes[i - 1].is_ascii_whitespace();
        if at_boundary && bytes[i].is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j < bytes.len() && (bytes[j] == b'.' || bytes[j] == b')') {
                let end = j + 1;
                if end == bytes.len() || bytes[end].is_ascii_whitespace() {
                    spans.push((i, end));
                    i = end;
                    continue;
                }
            }
        }
        i += 1;
    }
    spans
}

/// Extract items from comma-separated, newline-separated, or
/// numbered/bulleted lists. Strips quotes and enumeration markers,
/// preserves order, deduplicates case-insensitively.
pub fn parse_llm_list(text: &str) -> Result<Vec<String>, GenerationError> {
    let mut fragments: Vec<String> = Vec::new();
    for line in text.lines() {
        let spans = inline_marker_spans(line);
        if spans.len() >= 2 {
            // Prose with an embedded "1. x 2. y" list: split at the markers
            // and drop any preamble before the first one.
            let mut cuts: Vec<usize> = spans.iter().map(|(start, _)| *start).collect();
            cuts.push(line.len());
            for window in cuts.windows(2) {
                fragments.push(strip_leading_marker(&line[window[0]..window[1]]).to_owned());
            }
        } else {
            fragments.push(strip_leading_marker(line).to_owned());
        }
    }

    let mut items = Vec::new();
    let mut seen = BTreeSet::new();
    for fragment in fragments {
        for piece in fragment.split([',', ';']) {
            let cleaned = strip_wrapping(strip_leading_marker(piece));
            if cleaned.is_empty() {
                continue;
            }
            let key = normalize_name(&cleaned);
            if seen.insert(key) {
                items.push(cleaned);
            }
        }
    }

    if items.is_empty() {
        return Err(GenerationError::NoItems {
            raw: text.to_owned(),
        });
    }
    Ok(items)
}

/// Generate, parse, and validate sibling-exclusive candidates for a target.
/// Only candidates passing both the sibling and exclusivity checks are
/// returned, in completion order.
pub fn generate_candidates<B: ScoringBackend + ?Sized>(
    target: &Concept,
    cfg: &GenerationConfig,
    backend: &B,
    library: &PromptLibrary,
    hierarchy: &ConceptHierarchy,
    synonyms: &BTreeSet<String>,
) -> Result<Vec<SiblingCandidate>, GenerationError> {
    cfg.validate()?;
    let prompt = library
        .candidate_prompt(cfg.category)
        .replace(crate::backend::CONCEPT_SLOT, &target.name);
    let completion = backend.complete(&prompt)?;
    let mut names = parse_llm_list(&completion)?;
    names.truncate(cfg.num_candidates);

    let mut survivors = Vec::new();
    for name in names {
        let Ok(concept) = Concept::new(&name, cfg.category) else {
            continue;
        };
        let candidate =
            validate_candidate(target, &concept, hierarchy, synonyms, backend.provenance());
        if candidate.is_valid() {
            survivors.push(candidate);
        }
    }
    if survivors.is_empty() {
        return Err(GenerationError::NoValidCandidates { raw: completion });
    }
    Ok(survivors)
}

fn looks_like_sentence(word: &str) -> bool {
    word.contains(['.', '!', '?'])
}

/// Generate context words for a target. Both built-in seed templates are
/// always queried; results are deduplicated case-insensitively and capped
/// at `num_related_words`.
pub fn generate_related_words<B: ScoringBackend + ?Sized>(
    target: &Concept,
    cfg: &GenerationConfig,
    backend: &B,
) -> Result<Vec<RelatedWord>, GenerationError> {
    cfg.validate()?;
    let mut words = Vec::new();
    let mut seen = BTreeSet::new();
    let mut last_raw = String::new();
    for seed in RELATED_WORD_SEEDS {
        let instantiated = seed.replace(crate::backend::CONCEPT_SLOT, &target.name);
        let completion = backend.complete(&related_word_prompt(&instantiated))?;
        last_raw = completion.clone();
        let items = match parse_llm_list(&completion) {
            Ok(items) => items,
            Err(GenerationError::NoItems { .. }) => continue,
            Err(other) => return Err(other),
        };
        for item in items {
            if looks_like_sentence(&item) {
                continue;
            }
            let key = normalize_name(&item);
            if seen.insert(key) {
                words.push(RelatedWord {
                    word: item,
                    source_template: seed.to_owned(),
                });
            }
        }
    }
    words.truncate(cfg.num_related_words);
    if words.is_empty() {
        return Err(GenerationError::NoRelatedWords { raw: last_raw });
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::FixtureBackend;

    #[test]
    fn parses_comma_lists() {
        assert_eq!(parse_llm_list("a, b, c").unwrap(), ["a", "b", "c"]);
    }

    #[test]
    fn parses_numbered_lines() {
        assert_eq!(parse_llm_list("1. a\n2. b").unwrap(), ["a", "b"]);
    }

    #[test]
    fn parses_bulleted_quoted_items() {
        assert_eq!(
            parse_llm_list("- \"Red Liquid\"\n- water").unwrap(),
            ["Red Liquid", "water"]
        );
    }

    #[test]
    fn parses_inline_numbered_list_in_prose() {
        assert_eq!(
            parse_llm_list("Sure! Here are some: 1. apple 2. orange").unwrap(),
            ["apple", "orange"]
        );
    }

    #[test]
    fn dedup_is_case_insensitive_and_order_preserving() {
        assert_eq!(
            parse_llm_list("color, Color, taste, COLOR").unwrap(),
            ["color", "taste"]
        );
    }

    #[test]
    fn decimal_numbers_are_not_markers() {
        assert_eq!(
            parse_llm_list("rated 3.5 stars").unwrap(),
            ["rated 3.5 stars"]
        );
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_llm_list("  \n ,, \n"),
            Err(GenerationError::NoItems { .. })
        ));
    }

    #[test]
    fn parse_is_idempotent_on_joined_output() {
        for raw in [
            "a, b, c",
            "1. a\n2. b",
            "- \"Red Liquid\"\n- water",
            "Sure! Here are some: 1. apple 2. orange",
            "Dachshund, Poodle, Beagle, Basset Hound, Chihuahua",
        ] {
            let once = parse_llm_list(raw).unwrap();
            let again = parse_llm_list(&once.join(", ")).unwrap();
            assert_eq!(once, again);
        }
    }

    fn corgi() -> Concept {
        Concept::new("corgi", Category::Instance).unwrap()
    }

    fn cfg() -> GenerationConfig {
        GenerationConfig::new(Category::Instance)
    }

    #[test]
    fn candidates_survive_validation() {
        let backend = FixtureBackend::default().with_completion(
            "Candidates",
            "Dachshund, Poodle, Beagle, Basset Hound, Chihuahua",
        );
        let out = generate_candidates(
            &corgi(),
            &cfg(),
            &backend,
            &PromptLibrary::default(),
            &ConceptHierarchy::empty(),
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(SiblingCandidate::is_valid));
        assert_eq!(out[0].concept.name, "Dachshund");
    }

    #[test]
    fn identity_candidates_are_all_rejected() {
        let backend =
            FixtureBackend::default().with_completion("Candidates", "corgi, corgi, corgi");
        let err = generate_candidates(
            &corgi(),
            &cfg(),
            &backend,
            &PromptLibrary::default(),
            &ConceptHierarchy::empty(),
            &BTreeSet::new(),
        )
        .unwrap_err();
        assert!(matches!(err, GenerationError::NoValidCandidates { .. }));
    }

    #[test]
    fn candidate_list_respects_cap() {
        let backend = FixtureBackend::default()
            .with_completion("Candidates", "a1, b1, c1, d1, e1, f1, g1, h1, i1, j1");
        let mut config = cfg();
        config.num_candidates = 3;
        let out = generate_candidates(
            &corgi(),
            &config,
            &backend,
            &PromptLibrary::default(),
            &ConceptHierarchy::empty(),
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn related_words_deduplicate_and_keep_sources() {
        let backend = FixtureBackend::default()
            .with_completion("think of", "color, color, taste")
            .with_completion("distinctive feature", "taste, life");
        let target = Concept::new("blood", Category::General).unwrap();
        let words =
            generate_related_words(&target, &GenerationConfig::new(Category::General), &backend)
                .unwrap();
        let names: Vec<&str> = words.iter().map(|w| w.word.as_str()).collect();
        assert_eq!(names, ["color", "taste", "life"]);
        assert_eq!(words[0].source_template, RELATED_WORD_SEEDS[0]);
        assert_eq!(words[2].source_template, RELATED_WORD_SEEDS[1]);
    }

    #[test]
    fn empty_completion_is_an_error() {
        let backend = FixtureBackend::default()
            .with_completion("think of", " ")
            .with_completion("distinctive feature", " ");
        let target = Concept::new("blood", Category::General).unwrap();
        let err =
            generate_related_words(&target, &GenerationConfig::new(Category::General), &backend)
                .unwrap_err();
        assert!(matches!(err, GenerationError::NoRelatedWords { .. }));
    }
}

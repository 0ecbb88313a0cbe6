//! The scoring-backend abstraction: mask-fill probabilities, sequence
//! perplexity, and free-form completion.
//!
//! Two deterministic implementations live in this crate (the add-one bigram
//! model in [`crate::ngram`] and the canned [`FixtureBackend`] /
//! [`UniformBackend`] here); the HTTP client for real models lives in the
//! companion CLI crate behind the same trait.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::concept::Provenance;

pub const MASK_TOKEN: &str = "[MASK]";
pub const CONCEPT_SLOT: &str = "{C}";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("template must contain exactly one `{{C}}` and one `[MASK]`, got: {0}")]
    MalformedTemplate(String),
    #[error("prompt must contain exactly one `[MASK]`, got: {0}")]
    MalformedPrompt(String),
    #[error("word is empty")]
    EmptyWord,
    #[error("empty text")]
    EmptyText,
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("perplexity {0} is not positive and finite")]
    InvalidPerplexity(f64),
    #[error("no canned response matches {kind} request: {key}")]
    FixtureMiss { kind: &'static str, key: String },
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("remote call failed after {attempts} attempt(s): {message}")]
    Exhausted { attempts: u32, message: String },
    #[error("remote returned HTTP {status}: {body_excerpt}")]
    HttpStatus { status: u16, body_excerpt: String },
    #[error("remote error: {0}")]
    Remote(String),
    #[error("response cache conflict for key {key}")]
    CacheConflict { key: String },
    #[error("response cache entry corrupt at {path}")]
    CacheCorrupt { path: String },
}

/// Mask-fill probability in [0, 1]. Raw model scale; any display scaling
/// happens at render time only.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Probability, BackendError> {
        if !(0.0..=1.0).contains(&value) || !value.is_finite() {
            return Err(BackendError::InvalidProbability(value));
        }
        Ok(Probability(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Sequence perplexity, `exp(-mean log p)`. Always >= 1 for a proper model.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerplexityValue(f64);

impl PerplexityValue {
    pub fn new(value: f64) -> Result<PerplexityValue, BackendError> {
        if !value.is_finite() || value <= 0.0 {
            return Err(BackendError::InvalidPerplexity(value));
        }
        Ok(PerplexityValue(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Template text with exactly one `{C}` slot and exactly one `[MASK]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MaskTemplate {
    text: String,
}

fn count_occurrences(haystack: &str, needle: &str) -> usize {
    haystack.matches(needle).count()
}

impl MaskTemplate {
    pub fn new(text: &str) -> Result<MaskTemplate, BackendError> {
        if count_occurrences(text, CONCEPT_SLOT) != 1 || count_occurrences(text, MASK_TOKEN) != 1 {
            return Err(BackendError::MalformedTemplate(text.to_owned()));
        }
        Ok(MaskTemplate {
            text: text.to_owned(),
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Substitute the `{C}` slot, yielding a prompt ready for mask filling.
    pub fn instantiate(&self, slot_value: &str) -> MaskedPrompt {
        MaskedPrompt {
            text: self.text.replace(CONCEPT_SLOT, slot_value),
        }
    }
}

impl TryFrom<String> for MaskTemplate {
    type Error = BackendError;
    fn try_from(text: String) -> Result<MaskTemplate, BackendError> {
        MaskTemplate::new(&text)
    }
}

impl From<MaskTemplate> for String {
    fn from(t: MaskTemplate) -> String {
        t.text
    }
}

/// Prompt text with exactly one `[MASK]` and no remaining slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MaskedPrompt {
    text: String,
}

impl MaskedPrompt {
    pub fn new(text: &str) -> Result<MaskedPrompt, BackendError> {
        if count_occurrences(text, MASK_TOKEN) != 1 {
            return Err(BackendError::MalformedPrompt(text.to_owned()));
        }
        Ok(MaskedPrompt {
            text: text.to_owned(),
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Text on either side of the `[MASK]` marker.
    pub fn split_at_mask(&self) -> (&str, &str) {
        let idx = self
            .text
            .find(MASK_TOKEN)
            .expect("validated on construction");
        (&self.text[..idx], &self.text[idx + MASK_TOKEN.len()..])
    }
}

impl TryFrom<String> for MaskedPrompt {
    type Error = BackendError;
    fn try_from(text: String) -> Result<MaskedPrompt, BackendError> {
        MaskedPrompt::new(&text)
    }
}

impl From<MaskedPrompt> for String {
    fn from(p: MaskedPrompt) -> String {
        p.text
    }
}

/// The fixed tokenizer contract: lowercase, split on anything that is not
/// alphanumeric. Keeps scores reproducible across backends and runs.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lower in ch.to_lowercase() {
                current.push(lower);
            }
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Language-model scoring surface shared by all backends.
///
/// Implementations must be deterministic for a fixed internal state and
/// safe to call from multiple threads.
pub trait ScoringBackend: Send + Sync {
    /// Stable identity string, recorded in run records and cache keys.
    fn id(&self) -> String;

    /// Probability that `word` occupies the `[MASK]` position of `prompt`.
    ///
    /// Multi-token words score as the geometric mean of the per-token chain
    /// probabilities, which keeps values in [0, 1] and comparable across
    /// word lengths.
    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError>;

    /// `exp(-(1/N) * sum log p(token_i | context))` over the tokenized text.
    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError>;

    /// Free-form completion for candidate and related-word generation.
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;

    /// Provenance tag attached to candidates parsed from this backend.
    fn provenance(&self) -> Provenance {
        Provenance::LlmGenerated
    }
}

impl<T: ScoringBackend + ?Sized> ScoringBackend for &T {
    fn id(&self) -> String {
        (**self).id()
    }
    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        (**self).fill_probability(prompt, word)
    }
    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        (**self).perplexity(text)
    }
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
}

/// Uniform mock: every conditional probability is `1/vocab_size`, so any
/// N-token text has perplexity exactly `vocab_size`.
#[derive(Debug, Clone)]
pub struct UniformBackend {
    vocab_size: usize,
}

impl UniformBackend {
    pub fn new(vocab_size: usize) -> UniformBackend {
        assert!(vocab_size > 0, "vocab_size must be positive");
        UniformBackend { vocab_size }
    }
}

impl ScoringBackend for UniformBackend {
    fn id(&self) -> String {
        alloc::format!("uniform:{}", self.vocab_size)
    }

    fn fill_probability(
        &self,
        _prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        if word.trim().is_empty() {
            return Err(BackendError::EmptyWord);
        }
        Probability::new(1.0 / self.vocab_size as f64)
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        if tokenize(text).is_empty() {
            return Err(BackendError::EmptyText);
        }
        PerplexityValue::new(self.vocab_size as f64)
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.trim().is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        Ok(String::new())
    }

    fn provenance(&self) -> Provenance {
        Provenance::Fixture
    }
}

/// One canned rule. `matcher` is a case-insensitive substring test against
/// the incoming prompt/text; rules are tried in order, first match wins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FillRule {
    pub prompt_contains: String,
    pub word: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerplexityRule {
    pub text_contains: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompletionRule {
    pub prompt_contains: String,
    pub text: String,
}

/// Serializable description of a [`FixtureBackend`]; this is the file format
/// behind `--backend fixture`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FixtureSpec {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub completions: Vec<CompletionRule>,
    #[serde(default)]
    pub fills: Vec<FillRule>,
    #[serde(default)]
    pub perplexities: Vec<PerplexityRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_fill: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_perplexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_completion: Option<String>,
}

/// Canned backend for tests and offline pipelines. Fully deterministic.
#[derive(Debug, Clone, Default)]
pub struct FixtureBackend {
    spec: FixtureSpec,
}

impl FixtureBackend {
    pub fn new(spec: FixtureSpec) -> FixtureBackend {
        FixtureBackend { spec }
    }

    pub fn parse(json: &str) -> Result<FixtureBackend, BackendError> {
        let spec: FixtureSpec =
            serde_json::from_str(json).map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(FixtureBackend { spec })
    }

    pub fn with_completion(mut self, prompt_contains: &str, text: &str) -> FixtureBackend {
        self.spec.completions.push(CompletionRule {
            prompt_contains: prompt_contains.to_owned(),
            text: text.to_owned(),
        });
        self
    }

    pub fn with_fill(mut self, prompt_contains: &str, word: &str, value: f64) -> FixtureBackend {
        self.spec.fills.push(FillRule {
            prompt_contains: prompt_contains.to_owned(),
            word: word.to_owned(),
            value,
        });
        self
    }

    pub fn with_perplexity(mut self, text_contains: &str, value: f64) -> FixtureBackend {
        self.spec.perplexities.push(PerplexityRule {
            text_contains: text_contains.to_owned(),
            value,
        });
        self
    }

    pub fn with_default_fill(mut self, value: f64) -> FixtureBackend {
        self.spec.default_fill = Some(value);
        self
    }

    pub fn with_default_perplexity(mut self, value: f64) -> FixtureBackend {
        self.spec.default_perplexity = Some(value);
        self
    }

    pub fn spec(&self) -> &FixtureSpec {
        &self.spec
    }
}

fn contains_ci(haystack: &str, needle: &str) -> bool {
    crate::concept::normalize_name(haystack).contains(&crate::concept::normalize_name(needle))
}

impl ScoringBackend for FixtureBackend {
    fn id(&self) -> String {
        self.spec.id.clone().unwrap_or_else(|| "fixture".to_owned())
    }

    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        if word.trim().is_empty() {
            return Err(BackendError::EmptyWord);
        }
        let word_norm = crate::concept::normalize_name(word);
        for rule in &self.spec.fills {
            if crate::concept::normalize_name(&rule.word) == word_norm
                && contains_ci(prompt.text(), &rule.prompt_contains)
            {
                return Probability::new(rule.value);
            }
        }
        match self.spec.default_fill {
            Some(v) => Probability::new(v),
            None => Err(BackendError::FixtureMiss {
                kind: "fill",
                key: alloc::format!("{} / {word}", prompt.text()),
            }),
        }
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        if tokenize(text).is_empty() {
            return Err(BackendError::EmptyText);
        }
        for rule in &self.spec.perplexities {
            if contains_ci(text, &rule.text_contains) {
                return PerplexityValue::new(rule.value);
            }
        }
        match self.spec.default_perplexity {
            Some(v) => PerplexityValue::new(v),
            None => Err(BackendError::FixtureMiss {
                kind: "perplexity",
                key: text.to_owned(),
            }),
        }
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        if prompt.trim().is_empty() {
            return Err(BackendError::EmptyPrompt);
        }
        for rule in &self.spec.completions {
            if contains_ci(prompt, &rule.prompt_contains) {
                return Ok(rule.text.clone());
            }
        }
        match &self.spec.default_completion {
            Some(text) => Ok(text.clone()),
            None => Err(BackendError::FixtureMiss {
                kind: "completion",
                key: prompt.to_owned(),
            }),
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance::Fixture
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_lowercases_and_splits_on_punctuation() {
        assert_eq!(
            tokenize("A photo, of a CAT."),
            alloc::vec!["a", "photo", "of", "a", "cat"]
        );
        assert_eq!(tokenize("  \t "), Vec::<String>::new());
        // Trailing whitespace and case do not change the stream.
        assert_eq!(tokenize("a b"), tokenize("A B  \n"));
    }

    #[test]
    fn template_validation() {
        assert!(MaskTemplate::new("the {C} chases the [MASK].").is_ok());
        assert!(MaskTemplate::new("no slots here").is_err());
        assert!(MaskTemplate::new("{C} and {C} with [MASK]").is_err());
        assert!(MaskTemplate::new("{C} with [MASK] and [MASK]").is_err());
    }

    #[test]
    fn instantiation_substitutes_the_slot() {
        let t = MaskTemplate::new("the {C} chases the [MASK].").unwrap();
        let p = t.instantiate("cat");
        assert_eq!(p.text(), "the cat chases the [MASK].");
        let (left, right) = p.split_at_mask();
        assert_eq!(left, "the cat chases the ");
        assert_eq!(right, ".");
    }

    #[test]
    fn uniform_backend_matches_vocab_size() {
        let b = UniformBackend::new(10);
        let p = MaskedPrompt::new("a [MASK] here").unwrap();
        assert_eq!(b.fill_probability(&p, "word").unwrap().value(), 0.1);
        assert_eq!(
            b.perplexity("one two three four five").unwrap().value(),
            10.0
        );
        assert!(b.fill_probability(&p, "  ").is_err());
    }

    #[test]
    fn fixture_rules_match_in_order() {
        let b = FixtureBackend::default()
            .with_fill("sap", "color", 0.25)
            .with_default_fill(0.01)
            .with_completion("list the", "a, b, c");
        let p = MaskedPrompt::new("a photo of sap [MASK]").unwrap();
        assert_eq!(b.fill_probability(&p, "color").unwrap().value(), 0.25);
        assert_eq!(b.fill_probability(&p, "other").unwrap().value(), 0.01);
        assert_eq!(b.complete("please List the items").unwrap(), "a, b, c");
        assert!(b.complete("unmatched").is_err());
    }

    #[test]
    fn probability_bounds_enforced() {
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.00001).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert!(Probability::new(0.0).is_ok());
    }
}

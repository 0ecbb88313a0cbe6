//! Deterministic add-one (Laplace) bigram model.
//!
//! This is the offline stand-in for the masked LM and the perplexity model.
//! Add-one smoothing was chosen for exact hand-verifiability: every value a
//! test asserts can be recomputed on paper from the corpus counts.
//!
//! Conventions, fixed so scores are reproducible:
//! - tokenization is [`crate::backend::tokenize`] (lowercase, split on
//!   non-alphanumeric);
//! - the context count in a conditional is the number of *outgoing* bigrams
//!   from that token, so each conditional distribution sums to exactly 1
//!   over the vocabulary;
//! - the first token of a sequence uses the smoothed unigram
//!   `(count + 1) / (N + |V|)`;
//! - out-of-vocabulary words get the smoothed floor `1 / (outgoing + |V|)`
//!   rather than an error.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{
    tokenize, BackendError, MaskedPrompt, PerplexityValue, Probability, ScoringBackend,
};
use crate::concept::Provenance;
use crate::hash::stable_hex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NGramError {
    #[error("corpus tokenizes to {0} token(s); need at least 2")]
    CorpusTooSmall(usize),
}

/// Add-one smoothed bigram model over the fixed tokenizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGramModel {
    vocabulary: BTreeSet<String>,
    unigram_counts: BTreeMap<String, u64>,
    bigram_counts: BTreeMap<String, BTreeMap<String, u64>>,
    /// Outgoing bigram totals per context token.
    context_totals: BTreeMap<String, u64>,
    total_tokens: u64,
    corpus_digest: String,
}

/// Build the model from a raw corpus. Same corpus bytes give a
/// byte-identical serialized model.
pub fn train_ngram(corpus: &str) -> Result<NGramModel, NGramError> {
    let tokens = tokenize(corpus);
    if tokens.len() < 2 {
        return Err(NGramError::CorpusTooSmall(tokens.len()));
    }
    let mut vocabulary = BTreeSet::new();
    let mut unigram_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut bigram_counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut context_totals: BTreeMap<String, u64> = BTreeMap::new();
    for token in &tokens {
        vocabulary.insert(token.clone());
        *unigram_counts.entry(token.clone()).or_insert(0) += 1;
    }
    for pair in tokens.windows(2) {
        *bigram_counts
            .entry(pair[0].clone())
            .or_default()
            .entry(pair[1].clone())
            .or_insert(0) += 1;
        *context_totals.entry(pair[0].clone()).or_insert(0) += 1;
    }
    Ok(NGramModel {
        vocabulary,
        unigram_counts,
        bigram_counts,
        context_totals,
        total_tokens: tokens.len() as u64,
        corpus_digest: stable_hex(&[corpus]),
    })
}

impl NGramModel {
    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Add-one conditional `p(word | prev)`. Sums to exactly 1 over the
    /// vocabulary for any context; OOV words get the smoothed floor.
    pub fn conditional(&self, prev: &str, word: &str) -> f64 {
        let count = self
            .bigram_counts
            .get(prev)
            .and_then(|next| next.get(word))
            .copied()
            .unwrap_or(0);
        let total = self.context_totals.get(prev).copied().unwrap_or(0);
        (count + 1) as f64 / (total as f64 + self.vocab_size() as f64)
    }

    /// Smoothed unigram `(count + 1) / (N + |V|)`, used when no left
    /// context exists.
    pub fn unigram(&self, word: &str) -> f64 {
        let count = self.unigram_counts.get(word).copied().unwrap_or(0);
        (count + 1) as f64 / (self.total_tokens as f64 + self.vocab_size() as f64)
    }

    /// Chain probabilities for a word dropped into a mask position:
    /// first token given the last left-context token (or the unigram),
    /// each further token given its predecessor, and the transition into
    /// the first right-context token when one exists.
    fn fill_factors(&self, left: &[String], right: &[String], word_tokens: &[String]) -> Vec<f64> {
        let mut factors = Vec::with_capacity(word_tokens.len() + 1);
        match left.last() {
            Some(prev) => factors.push(self.conditional(prev, &word_tokens[0])),
            None => factors.push(self.unigram(&word_tokens[0])),
        }
        for pair in word_tokens.windows(2) {
            factors.push(self.conditional(&pair[0], &pair[1]));
        }
        if let Some(next) = right.first() {
            factors.push(self.conditional(word_tokens.last().unwrap(), next));
        }
        factors
    }

    fn log_likelihood(&self, tokens: &[String]) -> f64 {
        let mut total = libm::log(self.unigram(&tokens[0]));
        for pair in tokens.windows(2) {
            total += libm::log(self.conditional(&pair[0], &pair[1]));
        }
        total
    }
}

impl ScoringBackend for NGramModel {
    fn id(&self) -> String {
        let mut id = String::from("ngram:");
        id.push_str(&self.corpus_digest[..12]);
        id
    }

    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        let word_tokens = tokenize(word);
        if word_tokens.is_empty() {
            return Err(BackendError::EmptyWord);
        }
        let (left_text, right_text) = prompt.split_at_mask();
        let left = tokenize(left_text);
        let right = tokenize(right_text);
        let factors = self.fill_factors(&left, &right, &word_tokens);
        let mean_log: f64 =
            factors.iter().map(|f| libm::log(*f)).sum::<f64>() / factors.len() as f64;
        Probability::new(libm::exp(mean_log))
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(BackendError::EmptyText);
        }
        let mean_log = self.log_likelihood(&tokens) / tokens.len() as f64;
        PerplexityValue::new(libm::exp(-mean_log))
    }

    /// Deterministic completion: the vocabulary ranked by conditional
    /// probability after the prompt's last token (ties alphabetical),
    /// truncated to eight entries and joined with commas. A crude list
    /// generator, but reproducible, which is what the offline pipeline
    /// needs.
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let tokens = tokenize(prompt);
        let Some(prev) = tokens.last() else {
            return Err(BackendError::EmptyPrompt);
        };
        let mut ranked: Vec<(&String, f64)> = self
            .vocabulary
            .iter()
            .map(|w| (w, self.conditional(prev, w)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let picks: Vec<&str> = ranked.iter().take(8).map(|(w, _)| w.as_str()).collect();
        Ok(picks.join(", "))
    }

    fn provenance(&self) -> Provenance {
        Provenance::LlmGenerated
    }
}

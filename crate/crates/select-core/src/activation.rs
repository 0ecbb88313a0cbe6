//! Contextual activation scores.
//!
//! Four quantities built on mask-fill probabilities:
//! - per-word activation: probability of a related word in a concept-bearing
//!   template;
//! - the aggregate `W_s`: mean of the two highest-scoring related words,
//!   each taken at its best template;
//! - the anchor/target ratio `U_c`: mean of per-word activation ratios over
//!   the target's top-2 related words (low means weak association with the
//!   target's context);
//! - the context raise ratio: concept activation in related-word contexts
//!   divided by activation in a neutral context.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, MaskTemplate, MaskedPrompt, Probability, ScoringBackend};
use crate::concept::Concept;
use crate::generate::RelatedWord;
use crate::EPSILON;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("at least one related word is required")]
    EmptyWords,
    #[error("at least one template is required")]
    EmptyTemplates,
    #[error("at least one context prompt is required")]
    EmptyPrompts,
}

/// One related word's activation, recorded at its best template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordActivation {
    pub word: RelatedWord,
    pub template: String,
    pub probability: f64,
}

/// Context-raise-ratio triple. `degenerate` is set when the neutral score
/// had to be clamped to the shared epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrrOutcome {
    pub related_context_score: f64,
    pub neutral_context_score: f64,
    pub crr: f64,
    pub degenerate: bool,
}

/// Full activation picture for one concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationReport {
    pub concept: Concept,
    pub per_word: Vec<WordActivation>,
    pub ws: f64,
    pub related_context_score: f64,
    pub neutral_context_score: f64,
    pub crr: f64,
    pub crr_degenerate: bool,
}

/// Anchor-to-target activation ratio over the target's top related words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcScore {
    pub anchor: Concept,
    pub target: Concept,
    pub value: f64,
    pub per_word_ratios: Vec<(String, f64)>,
}

/// Activation of one word in one concept-bearing template.
pub fn word_activation<B: ScoringBackend + ?Sized>(
    concept: &Concept,
    word: &RelatedWord,
    template: &MaskTemplate,
    backend: &B,
) -> Result<Probability, ScoringError> {
    let prompt = template.instantiate(&concept.name);
    Ok(backend.fill_probability(&prompt, &word.word)?)
}

/// Per-word activations, each maximized over the template set.
pub fn word_activations<B: ScoringBackend + ?Sized>(
    concept: &Concept,
    words: &[RelatedWord],
    templates: &[MaskTemplate],
    backend: &B,
) -> Result<Vec<WordActivation>, ScoringError> {
    if words.is_empty() {
        return Err(ScoringError::EmptyWords);
    }
    if templates.is_empty() {
        return Err(ScoringError::EmptyTemplates);
    }
    let mut out = Vec::with_capacity(words.len());
    for word in words {
        let mut best_template = &templates[0];
        let mut best = f64::MIN;
        for template in templates {
            let p = word_activation(concept, word, template, backend)?.value();
            if p > best {
                best = p;
                best_template = template;
            }
        }
        out.push(WordActivation {
            word: word.clone(),
            template: best_template.text().to_string(),
            probability: best,
        });
    }
    Ok(out)
}

/// Mean of the two largest activations (or the single one).
pub fn ws_from_activations(activations: &[WordActivation]) -> f64 {
    let mut probs: Vec<f64> = activations.iter().map(|a| a.probability).collect();
    probs.sort_by(|a, b| b.total_cmp(a));
    match probs.len() {
        0 => 0.0,
        1 => probs[0],
        _ => (probs[0] + probs[1]) / 2.0,
    }
}

/// The aggregate activation score: top-2 mean over best-template word
/// activations.
pub fn ws_score<B: ScoringBackend + ?Sized>(
    concept: &Concept,
    words: &[RelatedWord],
    templates: &[MaskTemplate],
    backend: &B,
) -> Result<f64, ScoringError> {
    Ok(ws_from_activations(&word_activations(
        concept, words, templates, backend,
    )?))
}

/// Indices of the target's top-2 words (ties keep list order).
fn top2_indices(activations: &[WordActivation]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..activations.len()).collect();
    order.sort_by(|&a, &b| {
        activations[b]
            .probability
            .total_cmp(&activations[a].probability)
            .then(a.cmp(&b))
    });
    order.truncate(2);
    order
}

/// Anchor/target activation ratio, averaged over the target's top-2
/// related words. The same word and template sets are used on both sides;
/// target activations are clamped at epsilon.
pub fn uc_ratio<B: ScoringBackend + ?Sized>(
    anchor: &Concept,
    target: &Concept,
    words: &[RelatedWord],
    templates: &[MaskTemplate],
    backend: &B,
) -> Result<UcScore, ScoringError> {
    let target_acts = word_activations(target, words, templates, backend)?;
    let anchor_acts = word_activations(anchor, words, templates, backend)?;
    let mut per_word_ratios = Vec::new();
    for index in top2_indices(&target_acts) {
        let denominator = target_acts[index].probability.max(EPSILON);
        per_word_ratios.push((
            words[index].word.clone(),
            anchor_acts[index].probability / denominator,
        ));
    }
    let value = per_word_ratios.iter().map(|(_, r)| r).sum::<f64>() / per_word_ratios.len() as f64;
    Ok(UcScore {
        anchor: anchor.clone(),
        target: target.clone(),
        value,
        per_word_ratios,
    })
}

/// The clamped ratio arithmetic shared by the raise-ratio paths.
pub fn raise_ratio(related: f64, neutral: f64) -> (f64, bool) {
    let degenerate = neutral < EPSILON;
    (related / neutral.max(EPSILON), degenerate)
}

/// Concept activation in related contexts vs. a neutral context.
///
/// The related prompts embed related words and mask the concept slot, so
/// the concept itself is the scored item; `rc` is the mean over prompts.
pub fn context_raise_ratio<B: ScoringBackend + ?Sized>(
    concept: &Concept,
    related_prompts: &[MaskedPrompt],
    neutral_prompt: &MaskedPrompt,
    backend: &B,
) -> Result<CrrOutcome, ScoringError> {
    if related_prompts.is_empty() {
        return Err(ScoringError::EmptyPrompts);
    }
    let mut total = 0.0;
    for prompt in related_prompts {
        total += backend.fill_probability(prompt, &concept.name)?.value();
    }
    let related_context_score = total / related_prompts.len() as f64;
    let neutral_context_score = backend
        .fill_probability(neutral_prompt, &concept.name)?
        .value();
    let (crr, degenerate) = raise_ratio(related_context_score, neutral_context_score);
    Ok(CrrOutcome {
        related_context_score,
        neutral_context_score,
        crr,
        degenerate,
    })
}

/// Context prompts for the raise ratio: every probe instantiated with
/// every related word.
pub fn context_prompts(probes: &[MaskTemplate], words: &[RelatedWord]) -> Vec<MaskedPrompt> {
    let mut prompts = Vec::with_capacity(probes.len() * words.len());
    for probe in probes {
        for word in words {
            prompts.push(probe.instantiate(&word.word));
        }
    }
    prompts
}

/// Assemble the full activation report for one concept.
pub fn activation_report<B: ScoringBackend + ?Sized>(
    concept: &Concept,
    words: &[RelatedWord],
    templates: &[MaskTemplate],
    probes: &[MaskTemplate],
    neutral_prompt: &MaskedPrompt,
    backend: &B,
) -> Result<ActivationReport, ScoringError> {
    let per_word = word_activations(concept, words, templates, backend)?;
    let ws = ws_from_activations(&per_word);
    let prompts = context_prompts(probes, words);
    let crr = context_raise_ratio(concept, &prompts, neutral_prompt, backend)?;
    Ok(ActivationReport {
        concept: concept.clone(),
        per_word,
        ws,
        related_context_score: crr.related_context_score,
        neutral_context_score: crr.neutral_context_score,
        crr: crr.crr,
        crr_degenerate: crr.degenerate,
    })
}

//! Semantic coherence scoring: the perplexity ratio between target-bearing
//! prompts and their anchor-substituted versions. Higher is better: a
//! ratio above 1 means the anchor reads more naturally in the target's
//! contexts than the target itself.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, ScoringBackend};
use crate::concept::Concept;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoherenceError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("at least one prompt is required")]
    EmptyPrompts,
    #[error("target `{target}` not found in prompt: {prompt:?}")]
    TargetNotFound { target: String, prompt: String },
    #[error("prompt {index} failed: {source}")]
    AtPrompt {
        index: usize,
        source: Box<CoherenceError>,
    },
}

/// Per-prompt perplexity pair and ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptCoherence {
    pub original: String,
    pub substituted: String,
    pub ppl_original: f64,
    pub ppl_substituted: f64,
    pub ratio: f64,
}

/// Coherence score for one anchor over a prompt set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub anchor: Concept,
    pub per_prompt: Vec<PromptCoherence>,
    pub cos: f64,
}

fn fold(ch: char) -> char {
    ch.to_lowercase().next().unwrap_or(ch)
}

/// Replace every word-boundary occurrence of the target name with the
/// anchor name, case-insensitively, leaving all other bytes untouched.
pub fn substitute(
    prompt: &str,
    target: &Concept,
    anchor: &Concept,
) -> Result<String, CoherenceError> {
    let needle: Vec<char> = target.name.trim().chars().map(fold).collect();
    let haystack: Vec<(usize, char)> = prompt.char_indices().collect();
    if needle.is_empty() {
        return Err(CoherenceError::TargetNotFound {
            target: target.name.clone(),
            prompt: prompt.to_owned(),
        });
    }

    let mut matches: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i + needle.len() <= haystack.len() {
        let mut hit = true;
        for (k, expected) in needle.iter().enumerate() {
            if fold(haystack[i + k].1) != *expected {
                hit = false;
                break;
            }
        }
        if hit {
            let end = i + needle.len();
            let boundary_left = i == 0 || !haystack[i - 1].1.is_alphanumeric();
            let boundary_right = end == haystack.len() || !haystack[end].1.is_alphanumeric();
            if boundary_left && boundary_right {
                let byte_start = haystack[i].0;
                let byte_end = if end == haystack.len() {
                    prompt.len()
                } else {
                    haystack[end].0
                };
                matches.push((byte_start, byte_end));
                i = end;
                continue;
            }
        }
        i += 1;
    }

    if matches.is_empty() {
        return Err(CoherenceError::TargetNotFound {
            target: target.name.clone(),
            prompt: prompt.to_owned(),
        });
    }

    let mut out = String::with_capacity(prompt.len());
    let mut cursor = 0;
    for (start, end) in matches {
        out.push_str(&prompt[cursor..start]);
        out.push_str(&anchor.name);
        cursor = end;
    }
    out.push_str(&prompt[cursor..]);
    Ok(out)
}

/// Coherence of an anchor over a prompt set: per-prompt PPL ratio
/// `PPL(p) / PPL(p')`, aggregated by arithmetic mean.
pub fn cos_score<B: ScoringBackend + ?Sized>(
    target: &Concept,
    anchor: &Concept,
    prompts: &[String],
    backend: &B,
) -> Result<CoherenceReport, CoherenceError> {
    if prompts.is_empty() {
        return Err(CoherenceError::EmptyPrompts);
    }
    let mut per_prompt = Vec::with_capacity(prompts.len());
    for (index, prompt) in prompts.iter().enumerate() {
        let wrap = |source: CoherenceError| CoherenceError::AtPrompt {
            index,
            source: Box::new(source),
        };
        let substituted = substitute(prompt, target, anchor).map_err(wrap)?;
        let ppl_original = backend
            .perplexity(prompt)
            .map_err(|e| wrap(e.into()))?
            .value();
        let ppl_substituted = backend
            .perplexity(&substituted)
            .map_err(|e| wrap(e.into()))?
            .value();
        per_prompt.push(PromptCoherence {
            original: prompt.clone(),
            substituted,
            ppl_original,
            ppl_substituted,
            ratio: ppl_original / ppl_substituted,
        });
    }
    let cos = per_prompt.iter().map(|p| p.ratio).sum::<f64>() / per_prompt.len() as f64;
    Ok(CoherenceReport {
        anchor: anchor.clone(),
        per_prompt,
        cos,
    })
}

//! Two-stage anchor selection and retain-set construction, plus the
//! end-to-end mining orchestration.
//!
//! Stage I keeps candidates weakly associated with the target context
//! (ascending activation ratio, threshold with a top-k fallback); Stage II
//! picks the most coherent survivor. The non-selected candidates become the
//! retain set guarding the target's semantic boundary.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activation::{activation_report, uc_ratio, ActivationReport, ScoringError, UcScore};
use crate::backend::ScoringBackend;
use crate::coherence::{cos_score, CoherenceError, CoherenceReport};
use crate::concept::{Concept, ConceptHierarchy, SiblingCandidate};
use crate::generate::{
    generate_candidates, generate_related_words, GenerationConfig, GenerationError,
};
use crate::prompts::PromptLibrary;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhaseFailure {
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MiningError {
    #[error("candidate list is empty")]
    EmptyInput,
    #[error("candidate `{0}` reached stage two without a coherence report")]
    MissingCoherence(String),
    #[error("anchor `{0}` is not among the candidates")]
    AnchorNotAmongCandidates(String),
    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: &'static str,
        source: Box<PhaseFailure>,
    },
}

fn phase_error(phase: &'static str, source: impl Into<PhaseFailure>) -> MiningError {
    MiningError::Phase {
        phase,
        source: Box::new(source.into()),
    }
}

/// A candidate with every score the pipeline produced for it. The
/// coherence report is present exactly when the candidate survived Stage I.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub candidate: SiblingCandidate,
    pub activation: ActivationReport,
    pub uc: UcScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceReport>,
}

impl ScoredCandidate {
    fn normalized_name(&self) -> String {
        self.candidate.concept.normalized()
    }
}

/// Stage-I knobs. Ties always break lexicographically on the normalized
/// name so runs are reproducible and diffable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub uc_threshold: f64,
    pub stage1_top_k: usize,
}

impl Default for SelectionPolicy {
    fn default() -> SelectionPolicy {
        SelectionPolicy {
            uc_threshold: 1.0,
            stage1_top_k: 3,
        }
    }
}

/// Wall-clock duration of one pipeline phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub millis: u64,
}

/// Millisecond clock injected into the orchestration. The CLI supplies a
/// real clock; [`NullClock`] keeps library runs deterministic.
pub trait Clock: Send + Sync {
    fn now_millis(&self) -> u64;
}

/// Clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_millis(&self) -> u64 {
        0
    }
}

/// Outcome of a full mining run.
///
/// Phase timings are observability metadata: they are carried in memory
/// but excluded from serialization so that identical runs serialize to
/// identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningResult {
    pub target: Concept,
    pub optimal_anchor: Concept,
    pub retain_set: Vec<Concept>,
    pub all_scores: Vec<ScoredCandidate>,
    #[serde(skip)]
    pub timing: Vec<PhaseTiming>,
}

fn stage1_order(a: &ScoredCandidate, b: &ScoredCandidate) -> core::cmp::Ordering {
    a.uc.value
        .total_cmp(&b.uc.value)
        .then_with(|| a.activation.ws.total_cmp(&b.activation.ws))
        .then_with(|| a.normalized_name().cmp(&b.normalized_name()))
}

/// Stage I: keep candidates whose activation ratio clears the threshold,
/// ascending, truncated to `stage1_top_k`. When nothing clears the
/// threshold the k smallest ratios survive instead, so a non-empty input
/// never filters to nothing.
pub fn stage1_filter(
    scored: &[ScoredCandidate],
    policy: &SelectionPolicy,
) -> Result<Vec<ScoredCandidate>, MiningError> {
    if scored.is_empty() {
        return Err(MiningError::EmptyInput);
    }
    let mut ordered: Vec<&ScoredCandidate> = scored.iter().collect();
    ordered.sort_by(|a, b| stage1_order(a, b));
    let passing: Vec<&ScoredCandidate> = ordered
        .iter()
        .copied()
        .filter(|c| c.uc.value < policy.uc_threshold)
        .collect();
    let chosen = if passing.is_empty() { ordered } else { passing };
    Ok(chosen
        .into_iter()
        .take(policy.stage1_top_k.max(1))
        .cloned()
        .collect())
}

/// Stage II: the survivor with the highest coherence score, ties broken
/// lexicographically.
pub fn stage2_select(survivors: &[ScoredCandidate]) -> Result<ScoredCandidate, MiningError> {
    if survivors.is_empty() {
        return Err(MiningError::EmptyInput);
    }
    let mut best: Option<(&ScoredCandidate, f64)> = None;
    for candidate in survivors {
        let Some(coherence) = &candidate.coherence else {
            return Err(MiningError::MissingCoherence(
                candidate.candidate.concept.name.clone(),
            ));
        };
        let better = match best {
            None => true,
            Some((current, cos)) => {
                coherence.cos > cos
                    || (coherence.cos == cos
                        && candidate.normalized_name() < current.normalized_name())
            }
        };
        if better {
            best = Some((candidate, coherence.cos));
        }
    }
    Ok(best.expect("non-empty survivors").0.clone())
}

/// The retain set: every valid candidate except the anchor, sorted
/// lexicographically by normalized name.
pub fn build_retain_set(
    candidates: &[SiblingCandidate],
    anchor: &Concept,
) -> Result<Vec<Concept>, MiningError> {
    let anchor_name = anchor.normalized();
    if !candidates
        .iter()
        .any(|c| c.concept.normalized() == anchor_name)
    {
        return Err(MiningError::AnchorNotAmongCandidates(anchor.name.clone()));
    }
    let mut retained: Vec<Concept> = candidates
        .iter()
        .filter(|c| c.is_valid() && c.concept.normalized() != anchor_name)
        .map(|c| c.concept.clone())
        .collect();
    retained.sort_by_key(|c| c.normalized());
    Ok(retained)
}

/// End-to-end mining: generate candidates and context words, score
/// activation for the target and every candidate, filter, score coherence
/// for the survivors, select, and build the retain set. Deterministic for
/// deterministic backends.
#[allow(clippy::too_many_arguments)]
pub fn mine_anchor<B: ScoringBackend + ?Sized>(
    target: &Concept,
    gen_cfg: &GenerationConfig,
    policy: &SelectionPolicy,
    backend: &B,
    library: &PromptLibrary,
    hierarchy: &ConceptHierarchy,
    synonyms: &BTreeSet<String>,
    clock: &dyn Clock,
) -> Result<MiningResult, MiningError> {
    let mut timing = Vec::new();
    let mut mark = clock.now_millis();
    let record_phase = |timing: &mut Vec<PhaseTiming>, phase: &str, now: u64, mark: &mut u64| {
        timing.push(PhaseTiming {
            phase: phase.to_owned(),
            millis: now.saturating_sub(*mark),
        });
        *mark = now;
    };

    let candidates = generate_candidates(target, gen_cfg, backend, library, hierarchy, synonyms)
        .map_err(|e| phase_error("generation", e))?;
    record_phase(&mut timing, "generation", clock.now_millis(), &mut mark);

    let words = generate_related_words(target, gen_cfg, backend)
        .map_err(|e| phase_error("related_words", e))?;
    record_phase(&mut timing, "related_words", clock.now_millis(), &mut mark);

    let templates = library.mask_templates_take(gen_cfg.num_related_templates);
    let probes = library.crr_probes();
    let neutral = library.neutral_probe();
    let mut scored = Vec::with_capacity(candidates.len());
    for candidate in &candidates {
        let activation = activation_report(
            &candidate.concept,
            &words,
            templates,
            probes,
            neutral,
            backend,
        )
        .map_err(|e| phase_error("activation", e))?;
        let uc = uc_ratio(&candidate.concept, target, &words, templates, backend)
            .map_err(|e| phase_error("activation", e))?;
        scored.push(ScoredCandidate {
            candidate: candidate.clone(),
            activation,
            uc,
            coherence: None,
        });
    }
    record_phase(&mut timing, "activation", clock.now_millis(), &mut mark);

    let survivors = stage1_filter(&scored, policy)?;
    record_phase(&mut timing, "stage1", clock.now_millis(), &mut mark);

    let prompts = library.coherence_prompts_for(gen_cfg.category, &target.name);
    let mut survivors_with_cos = Vec::with_capacity(survivors.len());
    for survivor in survivors {
        let coherence = cos_score(target, &survivor.candidate.concept, &prompts, backend)
            .map_err(|e| phase_error("coherence", e))?;
        let name = survivor.normalized_name();
        if let Some(entry) = scored.iter_mut().find(|c| c.normalized_name() == name) {
            entry.coherence = Some(coherence.clone());
        }
        survivors_with_cos.push(ScoredCandidate {
            coherence: Some(coherence),
            ..survivor
        });
    }
    record_phase(&mut timing, "coherence", clock.now_millis(), &mut mark);

    let winner = stage2_select(&survivors_with_cos)?;
    record_phase(&mut timing, "stage2", clock.now_millis(), &mut mark);

    let retain_set = build_retain_set(&candidates, &winner.candidate.concept)?;
    record_phase(&mut timing, "retain", clock.now_millis(), &mut mark);

    scored.sort_by_key(|c| c.normalized_name());
    Ok(MiningResult {
        target: target.clone(),
        optimal_anchor: winner.candidate.concept,
        retain_set,
        all_scores: scored,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::WordActivation;
    use crate::concept::{Category, Provenance};
    use crate::generate::RelatedWord;

    fn concept(name: &str) -> Concept {
        Concept::new(name, Category::General).unwrap()
    }

    fn scored(name: &str, uc_value: f64, ws: f64) -> ScoredCandidate {
        let c = concept(name);
        ScoredCandidate {
            candidate: SiblingCandidate {
                concept: c.clone(),
                sibling_ok: true,
                exclusive_ok: true,
                provenance: Provenance::Fixture,
            },
            activation: ActivationReport {
                concept: c.clone(),
                per_word: alloc::vec![WordActivation {
                    word: RelatedWord {
                        word: "w".into(),
                        source_template: "t".into()
                    },
                    template: "t".into(),
                    probability: ws,
                }],
                ws,
                related_context_score: 0.0,
                neutral_context_score: 0.0,
                crr: 0.0,
                crr_degenerate: false,
            },
            uc: UcScore {
                anchor: c.clone(),
                target: concept("target"),
                value: uc_value,
                per_word_ratios: alloc::vec![("w".into(), uc_value)],
            },
            coherence: None,
        }
    }

    fn with_cos(mut c: ScoredCandidate, cos: f64) -> ScoredCandidate {
        c.coherence = Some(CoherenceReport {
            anchor: c.candidate.concept.clone(),
            per_prompt: Vec::new(),
            cos,
        });
        c
    }

    #[test]
    fn stage1_threshold_filters_published_blood_ratios() {
        let table = [
            scored("sap", 0.668, 0.012),
            scored("red liquid", 1.142, 0.02),
            scored("water", 1.301, 0.024),
            scored("paint", 1.765, 0.031),
            scored("juice", 2.418, 0.042),
        ];
        let out = stage1_filter(&table, &SelectionPolicy::default()).unwrap();
        let names: Vec<&str> = out
            .iter()
            .map(|c| c.candidate.concept.name.as_str())
            .collect();
        assert_eq!(names, ["sap"]);
    }

    #[test]
    fn stage1_falls_back_to_smallest_ratios() {
        let table = [
            scored("a", 1.5, 0.1),
            scored("b", 1.2, 0.1),
            scored("c", 1.9, 0.1),
        ];
        let policy = SelectionPolicy {
            uc_threshold: 1.0,
            stage1_top_k: 2,
        };
        let out = stage1_filter(&table, &policy).unwrap();
        let names: Vec<&str> = out
            .iter()
            .map(|c| c.candidate.concept.name.as_str())
            .collect();
        assert_eq!(names, ["b", "a"]);
    }

    #[test]
    fn stage1_single_candidate_passes_through() {
        let out = stage1_filter(&[scored("solo", 5.0, 0.1)], &SelectionPolicy::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert!(stage1_filter(&[], &SelectionPolicy::default()).is_err());
    }

    #[test]
    fn stage1_breaks_uc_ties_by_ws_then_name() {
        let table = [
            scored("zeta", 0.5, 0.02),
            scored("echo", 0.5, 0.01),
            scored("alpha", 0.5, 0.02),
        ];
        let out = stage1_filter(&table, &SelectionPolicy::default()).unwrap();
        let names: Vec<&str> = out
            .iter()
            .map(|c| c.candidate.concept.name.as_str())
            .collect();
        assert_eq!(names, ["echo", "alpha", "zeta"]);
    }

    #[test]
    fn stage1_never_empty_and_order_survives_monotone_transforms() {
        let table = [
            scored("a", 3.0, 0.3),
            scored("b", 9.0, 0.1),
            scored("c", 4.5, 0.2),
        ];
        let policy = SelectionPolicy {
            uc_threshold: 1.0,
            stage1_top_k: 2,
        };
        let base: Vec<String> = stage1_filter(&table, &policy)
            .unwrap()
            .iter()
            .map(|c| c.normalized_name())
            .collect();
        assert!(!base.is_empty());
        // x -> 2x + 1 preserves order; threshold transformed the same way.
        let transformed: Vec<ScoredCandidate> = table
            .iter()
            .cloned()
            .map(|mut c| {
                c.uc.value = 2.0 * c.uc.value + 1.0;
                c
            })
            .collect();
        let policy2 = SelectionPolicy {
            uc_threshold: 2.0 * policy.uc_threshold + 1.0,
            stage1_top_k: 2,
        };
        let after: Vec<String> = stage1_filter(&transformed, &policy2)
            .unwrap()
            .iter()
            .map(|c| c.normalized_name())
            .collect();
        assert_eq!(base, after);
    }

    #[test]
    fn stage2_picks_argmax_with_lexicographic_ties() {
        let a = with_cos(scored("a", 1.0, 0.1), 1.4);
        let b = with_cos(scored("b", 1.0, 0.1), 1.1);
        assert_eq!(
            stage2_select(&[a.clone(), b])
                .unwrap()
                .candidate
                .concept
                .name,
            "a"
        );

        let tie_b = with_cos(scored("b", 1.0, 0.1), 1.4);
        assert_eq!(
            stage2_select(&[tie_b, a.clone()])
                .unwrap()
                .candidate
                .concept
                .name,
            "a"
        );

        assert_eq!(
            stage2_select(std::slice::from_ref(&a))
                .unwrap()
                .candidate
                .concept
                .name,
            "a"
        );
        assert!(stage2_select(&[]).is_err());
        assert!(matches!(
            stage2_select(&[scored("nocos", 1.0, 0.1)]),
            Err(MiningError::MissingCoherence(_))
        ));
    }

    #[test]
    fn retain_set_is_everything_but_the_anchor() {
        let candidates: Vec<SiblingCandidate> = ["dog", "wolf", "raccoon"]
            .iter()
            .map(|n| SiblingCandidate {
                concept: concept(n),
                sibling_ok: true,
                exclusive_ok: true,
                provenance: Provenance::Fixture,
            })
            .collect();
        let retain = build_retain_set(&candidates, &concept("dog")).unwrap();
        let names: Vec<&str> = retain.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["raccoon", "wolf"]);

        assert!(build_retain_set(&candidates, &concept("cat")).is_err());

        let only_anchor = &candidates[..1];
        assert!(build_retain_set(only_anchor, &concept("dog"))
            .unwrap()
            .is_empty());
    }
}

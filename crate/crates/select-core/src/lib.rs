//! Core algorithms for dynamic anchor selection and concept editing.
//!
//! The crate is IO-free and `no_std`-compatible (with `alloc`): everything
//! here is a pure function over injected [`backend::ScoringBackend`]
//! implementations, so results are reproducible across runs, platforms,
//! and thread counts. File handling, the HTTP backend, caching, and the
//! command-line surface live in the companion `select-cli` crate.
//!
//! Module map:
//! - [`concept`]: concepts, the semantic hierarchy, sibling-exclusive
//!   candidate validation;
//! - [`backend`]: the scoring trait plus deterministic mock backends;
//! - [`ngram`]: the add-one bigram model used for offline scoring;
//! - [`prompts`]: built-in prompt and template assets;
//! - [`generate`]: candidate and related-word generation over completions;
//! - [`activation`]: contextual activation scores (per-word activation,
//!   top-2 aggregate, anchor/target ratio, context raise ratio);
//! - [`coherence`]: perplexity-ratio coherence scoring;
//! - [`selection`]: the two-stage anchor selection and retain-set build;
//! - [`erasure`]: the closed-form weight-edit solver and its gradient
//!   oracle;
//! - [`causal`]: layer-swap tracing over abstract layered models;
//! - [`metrics`]: the harmonic-mean score and report aggregation.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

// Matrix types in the public erasure API come from nalgebra; re-export it
// so downstream crates use the same version.
pub use nalgebra;

pub mod activation;
pub mod backend;
pub mod causal;
pub mod coherence;
pub mod concept;
pub mod erasure;
pub mod generate;
pub mod hash;
pub mod metrics;
pub mod ngram;
pub mod prompts;
pub mod selection;

pub use activation::{context_raise_ratio, raise_ratio, uc_ratio, word_activation, ws_score};
pub use activation::{ActivationReport, CrrOutcome, UcScore};
pub use backend::{
    tokenize, BackendError, FixtureBackend, FixtureSpec, MaskTemplate, MaskedPrompt,
    PerplexityValue, Probability, ScoringBackend, UniformBackend,
};
pub use causal::{
    make_planted_model, normalize_contributions, trace_layers, ConceptScorer, ContributionVector,
    HashDirectionScorer, LayeredModel, PlantedFixture, TraceError,
};
pub use coherence::{cos_score, substitute, CoherenceError, CoherenceReport};
pub use concept::{
    normalize_name, validate_candidate, Category, Concept, ConceptError, ConceptHierarchy,
    Provenance, SiblingCandidate,
};
pub use erasure::{
    apply_edit, loss_eval, solve_closed_form, solve_gradient_oracle, EditError, EditProblem,
    EditSolution, EmbeddingProvider, MatrixFile,
};
pub use generate::{
    generate_candidates, generate_related_words, parse_llm_list, GenerationConfig, GenerationError,
    RelatedWord,
};
pub use metrics::{
    harmonic_mean_ho, summarize_run, ConceptRecord, HoValue, MetricsError, RunSummary,
};
pub use ngram::{train_ngram, NGramError, NGramModel};
pub use prompts::PromptLibrary;
pub use selection::{
    build_retain_set, mine_anchor, stage1_filter, stage2_select, Clock, MiningError, MiningResult,
    NullClock, PhaseTiming, ScoredCandidate, SelectionPolicy,
};

/// Denominator clamp shared by every ratio in the scoring pipeline.
/// Results produced through the clamp carry a degenerate flag instead of
/// silently propagating infinities.
pub const EPSILON: f64 = 1e-12;

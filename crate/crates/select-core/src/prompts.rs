//! Built-in prompt and template assets.
//!
//! Every text the pipeline sends to a backend ships as a versioned asset in
//! `assets/` (one candidate prompt per category, mask templates, context
//! probes, coherence prompts) so runs are auditable. All of them are
//! overridable at runtime through [`PromptLibrary`] setters; asset files use
//! the `{C}` slot for the concept (or, in context probes, the related word).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::backend::{BackendError, MaskTemplate, MaskedPrompt};
use crate::concept::Category;

const CANDIDATES_GENERAL: &str = include_str!("../assets/candidates_general.txt");
const CANDIDATES_INSTANCE: &str = include_str!("../assets/candidates_instance.txt");
const CANDIDATES_CELEBRITY: &str = include_str!("../assets/candidates_celebrity.txt");
const CANDIDATES_ARTIST_STYLE: &str = include_str!("../assets/candidates_artist_style.txt");
const CANDIDATES_NSFW: &str = include_str!("../assets/candidates_nsfw.txt");
const MASK_TEMPLATES: &str = include_str!("../assets/mask_templates.txt");
const CRR_PROBES: &str = include_str!("../assets/crr_probes.txt");
const NEUTRAL_PROBE: &str = include_str!("../assets/neutral_probe.txt");
const COHERENCE_GENERAL: &str = include_str!("../assets/coherence_general.txt");
const COHERENCE_INSTANCE: &str = include_str!("../assets/coherence_instance.txt");
const COHERENCE_CELEBRITY: &str = include_str!("../assets/coherence_celebrity.txt");
const COHERENCE_ARTIST_STYLE: &str = include_str!("../assets/coherence_artist_style.txt");
const COHERENCE_NSFW: &str = include_str!("../assets/coherence_nsfw.txt");

/// The two seed templates behind related-word generation. Both are always
/// queried, whatever else a configuration adds.
pub const RELATED_WORD_SEEDS: [&str; 2] = [
    "When people think of {C}, they think of [MASK].",
    "The most distinctive feature of a {C} is its [MASK].",
];

/// Instruction wrapped around an instantiated seed template before it is
/// sent as a completion prompt.
pub fn related_word_prompt(instantiated_seed: &str) -> String {
    let mut prompt = String::from(
        "Fill [MASK] with typical words. Reply with a comma-separated list of single words or short phrases only.\n",
    );
    prompt.push_str(instantiated_seed);
    prompt.push_str("\nWords:");
    prompt
}

fn parse_lines<T>(
    text: &str,
    build: impl Fn(&str) -> Result<T, BackendError>,
) -> Result<Vec<T>, BackendError> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(build)
        .collect()
}

/// The full set of prompt assets used by a run.
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    candidate_prompts: [String; 5],
    mask_templates: Vec<MaskTemplate>,
    crr_probes: Vec<MaskTemplate>,
    neutral_probe: MaskedPrompt,
    coherence_prompts: [Vec<String>; 5],
}

fn category_index(category: Category) -> usize {
    match category {
        Category::General => 0,
        Category::Instance => 1,
        Category::Celebrity => 2,
        Category::ArtistStyle => 3,
        Category::Nsfw => 4,
    }
}

impl Default for PromptLibrary {
    fn default() -> PromptLibrary {
        PromptLibrary {
            candidate_prompts: [
                CANDIDATES_GENERAL.to_string(),
                CANDIDATES_INSTANCE.to_string(),
                CANDIDATES_CELEBRITY.to_string(),
                CANDIDATES_ARTIST_STYLE.to_string(),
                CANDIDATES_NSFW.to_string(),
            ],
            mask_templates: parse_lines(MASK_TEMPLATES, MaskTemplate::new)
                .expect("built-in mask templates are valid"),
            crr_probes: parse_lines(CRR_PROBES, MaskTemplate::new)
                .expect("built-in probes are valid"),
            neutral_probe: MaskedPrompt::new(NEUTRAL_PROBE.trim())
                .expect("built-in neutral probe is valid"),
            coherence_prompts: [
                COHERENCE_GENERAL.lines().map(str::to_string).collect(),
                COHERENCE_INSTANCE.lines().map(str::to_string).collect(),
                COHERENCE_CELEBRITY.lines().map(str::to_string).collect(),
                COHERENCE_ARTIST_STYLE.lines().map(str::to_string).collect(),
                COHERENCE_NSFW.lines().map(str::to_string).collect(),
            ],
        }
    }
}

impl PromptLibrary {
    /// Candidate-generation prompt for a category, with the `{C}` slot
    /// still in place.
    pub fn candidate_prompt(&self, category: Category) -> &str {
        &self.candidate_prompts[category_index(category)]
    }

    pub fn set_candidate_prompt(&mut self, category: Category, text: &str) {
        self.candidate_prompts[category_index(category)] = text.to_string();
    }

    /// Mask templates for word-activation scoring (`{C}` = concept).
    pub fn mask_templates(&self) -> &[MaskTemplate] {
        &self.mask_templates
    }

    /// First `n` mask templates; clamped to what is available.
    pub fn mask_templates_take(&self, n: usize) -> &[MaskTemplate] {
        &self.mask_templates[..n.min(self.mask_templates.len())]
    }

    pub fn set_mask_templates(&mut self, templates: Vec<MaskTemplate>) {
        self.mask_templates = templates;
    }

    /// Context probes for the raise ratio (`{C}` = related word; the
    /// concept itself is scored at the mask).
    pub fn crr_probes(&self) -> &[MaskTemplate] {
        &self.crr_probes
    }

    pub fn set_crr_probes(&mut self, probes: Vec<MaskTemplate>) {
        self.crr_probes = probes;
    }

    /// The neutral context prompt the raise ratio compares against.
    pub fn neutral_probe(&self) -> &MaskedPrompt {
        &self.neutral_probe
    }

    pub fn set_neutral_probe(&mut self, probe: MaskedPrompt) {
        self.neutral_probe = probe;
    }

    /// Coherence prompt templates (`{C}` = concept) for a category.
    pub fn coherence_templates(&self, category: Category) -> &[String] {
        &self.coherence_prompts[category_index(category)]
    }

    pub fn set_coherence_templates(&mut self, category: Category, prompts: Vec<String>) {
        self.coherence_prompts[category_index(category)] = prompts;
    }

    /// Coherence prompts instantiated for a concept name.
    pub fn coherence_prompts_for(&self, category: Category, name: &str) -> Vec<String> {
        self.coherence_prompts[category_index(category)]
            .iter()
            .map(|t| t.replace(crate::backend::CONCEPT_SLOT, name))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_assets_parse() {
        let lib = PromptLibrary::default();
        assert_eq!(lib.mask_templates().len(), 6);
        assert_eq!(lib.crr_probes().len(), 3);
        for category in Category::ALL {
            assert!(lib.candidate_prompt(category).contains("{C}"));
            assert_eq!(lib.coherence_templates(category).len(), 10);
        }
    }

    #[test]
    fn coherence_prompts_substitute_the_slot() {
        let lib = PromptLibrary::default();
        let prompts = lib.coherence_prompts_for(Category::General, "cat");
        assert_eq!(prompts.len(), 10);
        assert!(prompts
            .iter()
            .all(|p| p.contains("cat") && !p.contains("{C}")));
    }

    #[test]
    fn take_clamps_to_available_templates() {
        let lib = PromptLibrary::default();
        assert_eq!(lib.mask_templates_take(4).len(), 4);
        assert_eq!(lib.mask_templates_take(100).len(), 6);
    }
}

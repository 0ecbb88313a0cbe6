//! Effective run configuration: built-in defaults, overlaid by the config
//! file, the environment, and finally command-line flags. The merged
//! snapshot is embedded in every run record (with the API key redacted).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use select_core::{
    normalize_name, Category, ConceptHierarchy, GenerationConfig, MaskTemplate, MaskedPrompt,
    PromptLibrary, SelectionPolicy,
};

use crate::CliError;

pub const ENV_BACKEND_URL: &str = "SELECT_BACKEND_URL";
pub const ENV_API_KEY: &str = "SELECT_API_KEY";
pub const ENV_CACHE_DIR: &str = "SELECT_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Ngram,
    Http,
    Fixture,
}

impl BackendKind {
    pub fn parse(text: &str) -> Result<BackendKind, CliError> {
        match text {
            "ngram" => Ok(BackendKind::Ngram),
            "http" => Ok(BackendKind::Http),
            "fixture" => Ok(BackendKind::Fixture),
            other => Err(CliError::Usage(format!(
                "unknown backend `{other}` (expected ngram, http, or fixture)"
            ))),
        }
    }
}

/// The config file schema. Every field is optional; anything absent falls
/// back to the built-in default, and command-line flags win over the file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub backend: Option<String>,
    pub corpus: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub uc_threshold: Option<f64>,
    pub top_k: Option<usize>,
    pub num_candidates: Option<usize>,
    pub num_related_words: Option<usize>,
    pub num_related_templates: Option<usize>,
    pub hierarchy: Option<PathBuf>,
    pub synonyms: Option<Vec<String>>,
    pub cache_dir: Option<PathBuf>,
    pub prompt_dir: Option<PathBuf>,
    pub base_url: Option<String>,
    pub api_key: Option<String>,
    pub model_id: Option<String>,
    pub timeout_ms: Option<u64>,
    pub max_retries: Option<u32>,
    pub perplexity_backend: Option<String>,
    pub perplexity_corpus: Option<PathBuf>,
    pub perplexity_fixture: Option<PathBuf>,
    pub perplexity_model_id: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            CliError::Pipeline(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&raw)
            .map_err(|e| CliError::Pipeline(format!("bad config {}: {e}", path.display())))
    }
}

/// The fully merged configuration a command runs with.
#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub backend: BackendKind,
    pub corpus: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    pub seed: u64,
    pub lambda: f64,
    pub uc_threshold: f64,
    pub top_k: usize,
    pub num_candidates: usize,
    pub num_related_words: usize,
    pub num_related_templates: usize,
    pub hierarchy: Option<PathBuf>,
    pub synonyms: Vec<String>,
    pub cache_dir: PathBuf,
    pub prompt_dir: Option<PathBuf>,
    pub base_url: Option<String>,
    #[serde(skip)]
    pub api_key: String,
    pub model_id: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub perplexity_backend: Option<BackendKind>,
    pub perplexity_corpus: Option<PathBuf>,
    pub perplexity_fixture: Option<PathBuf>,
    pub perplexity_model_id: Option<String>,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            backend: BackendKind::Ngram,
            corpus: None,
            fixture: None,
            seed: 0,
            lambda: 0.1,
            uc_threshold: 1.0,
            top_k: 3,
            num_candidates: 8,
            num_related_words: 8,
            num_related_templates: 6,
            hierarchy: None,
            synonyms: Vec::new(),
            cache_dir: PathBuf::from(".select-cache"),
            prompt_dir: None,
            base_url: None,
            api_key: String::new(),
            model_id: "default".into(),
            timeout_ms: 30_000,
            max_retries: 3,
            perplexity_backend: None,
            perplexity_corpus: None,
            perplexity_fixture: None,
            perplexity_model_id: None,
        }
    }
}

/// Flag-level overrides shared by the scoring commands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub backend: Option<String>,
    pub corpus: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub uc_threshold: Option<f64>,
    pub top_k: Option<usize>,
    pub num_candidates: Option<usize>,
    pub num_related_words: Option<usize>,
    pub num_related_templates: Option<usize>,
    pub hierarchy: Option<PathBuf>,
    pub synonyms: Option<String>,
    pub cache_dir: Option<PathBuf>,
}

impl Config {
    /// defaults <- config file <- environment <- flags.
    pub fn resolve(
        file: Option<&Path>,
        overrides: &Overrides,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Config, CliError> {
        let mut config = Config::default();
        if let Some(path) = file {
            let parsed = ConfigFile::load(path)?;
            if let Some(v) = parsed.backend {
                config.backend = BackendKind::parse(&v)?;
            }
            config.corpus = parsed.corpus.or(config.corpus);
            config.fixture = parsed.fixture.or(config.fixture);
            config.seed = parsed.seed.unwrap_or(config.seed);
            config.lambda = parsed.lambda.unwrap_or(config.lambda);
            config.uc_threshold = parsed.uc_threshold.unwrap_or(config.uc_threshold);
            config.top_k = parsed.top_k.unwrap_or(config.top_k);
            config.num_candidates = parsed.num_candidates.unwrap_or(config.num_candidates);
            config.num_related_words = parsed.num_related_words.unwrap_or(config.num_related_words);
            config.num_related_templates = parsed
                .num_related_templates
                .unwrap_or(config.num_related_templates);
            config.hierarchy = parsed.hierarchy.or(config.hierarchy);
            config.synonyms = parsed.synonyms.unwrap_or(config.synonyms);
            config.cache_dir = parsed.cache_dir.unwrap_or(config.cache_dir);
            config.prompt_dir = parsed.prompt_dir.or(config.prompt_dir);
            config.base_url = parsed.base_url.or(config.base_url);
            config.api_key = parsed.api_key.unwrap_or(config.api_key);
            config.model_id = parsed.model_id.unwrap_or(config.model_id);
            config.timeout_ms = parsed.timeout_ms.unwrap_or(config.timeout_ms);
            config.max_retries = parsed.max_retries.unwrap_or(config.max_retries);
            if let Some(v) = parsed.perplexity_backend {
                config.perplexity_backend = Some(BackendKind::parse(&v)?);
            }
            config.perplexity_corpus = parsed.perplexity_corpus.or(config.perplexity_corpus);
            config.perplexity_fixture = parsed.perplexity_fixture.or(config.perplexity_fixture);
            config.perplexity_model_id = parsed.perplexity_model_id.or(config.perplexity_model_id);
        }

        if let Some(url) = env(ENV_BACKEND_URL) {
            config.base_url = Some(url);
        }
        if let Some(key) = env(ENV_API_KEY) {
            config.api_key = key;
        }
        if let Some(dir) = env(ENV_CACHE_DIR) {
            config.cache_dir = PathBuf::from(dir);
        }

        if let Some(v) = &overrides.backend {
            config.backend = BackendKind::parse(v)?;
        }
        if let Some(v) = &overrides.corpus {
            config.corpus = Some(v.clone());
        }
        if let Some(v) = &overrides.fixture {
            config.fixture = Some(v.clone());
        }
        if let Some(v) = overrides.seed {
            config.seed = v;
        }
        if let Some(v) = overrides.lambda {
            config.lambda = v;
        }
        if let Some(v) = overrides.uc_threshold {
            config.uc_threshold = v;
        }
        if let Some(v) = overrides.top_k {
            config.top_k = v;
        }
        if let Some(v) = overrides.num_candidates {
            config.num_candidates = v;
        }
        if let Some(v) = overrides.num_related_words {
            config.num_related_words = v;
        }
        if let Some(v) = overrides.num_related_templates {
            config.num_related_templates = v;
        }
        if let Some(v) = &overrides.hierarchy {
            config.hierarchy = Some(v.clone());
        }
        if let Some(list) = &overrides.synonyms {
            config.synonyms = split_list(list);
        }
        if let Some(v) = &overrides.cache_dir {
            config.cache_dir = v.clone();
        }
        Ok(config)
    }

    /// Snapshot for run records: the full effective configuration, with
    /// the API key never serialized.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn generation_config(&self, category: Category) -> GenerationConfig {
        GenerationConfig {
            num_candidates: self.num_candidates,
            num_related_words: self.num_related_words,
            num_related_templates: self.num_related_templates,
            category,
        }
    }

    pub fn selection_policy(&self) -> SelectionPolicy {
        SelectionPolicy {
            uc_threshold: self.uc_threshold,
            stage1_top_k: self.top_k,
        }
    }

    pub fn synonym_set(&self) -> BTreeSet<String> {
        self.synonyms.iter().map(|s| normalize_name(s)).collect()
    }

    pub fn load_hierarchy(&self) -> Result<ConceptHierarchy, CliError> {
        match &self.hierarchy {
            None => Ok(ConceptHierarchy::empty()),
            Some(path) => {
                let raw = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Pipeline(format!("cannot read hierarchy {}: {e}", path.display()))
                })?;
                ConceptHierarchy::parse(&raw).map_err(|e| CliError::Pipeline(e.to_string()))
            }
        }
    }

    /// A second config for the perplexity role when one is bound
    /// separately from the mask-fill/completion model.
    pub fn perplexity_binding(&self) -> Option<Config> {
        let kind = self.perplexity_backend?;
        let mut secondary = self.clone();
        secondary.backend = kind;
        if let Some(corpus) = &self.perplexity_corpus {
            secondary.corpus = Some(corpus.clone());
        }
        if let Some(fixture) = &self.perplexity_fixture {
            secondary.fixture = Some(fixture.clone());
        }
        if let Some(model) = &self.perplexity_model_id {
            secondary.model_id = model.clone();
        }
        secondary.perplexity_backend = None;
        Some(secondary)
    }

    /// The built-in prompt assets, with any per-file overrides found in
    /// `prompt_dir` applied on top.
    pub fn prompt_library(&self) -> Result<PromptLibrary, CliError> {
        let mut library = PromptLibrary::default();
        let Some(dir) = &self.prompt_dir else {
            return Ok(library);
        };
        let read = |name: &str| -> Result<Option<String>, CliError> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(None);
            }
            std::fs::read_to_string(&path)
                .map(Some)
                .map_err(|e| CliError::Pipeline(format!("cannot read {}: {e}", path.display())))
        };
        for category in Category::ALL {
            if let Some(text) = read(&format!("candidates_{category}.txt"))? {
                library.set_candidate_prompt(category, &text);
            }
            if let Some(text) = read(&format!("coherence_{category}.txt"))? {
                library.set_coherence_templates(
                    category,
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(str::to_owned)
                        .collect(),
                );
            }
        }
        if let Some(text) = read("mask_templates.txt")? {
            library.set_mask_templates(parse_templates(&text)?);
        }
        if let Some(text) = read("crr_probes.txt")? {
            library.set_crr_probes(parse_templates(&text)?);
        }
        if let Some(text) = read("neutral_probe.txt")? {
            let probe =
                MaskedPrompt::new(text.trim()).map_err(|e| CliError::Pipeline(e.to_string()))?;
            library.set_neutral_probe(probe);
        }
        Ok(library)
    }
}

fn parse_templates(text: &str) -> Result<Vec<MaskTemplate>, CliError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| MaskTemplate::new(l).map_err(|e| CliError::Pipeline(e.to_string())))
        .collect()
}

pub fn split_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_env_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("config.json");
        std::fs::write(
            &file,
            r#"{"seed": 1, "cache_dir": "from-file", "base_url": "https://file.example"}"#,
        )
        .unwrap();
        let overrides = Overrides {
            seed: Some(3),
            ..Overrides::default()
        };
        let env = |key: &str| match key {
            ENV_CACHE_DIR => Some("from-env".to_string()),
            ENV_BACKEND_URL => Some("https://env.example".to_string()),
            _ => None,
        };
        let config = Config::resolve(Some(&file), &overrides, env).unwrap();
        assert_eq!(config.seed, 3);
        assert_eq!(config.cache_dir, PathBuf::from("from-env"));
        assert_eq!(config.base_url.as_deref(), Some("https://env.example"));
    }

    #[test]
    fn snapshot_never_contains_the_api_key() {
        let config = Config {
            api_key: "[EXAMPLE-KEY]".into(),
            ..Config::default()
        };
        let snapshot = serde_json::to_string(&config.snapshot()).unwrap();
        assert!(!snapshot.contains("EXAMPLE-KEY"));
        assert!(!snapshot.contains("api_key"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("config.json");
        std::fs::write(&file, r#"{"sede": 1}"#).unwrap();
        assert!(Config::resolve(Some(&file), &Overrides::default(), |_| None).is_err());
    }

    #[test]
    fn synonym_lists_split_and_normalize() {
        let overrides = Overrides {
            synonyms: Some("Kitty , house cat,".into()),
            ..Overrides::default()
        };
        let config = Config::resolve(None, &overrides, |_| None).unwrap();
        let set = config.synonym_set();
        assert!(set.contains("kitty"));
        assert!(set.contains("house cat"));
        assert_eq!(set.len(), 2);
    }
}

//! Command-line surface for the anchor-mining toolkit: argument parsing,
//! configuration, the HTTP scoring backend, the response cache, and
//! persistent run records.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on pipeline errors.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;

use select_core::{
    BackendError, Clock, FixtureBackend, MaskedPrompt, NGramModel, PerplexityValue, Probability,
    Provenance, ScoringBackend,
};

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod http;
pub mod runstore;

use http::{BackendStats, HttpScoringBackend, UreqTransport};

/// Command failures, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Pipeline(_) => 2,
        }
    }

    pub fn pipeline(e: impl std::fmt::Display) -> CliError {
        CliError::Pipeline(e.to_string())
    }
}

/// Wall clock for phase timings.
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_millis(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// The concrete backend a command runs with.
pub enum AnyBackend {
    Ngram(NGramModel),
    Fixture(FixtureBackend),
    Http(HttpScoringBackend<UreqTransport>),
}

impl AnyBackend {
    pub fn stats(&self) -> BackendStats {
        match self {
            AnyBackend::Http(backend) => backend.stats(),
            _ => BackendStats::default(),
        }
    }
}

impl ScoringBackend for AnyBackend {
    fn id(&self) -> String {
        match self {
            AnyBackend::Ngram(b) => b.id(),
            AnyBackend::Fixture(b) => b.id(),
            AnyBackend::Http(b) => b.id(),
        }
    }

    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        match self {
            AnyBackend::Ngram(b) => b.fill_probability(prompt, word),
            AnyBackend::Fixture(b) => b.fill_probability(prompt, word),
            AnyBackend::Http(b) => b.fill_probability(prompt, word),
        }
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        match self {
            AnyBackend::Ngram(b) => b.perplexity(text),
            AnyBackend::Fixture(b) => b.perplexity(text),
            AnyBackend::Http(b) => b.perplexity(text),
        }
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        match self {
            AnyBackend::Ngram(b) => b.complete(prompt),
            AnyBackend::Fixture(b) => b.complete(prompt),
            AnyBackend::Http(b) => b.complete(prompt),
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            AnyBackend::Ngram(b) => b.provenance(),
            AnyBackend::Fixture(b) => b.provenance(),
            AnyBackend::Http(_) => Provenance::LlmGenerated,
        }
    }
}

/// A backend pair: mask-fill and completion go to `primary`, perplexity to
/// `perplexity`. Both roles stay behind one interface but can be bound to
/// different models.
pub struct SplitBackend {
    pub primary: AnyBackend,
    pub perplexity: AnyBackend,
}

impl ScoringBackend for SplitBackend {
    fn id(&self) -> String {
        format!("{}+ppl:{}", self.primary.id(), self.perplexity.id())
    }

    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        self.primary.fill_probability(prompt, word)
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        self.perplexity.perplexity(text)
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        self.primary.complete(prompt)
    }

    fn provenance(&self) -> Provenance {
        self.primary.provenance()
    }
}

/// Either a single backend for every role or a split pair.
pub enum ResolvedBackend {
    Single(AnyBackend),
    Split(SplitBackend),
}

impl ResolvedBackend {
    pub fn stats(&self) -> BackendStats {
        match self {
            ResolvedBackend::Single(b) => b.stats(),
            ResolvedBackend::Split(pair) => {
                let a = pair.primary.stats();
                let b = pair.perplexity.stats();
                BackendStats {
                    cache_hits: a.cache_hits + b.cache_hits,
                    network_calls: a.network_calls + b.network_calls,
                    retries: a.retries + b.retries,
                }
            }
        }
    }
}

impl ScoringBackend for ResolvedBackend {
    fn id(&self) -> String {
        match self {
            ResolvedBackend::Single(b) => b.id(),
            ResolvedBackend::Split(b) => b.id(),
        }
    }

    fn fill_probability(
        &self,
        prompt: &MaskedPrompt,
        word: &str,
    ) -> Result<Probability, BackendError> {
        match self {
            ResolvedBackend::Single(b) => b.fill_probability(prompt, word),
            ResolvedBackend::Split(b) => b.fill_probability(prompt, word),
        }
    }

    fn perplexity(&self, text: &str) -> Result<PerplexityValue, BackendError> {
        match self {
            ResolvedBackend::Single(b) => b.perplexity(text),
            ResolvedBackend::Split(b) => b.perplexity(text),
        }
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        match self {
            ResolvedBackend::Single(b) => b.complete(prompt),
            ResolvedBackend::Split(b) => b.complete(prompt),
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            ResolvedBackend::Single(b) => b.provenance(),
            ResolvedBackend::Split(b) => b.provenance(),
        }
    }
}

/// Build the backend(s) named by the effective config, honoring a separate
/// perplexity binding when one is configured.
pub fn resolve_backend(config: &config::Config) -> Result<ResolvedBackend, CliError> {
    let primary = build_backend(config)?;
    match config.perplexity_binding() {
        None => Ok(ResolvedBackend::Single(primary)),
        Some(secondary_config) => {
            let perplexity = build_backend(&secondary_config)?;
            Ok(ResolvedBackend::Split(SplitBackend {
                primary,
                perplexity,
            }))
        }
    }
}

/// Build the scoring backend named by the effective config.
pub fn build_backend(config: &config::Config) -> Result<AnyBackend, CliError> {
    match config.backend {
        config::BackendKind::Ngram => {
            let path = config.corpus.as_ref().ok_or_else(|| {
                CliError::Usage("--backend ngram requires --corpus <file>".into())
            })?;
            let corpus = std::fs::read_to_string(path).map_err(|e| {
                CliError::Pipeline(format!("cannot read corpus {}: {e}", path.display()))
            })?;
            Ok(AnyBackend::Ngram(
                select_core::train_ngram(&corpus).map_err(CliError::pipeline)?,
            ))
        }
        config::BackendKind::Fixture => {
            let path = config.fixture.as_ref().ok_or_else(|| {
                CliError::Usage("--backend fixture requires --fixture <file>".into())
            })?;
            let raw = std::fs::read_to_string(path).map_err(|e| {
                CliError::Pipeline(format!("cannot read fixture {}: {e}", path.display()))
            })?;
            Ok(AnyBackend::Fixture(
                FixtureBackend::parse(&raw).map_err(CliError::pipeline)?,
            ))
        }
        config::BackendKind::Http => {
            let base_url = config.base_url.clone().ok_or_else(|| {
                CliError::Usage(format!(
                    "--backend http requires a base URL (config `base_url` or ${})",
                    config::ENV_BACKEND_URL
                ))
            })?;
            let remote = http::RemoteBackendConfig {
                base_url,
                api_key: config.api_key.clone(),
                timeout_ms: config.timeout_ms,
                max_retries: config.max_retries,
                model_id: config.model_id.clone(),
            };
            let cache = cache::ResponseCache::new(&config.cache_dir).map_err(CliError::pipeline)?;
            Ok(AnyBackend::Http(
                HttpScoringBackend::new(remote, UreqTransport::new(), cache)
                    .map_err(CliError::pipeline)?,
            ))
        }
    }
}

/// Parse and run. Streams are injected so tests can capture output.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(parsed) => parsed,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match commands::dispatch(parsed.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

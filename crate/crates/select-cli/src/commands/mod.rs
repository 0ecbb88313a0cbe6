//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use select_core::{Category, Concept};

use crate::cli::{BackendArgs, Command, ScoreCommand};
use crate::config::{Config, Overrides};
use crate::runstore::write_canonical;
use crate::CliError;

mod erase;
mod mine;
mod report;
mod score;
mod trace;

pub fn dispatch(
    command: Command,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Mine(args) => mine::run(args, out, err),
        Command::Score { what } => match what {
            ScoreCommand::Activation(args) => score::activation(args, out, err),
            ScoreCommand::Coherence(args) => score::coherence(args, out),
        },
        Command::Erase(args) => erase::run(args, out),
        Command::Trace(args) => trace::run(args, out),
        Command::Report(args) => report::run(args, out),
    }
}

pub(crate) fn parse_category(text: &str) -> Result<Category, CliError> {
    Category::parse(text).map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn parse_concept(name: &str, category: Category) -> Result<Concept, CliError> {
    Concept::new(name, category).map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn resolve_config(
    backend_args: &BackendArgs,
    extra: impl FnOnce(&mut Overrides),
) -> Result<Config, CliError> {
    let mut overrides = Overrides {
        backend: backend_args.backend.clone(),
        corpus: backend_args.corpus.clone(),
        fixture: backend_args.fixture.clone(),
        seed: backend_args.seed,
        cache_dir: backend_args.cache_dir.clone(),
        ..Overrides::default()
    };
    extra(&mut overrides);
    Config::resolve(backend_args.config.as_deref(), &overrides, |key| {
        std::env::var(key).ok()
    })
}

/// Canonical JSON to `--out` when given, stdout otherwise.
pub(crate) fn emit<T: serde::Serialize>(
    value: &T,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match out_path {
        Some(path) => write_canonical(value, path).map_err(CliError::pipeline),
        None => {
            let text = crate::runstore::canonical_json(value).map_err(CliError::pipeline)?;
            out.write_all(text.as_bytes()).map_err(CliError::pipeline)
        }
    }
}

pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Pipeline(format!("cannot read {}: {e}", path.display())))?;
    Ok(raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

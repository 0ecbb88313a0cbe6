//! `select mine`: the end-to-end anchor pipeline.

use std::io::Write;

use select_core::{mine_anchor, Clock, ScoringBackend};

use crate::cli::MineArgs;
use crate::runstore::RunRecord;
use crate::{resolve_backend, CliError, SystemClock};

pub fn run(args: MineArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let category = super::parse_category(&args.category)?;
    let config = super::resolve_config(&args.backend, |overrides| {
        overrides.uc_threshold = args.uc_threshold;
        overrides.top_k = args.top_k;
        overrides.hierarchy = args.hierarchy.clone();
        overrides.synonyms = args.synonyms.clone();
        overrides.num_candidates = args.num_candidates;
        overrides.num_related_words = args.num_related_words;
        overrides.num_related_templates = args.num_related_templates;
    })?;

    let target = super::parse_concept(&args.target, category)?;
    let backend = resolve_backend(&config)?;
    let library = config.prompt_library()?;
    let hierarchy = config.load_hierarchy()?;
    let synonyms = config.synonym_set();
    let clock = SystemClock;

    let result = mine_anchor(
        &target,
        &config.generation_config(category),
        &config.selection_policy(),
        &backend,
        &library,
        &hierarchy,
        &synonyms,
        &clock,
    )
    .map_err(CliError::pipeline)?;

    for phase in &result.timing {
        writeln!(err, "phase {}: {} ms", phase.phase, phase.millis).map_err(CliError::pipeline)?;
    }
    let retain: Vec<&str> = result.retain_set.iter().map(|c| c.name.as_str()).collect();
    writeln!(
        err,
        "optimal anchor: {}; retain set: [{}]",
        result.optimal_anchor.name,
        retain.join(", ")
    )
    .map_err(CliError::pipeline)?;

    let record = RunRecord::new(
        config.snapshot(),
        target,
        backend.id(),
        backend.stats(),
        result,
        clock.now_millis(),
    )
    .map_err(CliError::pipeline)?;

    super::emit(&record, args.out.as_deref(), out)
}

//! `select score activation|coherence`: single metric families.

use std::io::Write;

use serde::Serialize;

use select_core::activation::{activation_report, ActivationReport};
use select_core::{
    cos_score, generate_related_words, uc_ratio, CoherenceReport, RelatedWord, UcScore,
};

use crate::cli::{ActivationArgs, CoherenceArgs};
use crate::config::split_list;
use crate::{resolve_backend, CliError};

#[derive(Serialize)]
struct ActivationOutput {
    target: ActivationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    anchor: Option<ActivationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uc: Option<UcScore>,
}

pub fn activation(
    args: ActivationArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let category = super::parse_category(&args.category)?;
    let config = super::resolve_config(&args.backend, |_| {})?;
    let backend = resolve_backend(&config)?;
    let library = config.prompt_library()?;
    let target = super::parse_concept(&args.target, category)?;
    let generation = config.generation_config(category);

    let words: Vec<RelatedWord> = match &args.words {
        Some(list) => split_list(list)
            .into_iter()
            .map(|word| RelatedWord {
                word,
                source_template: "--words".into(),
            })
            .collect(),
        None => {
            generate_related_words(&target, &generation, &backend).map_err(CliError::pipeline)?
        }
    };
    if words.is_empty() {
        return Err(CliError::Usage("--words list is empty".into()));
    }

    let templates = library.mask_templates_take(generation.num_related_templates);
    let report = activation_report(
        &target,
        &words,
        templates,
        library.crr_probes(),
        library.neutral_probe(),
        &backend,
    )
    .map_err(CliError::pipeline)?;

    let mut output = ActivationOutput {
        target: report,
        anchor: None,
        uc: None,
    };
    // Raw probabilities are what the JSON carries; the x10^4 values in
    // the log are display-scaled for table reading.
    writeln!(
        err,
        "ws = {:.6e} (display x1e4: {:.4}); crr = {:.4} (rc {:.6e}, nc {:.6e}, display x1e4: {:.4} / {:.4})",
        output.target.ws,
        output.target.ws * 1e4,
        output.target.crr,
        output.target.related_context_score,
        output.target.neutral_context_score,
        output.target.related_context_score * 1e4,
        output.target.neutral_context_score * 1e4,
    )
    .map_err(CliError::pipeline)?;
    if let Some(anchor_name) = &args.anchor {
        let anchor = super::parse_concept(anchor_name, category)?;
        output.anchor = Some(
            activation_report(
                &anchor,
                &words,
                templates,
                library.crr_probes(),
                library.neutral_probe(),
                &backend,
            )
            .map_err(CliError::pipeline)?,
        );
        output.uc = Some(
            uc_ratio(&anchor, &target, &words, templates, &backend).map_err(CliError::pipeline)?,
        );
    }
    super::emit(&output, args.out.as_deref(), out)
}

#[derive(Serialize)]
struct CoherenceOutput {
    target: String,
    report: CoherenceReport,
}

pub fn coherence(args: CoherenceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let category = super::parse_category(&args.category)?;
    let config = super::resolve_config(&args.backend, |_| {})?;
    let backend = resolve_backend(&config)?;
    let library = config.prompt_library()?;
    let target = super::parse_concept(&args.target, category)?;
    let anchor = super::parse_concept(&args.anchor, category)?;

    let prompts = match &args.prompts {
        Some(path) => super::read_lines(path)?,
        None => library.coherence_prompts_for(category, &target.name),
    };
    let report = cos_score(&target, &anchor, &prompts, &backend).map_err(CliError::pipeline)?;
    super::emit(
        &CoherenceOutput {
            target: target.name,
            report,
        },
        args.out.as_deref(),
        out,
    )
}

//! `select trace`: layer-swap tracing on model files or planted fixtures.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use select_core::causal::{
    make_planted_model, trace_layers, ContributionVector, HashDirectionScorer, LayeredModel,
};
use select_core::{Category, Concept, PromptLibrary};

use crate::cli::TraceArgs;
use crate::CliError;

fn load_model(path: &Path) -> Result<LayeredModel, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Pipeline(format!("cannot read {}: {e}", path.display())))?;
    LayeredModel::parse(&raw).map_err(|e| CliError::Pipeline(format!("{}: {e}", path.display())))
}

fn default_prompts(concept: &Concept) -> Vec<String> {
    PromptLibrary::default().coherence_prompts_for(Category::General, &concept.name)
}

fn heatmap_csv(traces: &[ContributionVector]) -> String {
    let mut csv = String::from("concept");
    if let Some(first) = traces.first() {
        for layer in &first.per_layer {
            csv.push(',');
            csv.push_str(&layer.layer);
        }
    }
    csv.push('\n');
    for trace in traces {
        csv.push_str(&trace.concept.name);
        for layer in &trace.per_layer {
            csv.push_str(&format!(",{:.6}", layer.normalized));
        }
        csv.push('\n');
    }
    csv
}

pub fn run(args: TraceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let planted_mode = args.layers.is_some() || args.plant.is_some();
    let file_mode = args.base.is_some() || args.edited.is_some();
    if planted_mode && file_mode {
        return Err(CliError::Usage(
            "use either --base/--edited or --layers/--plant, not both".into(),
        ));
    }

    let traces: Vec<ContributionVector> = if planted_mode {
        let layers = args
            .layers
            .ok_or_else(|| CliError::Usage("planted mode requires --layers".into()))?;
        let planted: BTreeSet<usize> = match &args.plant {
            None => BTreeSet::new(),
            Some(list) => list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad layer index `{s}`")))
                })
                .collect::<Result<_, _>>()?,
        };
        let fixture =
            make_planted_model(layers, &planted, args.seed).map_err(CliError::pipeline)?;
        let prompts = match &args.prompts {
            Some(path) => super::read_lines(path)?,
            None => default_prompts(&fixture.concept),
        };
        vec![trace_layers(
            &fixture.base,
            &fixture.edited,
            &fixture.scorer,
            &fixture.concept,
            &prompts,
        )
        .map_err(CliError::pipeline)?]
    } else {
        let (Some(base_path), Some(edited_path)) = (&args.base, &args.edited) else {
            return Err(CliError::Usage(
                "file mode requires both --base and --edited".into(),
            ));
        };
        if args.concept.is_empty() {
            return Err(CliError::Usage(
                "file mode requires at least one --concept".into(),
            ));
        }
        let base = load_model(base_path)?;
        let edited = load_model(edited_path)?;
        let scorer = HashDirectionScorer {
            dimension: base.dimension(),
            seed: args.seed,
        };
        let mut traces = Vec::with_capacity(args.concept.len());
        for name in &args.concept {
            let concept = super::parse_concept(name, Category::General)?;
            let prompts = match &args.prompts {
                Some(path) => super::read_lines(path)?,
                None => default_prompts(&concept),
            };
            traces.push(
                trace_layers(&base, &edited, &scorer, &concept, &prompts)
                    .map_err(CliError::pipeline)?,
            );
        }
        traces
    };

    for trace in &traces {
        writeln!(out, "concept: {}", trace.concept.name).map_err(CliError::pipeline)?;
        for layer in &trace.per_layer {
            writeln!(
                out,
                "  {:<12} raw {:>12.6e}  normalized {:.4}",
                layer.layer, layer.raw, layer.normalized
            )
            .map_err(CliError::pipeline)?;
        }
    }

    if let Some(path) = &args.out {
        let csv = heatmap_csv(&traces);
        std::fs::write(path, csv)
            .map_err(|e| CliError::Pipeline(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

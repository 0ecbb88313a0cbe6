//! `select erase`: the closed-form weight edit.
//!
//! Matrix mode solves directly on matrix files (`--weights --c1 --cstar
//! [--c0]`). Name mode (`--target --anchor [--retain ...]`) builds the
//! matrices from an embedding provider: a name-to-vector file when given,
//! deterministic hash-synthetic unit vectors otherwise, so an edit is
//! runnable with no encoder at all.

use std::io::Write;
use std::path::Path;

use select_core::nalgebra::DMatrix;

use select_core::erasure::{solve_closed_form, EditProblem, EmbeddingProvider, MatrixFile};
use select_core::hash::unit_vector;

use crate::cli::EraseArgs;
use crate::config::{split_list, Config, Overrides};
use crate::CliError;

fn load_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Pipeline(format!("cannot read {}: {e}", path.display())))?;
    MatrixFile::parse(&raw)
        .and_then(|f| f.to_matrix())
        .map_err(|e| CliError::Pipeline(format!("{}: {e}", path.display())))
}

fn synthetic_weights(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let row = unit_vector(&format!("weights-row-{r}"), seed, cols);
        for (c, value) in row.iter().enumerate() {
            m[(r, c)] = *value;
        }
    }
    m
}

fn load_provider(args: &EraseArgs, seed: u64) -> Result<EmbeddingProvider, CliError> {
    match &args.embeddings {
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::Pipeline(format!("cannot read {}: {e}", path.display())))?;
            let map: std::collections::BTreeMap<String, Vec<f64>> = serde_json::from_str(&raw)
                .map_err(|e| CliError::Pipeline(format!("{}: {e}", path.display())))?;
            EmbeddingProvider::from_map(map).map_err(CliError::pipeline)
        }
        None => Ok(EmbeddingProvider::HashSynthetic {
            dimension: args.dim,
            seed,
        }),
    }
}

pub fn run(args: EraseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = Config::resolve(
        args.config.as_deref(),
        &Overrides {
            seed: args.seed,
            lambda: args.lambda,
            ..Overrides::default()
        },
        |key| std::env::var(key).ok(),
    )?;

    let matrix_mode = args.c1.is_some() || args.cstar.is_some() || args.c0.is_some();
    let problem = if matrix_mode {
        let (Some(c1_path), Some(cstar_path)) = (&args.c1, &args.cstar) else {
            return Err(CliError::Usage(
                "matrix mode requires both --c1 and --cstar".into(),
            ));
        };
        let Some(weights_path) = &args.weights else {
            return Err(CliError::Usage("matrix mode requires --weights".into()));
        };
        let weights = load_matrix(weights_path)?;
        let c1 = load_matrix(c1_path)?;
        let cstar = load_matrix(cstar_path)?;
        let c0 = match &args.c0 {
            Some(path) => load_matrix(path)?,
            None => DMatrix::zeros(c1.nrows(), 0),
        };
        EditProblem::new(weights, c1, cstar, c0, config.lambda).map_err(CliError::pipeline)?
    } else {
        let (Some(target), Some(anchor)) = (&args.target, &args.anchor) else {
            return Err(CliError::Usage(
                "name mode requires --target and --anchor (or use --c1/--cstar matrix files)"
                    .into(),
            ));
        };
        let provider = load_provider(&args, config.seed)?;
        let dim = provider.dimension();
        let weights = match &args.weights {
            Some(path) => load_matrix(path)?,
            None => synthetic_weights(args.out_dim, dim, config.seed),
        };
        let retain_names = args.retain.as_deref().map(split_list).unwrap_or_default();
        let retain_refs: Vec<&str> = retain_names.iter().map(String::as_str).collect();
        let c1 = provider.columns(&[target]).map_err(CliError::pipeline)?;
        let cstar = provider.columns(&[anchor]).map_err(CliError::pipeline)?;
        let c0 = provider.columns(&retain_refs).map_err(CliError::pipeline)?;
        EditProblem::new(weights, c1, cstar, c0, config.lambda).map_err(CliError::pipeline)?
    };

    let solution = solve_closed_form(&problem).map_err(CliError::pipeline)?;
    writeln!(
        out,
        "e1 = {:.6e}, e0 = {:.6e}, total = {:.6e}, conditioning = {:.6e}",
        solution.e1, solution.e0, solution.total_loss, solution.conditioning
    )
    .map_err(CliError::pipeline)?;
    if let Some(path) = &args.out {
        crate::runstore::write_canonical(&solution, path).map_err(CliError::pipeline)?;
    }
    Ok(())
}

//! `select report`: score tables of per-concept accuracies.
//!
//! Input records hold fractions in [0, 1]; pass `--percent` when the file
//! holds percentages. Printed and CSV tables are rendered in percent and
//! their headers say so; the JSON summary stays in fractions.

use std::io::Write;
use std::path::Path;

use select_core::{summarize_run, ConceptRecord, RunSummary};

use crate::cli::ReportArgs;
use crate::CliError;

fn scale_record(mut record: ConceptRecord, percent: bool) -> ConceptRecord {
    if percent {
        record.acc_e /= 100.0;
        record.acc_g /= 100.0;
        record.acc_s /= 100.0;
        record.acc_b /= 100.0;
    }
    record
}

fn read_records(path: &Path, percent: bool) -> Result<Vec<ConceptRecord>, CliError> {
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase();
    let records: Vec<ConceptRecord> = match extension.as_str() {
        "json" => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::Pipeline(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&raw)
                .map_err(|e| CliError::Pipeline(format!("{}: {e}", path.display())))?
        }
        "csv" => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_path(path)
                .map_err(|e| CliError::Pipeline(format!("{}: {e}", path.display())))?;
            let mut records = Vec::new();
            for row in reader.deserialize() {
                let record: ConceptRecord =
                    row.map_err(|e| CliError::Pipeline(format!("{}: {e}", path.display())))?;
                records.push(record);
            }
            records
        }
        other => {
            return Err(CliError::Usage(format!(
                "unsupported records format `.{other}` (expected .csv or .json)"
            )))
        }
    };
    Ok(records
        .into_iter()
        .map(|r| scale_record(r, percent))
        .collect())
}

fn percent_table(summary: &RunSummary) -> String {
    let mut table = String::from("concept,acc_e_pct,acc_g_pct,acc_s_pct,acc_b_pct,ho_pct\n");
    for row in &summary.rows {
        table.push_str(&format!(
            "{},{:.2},{:.2},{:.2},{:.2},{:.2}\n",
            row.record.concept,
            row.record.acc_e * 100.0,
            row.record.acc_g * 100.0,
            row.record.acc_s * 100.0,
            row.record.acc_b * 100.0,
            row.ho * 100.0,
        ));
    }
    table.push_str(&format!(
        "mean,{:.2},{:.2},{:.2},{:.2},{:.2}\n",
        summary.mean_acc_e * 100.0,
        summary.mean_acc_g * 100.0,
        summary.mean_acc_s * 100.0,
        summary.mean_acc_b * 100.0,
        summary.mean_ho * 100.0,
    ));
    table
}

pub fn run(args: ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let records = read_records(&args.input, args.percent)?;
    let summary = summarize_run(&records).map_err(CliError::pipeline)?;

    // Printed values are percent-scaled; the header marks it.
    writeln!(
        out,
        "{:<16} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "concept", "acc_e%", "acc_g%", "acc_s%", "acc_b%", "H_o%"
    )
    .map_err(CliError::pipeline)?;
    for row in &summary.rows {
        writeln!(
            out,
            "{:<16} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            row.record.concept,
            row.record.acc_e * 100.0,
            row.record.acc_g * 100.0,
            row.record.acc_s * 100.0,
            row.record.acc_b * 100.0,
            row.ho * 100.0,
        )
        .map_err(CliError::pipeline)?;
    }
    writeln!(
        out,
        "{:<16} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
        "mean",
        summary.mean_acc_e * 100.0,
        summary.mean_acc_g * 100.0,
        summary.mean_acc_s * 100.0,
        summary.mean_acc_b * 100.0,
        summary.mean_ho * 100.0,
    )
    .map_err(CliError::pipeline)?;

    if let Some(path) = &args.out {
        crate::runstore::write_canonical(&summary, path).map_err(CliError::pipeline)?;
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, percent_table(&summary))
            .map_err(|e| CliError::Pipeline(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

//! Erasure/retention metrics: the harmonic-mean overall score and run
//! summaries.
//!
//! The engine works in [0, 1] fractions throughout; tables that print
//! percentages are a rendering concern and flagged as such in the CLI
//! output headers.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("{field} = {value} is outside [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("no records to summarize")]
    NoRecords,
}

fn check_unit(field: &'static str, value: f64) -> Result<f64, MetricsError> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(MetricsError::OutOfRange { field, value });
    }
    Ok(value)
}

/// Per-concept accuracies, as fractions:
/// - `acc_e`: erase accuracy on the target (lower is better erasure),
/// - `acc_g`: accuracy on synonyms/variants (lower is better
///   generalization),
/// - `acc_s`: accuracy on unrelated concepts (higher is better
///   specificity),
/// - `acc_b`: accuracy on boundary concepts (higher is better retention;
///   reported but not part of the harmonic mean).
///
/// The optional clip-style scores are carried through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptRecord {
    pub concept: String,
    pub acc_e: f64,
    pub acc_g: f64,
    pub acc_s: f64,
    pub acc_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cs_b: Option<f64>,
}

impl ConceptRecord {
    pub fn validate(&self) -> Result<(), MetricsError> {
        check_unit("acc_e", self.acc_e)?;
        check_unit("acc_g", self.acc_g)?;
        check_unit("acc_s", self.acc_s)?;
        check_unit("acc_b", self.acc_b)?;
        Ok(())
    }
}

/// The overall score in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoValue(f64);

impl HoValue {
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Harmonic mean of erasure efficacy (1 - acc_e), specificity (acc_s), and
/// erasure generalization (1 - acc_g). Any zero component sends the whole
/// score to zero, which is the harmonic-mean limit.
pub fn harmonic_mean_ho(acc_e: f64, acc_s: f64, acc_g: f64) -> Result<HoValue, MetricsError> {
    check_unit("acc_e", acc_e)?;
    check_unit("acc_s", acc_s)?;
    check_unit("acc_g", acc_g)?;
    let components = [1.0 - acc_e, acc_s, 1.0 - acc_g];
    if components.contains(&0.0) {
        return Ok(HoValue(0.0));
    }
    let reciprocal_sum: f64 = components.iter().map(|c| 1.0 / c).sum();
    Ok(HoValue(3.0 / reciprocal_sum))
}

/// One summarized row: the input record plus its overall score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(flatten)]
    pub record: ConceptRecord,
    pub ho: f64,
}

/// Per-concept scores plus column means, in fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
    pub mean_acc_e: f64,
    pub mean_acc_g: f64,
    pub mean_acc_s: f64,
    pub mean_acc_b: f64,
    pub mean_ho: f64,
}

/// Score every record and compute column means. Rows keep input order.
pub fn summarize_run(records: &[ConceptRecord]) -> Result<RunSummary, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::NoRecords);
    }
    let mut rows = Vec::with_capacity(records.len());
    let mut sums = [0.0f64; 5];
    for record in records {
        record.validate()?;
        let ho = harmonic_mean_ho(record.acc_e, record.acc_s, record.acc_g)?.value();
        sums[0] += record.acc_e;
        sums[1] += record.acc_g;
        sums[2] += record.acc_s;
        sums[3] += record.acc_b;
        sums[4] += ho;
        rows.push(SummaryRow {
            record: record.clone(),
            ho,
        });
    }
    let n = records.len() as f64;
    Ok(RunSummary {
        rows,
        mean_acc_e: sums[0] / n,
        mean_acc_g: sums[1] / n,
        mean_acc_s: sums[2] / n,
        mean_acc_b: sums[3] / n,
        mean_ho: sums[4] / n,
    })
}

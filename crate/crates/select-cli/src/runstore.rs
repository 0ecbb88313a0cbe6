//! Persistent run records in canonical JSON.
//!
//! Canonical form means sorted object keys and shortest-round-trip number
//! formatting, so identical runs produce byte-identical files. Writes go
//! through a temp file and rename. The run id is a stable hash of the
//! effective config, the backend identity, and the target; wall-clock
//! metadata stays out of the canonical document.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use select_core::{Concept, MiningResult};

use crate::http::BackendStats;

#[derive(Debug, thiserror::Error)]
pub enum RunStoreError {
    #[error("run store io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run record serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Serialize any value to canonical JSON: object keys sorted, stable
/// float formatting, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let tree = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

/// Stable run identity: hash of (config snapshot, backend id, target).
pub fn run_id(
    config_snapshot: &serde_json::Value,
    backend_id: &str,
    target: &Concept,
) -> Result<String, serde_json::Error> {
    let mut hasher = Sha256::new();
    hasher.update(canonical_json(config_snapshot)?.as_bytes());
    hasher.update([0u8]);
    hasher.update(backend_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(canonical_json(target)?.as_bytes());
    let digest = hasher.finalize();
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// One mining run: identity, provenance, and the result itself. The
/// timestamp is log metadata and excluded from the canonical document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config: serde_json::Value,
    pub target: Concept,
    pub backend_id: String,
    pub cache_stats: BackendStats,
    pub result: MiningResult,
    #[serde(skip)]
    pub timestamp_ms: u64,
}

impl RunRecord {
    pub fn new(
        config: serde_json::Value,
        target: Concept,
        backend_id: String,
        cache_stats: BackendStats,
        result: MiningResult,
        timestamp_ms: u64,
    ) -> Result<RunRecord, serde_json::Error> {
        let run_id = run_id(&config, &backend_id, &target)?;
        Ok(RunRecord {
            run_id,
            config,
            target,
            backend_id,
            cache_stats,
            result,
            timestamp_ms,
        })
    }
}

/// Atomic canonical write: temp file in the same directory, then rename.
pub fn write_canonical<T: Serialize>(value: &T, path: &Path) -> Result<(), RunStoreError> {
    let text = canonical_json(value)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|source| RunStoreError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|source| RunStoreError::Io {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| RunStoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a run record into a directory, named by its run id. Returns the
/// file path.
pub fn write_run_record(record: &RunRecord, dir: &Path) -> Result<PathBuf, RunStoreError> {
    let path = dir.join(format!("{}.json", record.run_id));
    write_canonical(record, &path)?;
    Ok(path)
}

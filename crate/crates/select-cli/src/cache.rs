//! Write-once response cache: one JSON file per entry, named by the key
//! hash. Entries are immutable; a key is never rebound to a different
//! value, and tampered files are detected by recomputing the key from the
//! stored payload.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cache entry corrupt at {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("conflicting cache put for key {key}: entry already holds a different value")]
    Conflict { key: String },
}

/// Stable cache key for a (backend id, request payload) pair.
pub fn cache_key(backend_id: &str, payload: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(backend_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(payload.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    backend_id: String,
    payload: String,
    response: String,
    created_at_ms: u64,
}

/// Directory-backed cache. Concurrent readers are safe; writers serialize
/// through atomic link-into-place so a key is bound exactly once.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: &Path) -> Result<ResponseCache, CacheError> {
        fs::create_dir_all(dir).map_err(|source| CacheError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(ResponseCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Look a key up. Side-effect free. Corrupt entries are reported, not
    /// silently treated as misses.
    pub fn get(&self, backend_id: &str, payload: &str) -> Result<Option<String>, CacheError> {
        let key = cache_key(backend_id, payload);
        let path = self.entry_path(&key);
        let raw = match fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(source) => return Err(CacheError::Io { path, source }),
        };
        let entry: CacheEntry = serde_json::from_str(&raw).map_err(|e| CacheError::Corrupt {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if cache_key(&entry.backend_id, &entry.payload) != key {
            return Err(CacheError::Corrupt {
                path,
                reason: "stored payload does not hash to the entry key".into(),
            });
        }
        Ok(Some(entry.response))
    }

    /// Bind a key to a response. Idempotent for identical values;
    /// rebinding to a different value is a conflict error.
    pub fn put(&self, backend_id: &str, payload: &str, response: &str) -> Result<(), CacheError> {
        let key = cache_key(backend_id, payload);
        let path = self.entry_path(&key);
        if let Some(existing) = self.get(backend_id, payload)? {
            if existing == response {
                return Ok(());
            }
            return Err(CacheError::Conflict { key });
        }
        let entry = CacheEntry {
            backend_id: backend_id.to_owned(),
            payload: payload.to_owned(),
            response: response.to_owned(),
            created_at_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
        };
        let body = serde_json::to_string_pretty(&entry).expect("cache entry serializes");
        static TMP_COUNTER: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
        let unique = TMP_COUNTER.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let tmp = self
            .dir
            .join(format!(".{key}.tmp-{}-{unique}", std::process::id()));
        fs::write(&tmp, body).map_err(|source| CacheError::Io {
            path: tmp.clone(),
            source,
        })?;
        // Link-into-place never overwrites: the first writer wins and
        // losers fall back to the conflict check.
        match fs::hard_link(&tmp, &path) {
            Ok(()) => {
                let _ = fs::remove_file(&tmp);
                Ok(())
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                let _ = fs::remove_file(&tmp);
                match self.get(backend_id, payload)? {
                    Some(existing) if existing == response => Ok(()),
                    _ => Err(CacheError::Conflict { key }),
                }
            }
            Err(source) => {
                let _ = fs::remove_file(&tmp);
                Err(CacheError::Io { path, source })
            }
        }
    }
}

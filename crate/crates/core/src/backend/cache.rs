//! On-disk response cache keyed by prompt fingerprint and backend id.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, Explanation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub prompt_fingerprint: String,
    pub backend_id: String,
    pub text: String,
    pub created_at: Option<DateTime<Utc>>,
}

impl CacheEntry {
    pub fn into_explanation(self) -> Explanation {
        Explanation {
            text: self.text,
            backend_id: self.backend_id,
            prompt_fingerprint: self.prompt_fingerprint,
            created_at: self.created_at,
            attempt_count: 0,
        }
    }
}

impl From<&Explanation> for CacheEntry {
    fn from(e: &Explanation) -> Self {
        CacheEntry {
            prompt_fingerprint: e.prompt_fingerprint.clone(),
            backend_id: e.backend_id.clone(),
            text: e.text.clone(),
            created_at: e.created_at,
        }
    }
}

/// One JSON file per entry. Writes go through a temp file and a rename,
/// serialized by a lock so concurrent batch workers never interleave.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, BackendError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| BackendError::Cache(format!("creating {}: {e}", dir.display())))?;
        Ok(ResponseCache {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, prompt_fingerprint: &str, backend_id: &str) -> PathBuf {
        let mut hasher = Sha256::new();
        hasher.update(prompt_fingerprint.as_bytes());
        hasher.update([0u8]);
        hasher.update(backend_id.as_bytes());
        self.dir
            .join(format!("{}.json", hex::encode(hasher.finalize())))
    }

    /// Unreadable or mismatched entries count as misses.
    pub fn get(&self, prompt_fingerprint: &str, backend_id: &str) -> Option<CacheEntry> {
        let raw = fs::read_to_string(self.entry_path(prompt_fingerprint, backend_id)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&raw).ok()?;
        (entry.prompt_fingerprint == prompt_fingerprint && entry.backend_id == backend_id)
            .then_some(entry)
    }

    pub fn put(&self, entry: &CacheEntry) -> Result<(), BackendError> {
        let path = self.entry_path(&entry.prompt_fingerprint, &entry.backend_id);
        let json =
            serde_json::to_string_pretty(entry).map_err(|e| BackendError::Cache(e.to_string()))?;
        let _guard = self
            .write_lock
            .lock()
            .map_err(|_| BackendError::Cache("lock poisoned".into()))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, json)
            .map_err(|e| BackendError::Cache(format!("writing {}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path)
            .map_err(|e| BackendError::Cache(format!("renaming {}: {e}", path.display())))?;
        Ok(())
    }
}

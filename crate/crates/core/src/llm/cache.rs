//! Content-addressed response cache: one file per entry under
//! `<dir>/<first-2-hex>/<digest>.entry`, written atomically via rename so
//! concurrent writers never expose partial entries.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{canonical_request_json, ChatRequest, ChatResponse};

static TMP_NONCE: AtomicU64 = AtomicU64::new(0);

/// A persisted exchange: the request canonical form plus response content
/// and token metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: String,
    pub content: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub model: String,
    pub created_unix: u64,
}

#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ResponseCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, digest: &str) -> PathBuf {
        let shard = &digest[..2.min(digest.len())];
        self.dir.join(shard).join(format!("{digest}.entry"))
    }

    pub fn get(&self, digest: &str) -> io::Result<Option<CacheEntry>> {
        let path = self.entry_path(digest);
        match fs::read_to_string(&path) {
            Ok(text) => match serde_json::from_str(&text) {
                Ok(entry) => Ok(Some(entry)),
                // A corrupt entry is treated as absent; it will be rewritten.
                Err(_) => Ok(None),
            },
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn put(&self, digest: &str, req: &ChatRequest, resp: &ChatResponse) -> io::Result<()> {
        let entry = CacheEntry {
            request: canonical_request_json(req),
            content: resp.content.clone(),
            prompt_tokens: resp.prompt_tokens,
            completion_tokens: resp.completion_tokens,
            model: req.model.clone(),
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let path = self.entry_path(digest);
        let parent = path.parent().expect("entry path has a shard directory");
        fs::create_dir_all(parent)?;
        let nonce = TMP_NONCE.fetch_add(1, Ordering::Relaxed);
        let tmp = parent.join(format!(".tmp-{digest}-{}-{nonce}", std::process::id()));
        fs::write(
            &tmp,
            serde_json::to_string(&entry).expect("entry serializes"),
        )?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

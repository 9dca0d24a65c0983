//! On-disk cache of pipeline stages, keyed by (geometry hash, stage, order).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub const ENV_VAR: &str = "THETAFORGE_CACHE";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    pub geometry_hash: String,
    pub stage: String,
    pub order: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    geometry: String,
    stage: String,
    order: u32,
    data: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// `--cache-dir`, then `$THETAFORGE_CACHE`, then a directory under the
    /// system temp dir.
    pub fn locate(explicit: Option<PathBuf>) -> Self {
        let dir = explicit
            .or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| std::env::temp_dir().join("thetaforge-cache"));
        Cache { dir }
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}-{}-o{}.json", key.geometry_hash, key.stage, key.order))
    }

    /// `None` on a miss. Unreadable or mismatched files are reported and
    /// treated as misses.
    pub fn load(&self, key: &CacheKey) -> Option<BTreeMap<String, String>> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                eprintln!("warning: cannot read cache file {}: {e}; recomputing", path.display());
                return None;
            }
        };
        match serde_json::from_str::<Entry>(&text) {
            Ok(entry)
                if entry.geometry == key.geometry_hash && entry.stage == key.stage && entry.order == key.order =>
            {
                Some(entry.data)
            }
            Ok(_) => {
                eprintln!("warning: cache file {} has a mismatched key; recomputing", path.display());
                None
            }
            Err(e) => {
                eprintln!("warning: ignoring corrupted cache file {}: {e}; recomputing", path.display());
                None
            }
        }
    }

    /// Write-temp-then-rename. Failures only warn: the cache is optional.
    pub fn store(&self, key: &CacheKey, data: &BTreeMap<String, String>) {
        let entry = Entry {
            geometry: key.geometry_hash.clone(),
            stage: key.stage.clone(),
            order: key.order,
            data: data.clone(),
        };
        let path = self.path(key);
        let result = (|| -> std::io::Result<()> {
            fs::create_dir_all(&self.dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
            tmp.write_all(serde_json::to_string(&entry)?.as_bytes())?;
            tmp.persist(&path).map_err(|e| e.error)?;
            Ok(())
        })();
        if let Err(e) = result {
            eprintln!("warning: could not write cache file {}: {e}", path.display());
        }
    }
}

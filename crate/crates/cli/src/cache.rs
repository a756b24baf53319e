//! Content-addressed result cache: one directory per job digest holding the artifacts
//! and a `record.json` with their checksums.

use crate::config::sha256_hex;
use crate::output::atomic_write;
use pplab::potential::{ScalarField, MAGIC};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const RECORD: &str = "record.json";
pub const DEFAULT_DIR: &str = ".pplab-cache";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub hash: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub artifacts: Vec<ArtifactEntry>,
    /// What the job printed.
    pub stdout: String,
    /// One summary row per verdict.
    pub verdicts: Vec<String>,
    /// A verdict failed; replayed as exit code 1.
    pub failed: bool,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Debug)]
pub enum Lookup {
    Hit {
        record: ResultRecord,
        files: Vec<(String, Vec<u8>)>,
    },
    Miss {
        warning: Option<String>,
    },
}

pub fn job_dir(cache: &Path, hash: &str) -> PathBuf {
    cache.join(hash)
}

/// A hit requires the record, a matching digest, and every artifact present with its
/// recorded checksum (binary fields must also decode). Anything else is a miss; damage
/// is reported as a warning.
pub fn cache_lookup(cache: &Path, hash: &str) -> Lookup {
    let dir = job_dir(cache, hash);
    let Ok(text) = std::fs::read_to_string(dir.join(RECORD)) else {
        return Lookup::Miss { warning: None };
    };
    let warn = |msg: String| Lookup::Miss {
        warning: Some(format!("cache entry {hash}: {msg}; recomputing")),
    };
    let record: ResultRecord = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => return warn(format!("unreadable record ({e})")),
    };
    if record.hash != hash {
        return warn("digest mismatch".into());
    }
    let mut files = Vec::new();
    for a in &record.artifacts {
        let bytes = match std::fs::read(dir.join(&a.name)) {
            Ok(b) => b,
            Err(e) => return warn(format!("missing {} ({e})", a.name)),
        };
        if sha256_hex(&bytes) != a.sha256 {
            return warn(format!("checksum mismatch for {}", a.name));
        }
        if bytes.starts_with(MAGIC) {
            if let Err(e) = ScalarField::from_bytes(&bytes) {
                return warn(format!("corrupt field {} ({e})", a.name));
            }
        }
        files.push((a.name.clone(), bytes));
    }
    Lookup::Hit { record, files }
}

/// Writes the artifacts first and the record last, so a partial entry is never a hit.
pub fn cache_store(cache: &Path, record: &ResultRecord, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    let dir = job_dir(cache, &record.hash);
    std::fs::create_dir_all(&dir)?;
    for (name, bytes) in files {
        atomic_write(&dir.join(name), bytes)?;
    }
    let json = serde_json::to_vec_pretty(record).expect("record serializes");
    atomic_write(&dir.join(RECORD), &json)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(hash: &str, files: &[(String, Vec<u8>)]) -> ResultRecord {
        ResultRecord {
            hash: hash.into(),
            started_unix: 0,
            finished_unix: 0,
            artifacts: files
                .iter()
                .map(|(n, b)| ArtifactEntry {
                    name: n.clone(),
                    sha256: sha256_hex(b),
                })
                .collect(),
            stdout: "ok\n".into(),
            verdicts: vec![],
            failed: false,
        }
    }

    #[test]
    fn store_then_hit_then_damage() {
        let tmp = tempfile::tempdir().unwrap();
        let files = vec![("a.csv".to_string(), b"x,y\n1,2\n".to_vec())];
        cache_store(tmp.path(), &record("abc", &files), &files).unwrap();
        assert!(matches!(cache_lookup(tmp.path(), "abc"), Lookup::Hit { .. }));
        assert!(matches!(cache_lookup(tmp.path(), "other"), Lookup::Miss { warning: None }));
        std::fs::write(tmp.path().join("abc").join("a.csv"), b"x,y\n").unwrap();
        assert!(matches!(cache_lookup(tmp.path(), "abc"), Lookup::Miss { warning: Some(_) }));
    }
}

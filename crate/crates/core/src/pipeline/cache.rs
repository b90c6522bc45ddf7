//! Content-addressed stage outputs.
//!
//! A stage key is the SHA-256 of the stage name, the tool version and every
//! input the stage reads (upstream keys, file digests, settings). Outputs are
//! stored as `<dir>/<stage>-<key>.json`; a later run with the same key loads
//! the file instead of recomputing.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    let mut file = File::open(path)?;
    io::copy(&mut file, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Length-prefixed so that `["ab", "c"]` and `["a", "bc"]` differ.
pub fn stage_key(stage: &str, parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in [stage.as_bytes(), env!("CARGO_PKG_VERSION").as_bytes()].into_iter().chain(parts.iter().copied()) {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone)]
pub struct StageCache {
    dir: PathBuf,
}

impl StageCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn path(&self, stage: &str, key: &str) -> PathBuf {
        self.dir.join(format!("{stage}-{key}.json"))
    }

    /// A stored output, or `None` when absent or unreadable.
    pub fn load<T: DeserializeOwned>(&self, stage: &str, key: &str) -> Option<T> {
        let path = self.path(stage, key);
        let file = File::open(&path).ok()?;
        match serde_json::from_reader(BufReader::new(file)) {
            Ok(v) => Some(v),
            Err(e) => {
                warn!("ignoring unreadable cache entry {}: {e}", path.display());
                None
            }
        }
    }

    /// Writes through a temporary file so an interrupted run never leaves a
    /// truncated entry behind.
    pub fn store<T: Serialize>(&self, stage: &str, key: &str, value: &T) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(stage, key);
        let tmp = path.with_extension("json.tmp");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut out, value)?;
            out.flush()?;
        }
        fs::rename(tmp, path)
    }
}

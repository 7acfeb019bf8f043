//! Content-addressed store for intermediate results.
//!
//! Keys hash the source recording's bytes together with the operation name
//! and its canonical parameter text, so entries survive file moves and never
//! depend on timestamps. Entries are published with write-then-rename and
//! evicted least-recently-used once the store exceeds its byte budget.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::csi::Spectrogram;
use crate::error::{Error, Result};
use crate::io::{decode_spectrogram, encode_spectrogram, write_atomic};

const SPEC_EXT: &str = "rfs";
const BLOB_EXT: &str = "json";

#[derive(Debug, Default)]
struct LruIndex {
    tick: u64,
    entries: HashMap<String, (u64, u64)>, // file name -> (bytes, last use)
    total: u64,
}

impl LruIndex {
    fn touch(&mut self, name: &str) {
        self.tick += 1;
        if let Some(e) = self.entries.get_mut(name) {
            e.1 = self.tick;
        }
    }

    fn insert(&mut self, name: String, bytes: u64) {
        self.tick += 1;
        if let Some((old, _)) = self.entries.insert(name, (bytes, self.tick)) {
            self.total -= old;
        }
        self.total += bytes;
    }

    fn remove(&mut self, name: &str) {
        if let Some((bytes, _)) = self.entries.remove(name) {
            self.total -= bytes;
        }
    }

    fn oldest_except(&self, keep: &str) -> Option<String> {
        self.entries
            .iter()
            .filter(|(n, _)| n.as_str() != keep)
            .min_by(|a, b| a.1 .1.cmp(&b.1 .1).then_with(|| a.0.cmp(b.0)))
            .map(|(n, _)| n.clone())
    }
}

#[derive(Debug)]
pub struct CacheStore {
    dir: PathBuf,
    max_bytes: u64,
    index: Mutex<LruIndex>,
}

/// Hex digest identifying a recording by content.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl CacheStore {
    /// Opens (creating if needed) a store rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>, max_bytes: u64) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
        let mut found = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io_at(&dir, e))? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') {
                continue;
            }
            let meta = entry.metadata()?;
            if meta.is_file() {
                found.push((meta.modified().ok(), name, meta.len()));
            }
        }
        // seed recency from modification order; names break ties
        found.sort();
        let mut index = LruIndex::default();
        for (_, name, len) in found {
            index.insert(name, len);
        }
        Ok(Self {
            dir,
            max_bytes,
            index: Mutex::new(index),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(source_hash: &str, op: &str, params: &str) -> String {
        let mut h = Sha256::new();
        for part in [source_hash, op, params] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn total_bytes(&self) -> u64 {
        self.index.lock().unwrap().total
    }

    pub fn len(&self) -> usize {
        self.index.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn path_of(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn get_bytes(&self, key: &str, ext: &str) -> Result<Option<Vec<u8>>> {
        let name = format!("{key}.{ext}");
        let path = self.path_of(&name);
        match fs::read(&path) {
            Ok(bytes) => {
                self.index.lock().unwrap().touch(&name);
                Ok(Some(bytes))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                self.index.lock().unwrap().remove(&name);
                Ok(None)
            }
            Err(e) => Err(Error::io_at(path, e)),
        }
    }

    fn put_bytes(&self, key: &str, ext: &str, bytes: &[u8]) -> Result<()> {
        let name = format!("{key}.{ext}");
        write_atomic(&self.path_of(&name), bytes)?;
        let mut index = self.index.lock().unwrap();
        index.insert(name.clone(), bytes.len() as u64);
        while index.total > self.max_bytes {
            let Some(victim) = index.oldest_except(&name) else {
                break;
            };
            let _ = fs::remove_file(self.path_of(&victim));
            index.remove(&victim);
        }
        Ok(())
    }

    fn invalidate(&self, key: &str, ext: &str, detail: String) -> Error {
        let name = format!("{key}.{ext}");
        let _ = fs::remove_file(self.path_of(&name));
        self.index.lock().unwrap().remove(&name);
        Error::Cache {
            key: key.to_string(),
            detail,
        }
    }

    /// Looks up a spectrogram; an unreadable entry is deleted and reported.
    pub fn get_spectrogram(&self, key: &str) -> Result<Option<Spectrogram>> {
        match self.get_bytes(key, SPEC_EXT)? {
            None => Ok(None),
            Some(bytes) => decode_spectrogram(&bytes)
                .map(Some)
                .map_err(|e| self.invalidate(key, SPEC_EXT, e.to_string())),
        }
    }

    pub fn put_spectrogram(&self, key: &str, spec: &Spectrogram) -> Result<()> {
        let mut buf = Vec::new();
        encode_spectrogram(spec, &mut buf);
        self.put_bytes(key, SPEC_EXT, &buf)
    }

    pub fn get_json<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.get_bytes(key, BLOB_EXT)? {
            None => Ok(None),
            Some(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| self.invalidate(key, BLOB_EXT, e.to_string())),
        }
    }

    pub fn put_json<T: serde::Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let bytes = serde_json::to_vec(value).expect("cache blob serializes");
        self.put_bytes(key, BLOB_EXT, &bytes)
    }
}

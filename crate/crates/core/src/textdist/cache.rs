//! On-disk cache of per-dialogue WMD matrices.
//!
//! File layout (little-endian): 8-byte magic `DYWMD\0\0\0`, `u32` format
//! version, `u32` side length `n`, then `n * n` `f64` values in row-major
//! order. Files are named by the hex SHA-256 of the cache key.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CACHE_ENV: &str = "DYAD_ALIGN_CACHE";
const MAGIC: &[u8; 8] = b"DYWMD\0\0\0";
const VERSION: u32 = 1;

/// Square symmetric matrix of distances between a dialogue's utterances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.data.len() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(Error::Cache("not a WMD cache file".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::Cache(format!("unsupported cache version {version}")));
        }
        let n = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let body = &bytes[16..];
        if body.len() != n * n * 8 {
            return Err(Error::Cache(format!(
                "expected {} payload bytes, found {}",
                n * n * 8,
                body.len()
            )));
        }
        let data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(DistanceMatrix { n, data })
    }
}

#[derive(Debug, Clone)]
pub struct WmdCache {
    dir: PathBuf,
}

impl WmdCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        WmdCache { dir: dir.into() }
    }

    /// Cache rooted at `$DYAD_ALIGN_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(WmdCache::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex key over the store fingerprint and the ordered utterance texts.
    pub fn key(store_fingerprint: &str, texts: &[&str]) -> String {
        let mut h = Sha256::new();
        h.update(store_fingerprint.as_bytes());
        for t in texts {
            h.update((t.len() as u64).to_le_bytes());
            h.update(t.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.wmd"))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, key: &str) -> Option<DistanceMatrix> {
        let bytes = fs::read(self.path(key)).ok()?;
        match DistanceMatrix::from_bytes(&bytes) {
            Ok(m) => Some(m),
            Err(e) => {
                log::warn!("ignoring cache entry {key}: {e}");
                None
            }
        }
    }

    pub fn put(&self, key: &str, matrix: &DistanceMatrix) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path(key);
        let tmp = self.dir.join(format!("{key}.wmd.tmp{}", std::process::id()));
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&matrix.to_bytes()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_round_trip() {
        let mut m = DistanceMatrix::zeros(3);
        m.set_symmetric(0, 2, 1.25);
        m.set_symmetric(1, 2, 0.5);
        let back = DistanceMatrix::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get(2, 0), 1.25);
    }

    #[test]
    fn corrupt_bytes_rejected() {
        let m = DistanceMatrix::zeros(2);
        let mut b = m.to_bytes();
        b[8] = 9;
        assert!(DistanceMatrix::from_bytes(&b).is_err());
        let mut short = m.to_bytes();
        short.pop();
        assert!(DistanceMatrix::from_bytes(&short).is_err());
        assert!(DistanceMatrix::from_bytes(b"nope").is_err());
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = WmdCache::new(dir.path().join("nested"));
        let key = WmdCache::key("fp", &["a", "b"]);
        assert!(cache.get(&key).is_none());
        let mut m = DistanceMatrix::zeros(2);
        m.set_symmetric(0, 1, 0.75);
        cache.put(&key, &m).unwrap();
        assert_eq!(cache.get(&key), Some(m));
        assert_ne!(key, WmdCache::key("fp", &["ab", ""]));
    }
}

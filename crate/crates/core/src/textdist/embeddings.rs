//! Word embedding store with text and word2vec-binary loaders.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Token vectors of a fixed dimension. Keys are lowercased on insertion and
/// lookups are lowercased too; the first vector seen for a key wins.
#[derive(Debug)]
pub struct EmbeddingStore {
    dimension: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    data: Vec<f64>,
    fingerprint: OnceLock<String>,
}

impl Clone for EmbeddingStore {
    fn clone(&self) -> Self {
        EmbeddingStore {
            dimension: self.dimension,
            index: self.index.clone(),
            tokens: self.tokens.clone(),
            data: self.data.clone(),
            fingerprint: OnceLock::new(),
        }
    }
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Embeddings("dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dimension,
            index: HashMap::new(),
            tokens: Vec::new(),
            data: Vec::new(),
            fingerprint: OnceLock::new(),
        })
    }

    pub fn from_pairs<I, S>(dimension: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut store = EmbeddingStore::new(dimension)?;
        for (tok, v) in pairs {
            store.insert(tok.as_ref(), &v)?;
        }
        Ok(store)
    }

    /// Adds a vector; returns `false` if the (lowercased) token already exists.
    pub fn insert(&mut self, token: &str, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::Embeddings(format!(
                "`{token}` has dimension {}, store has {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Embeddings(format!("`{token}` has a non-finite component")));
        }
        let key = token.to_lowercase();
        if self.index.contains_key(&key) {
            return Ok(false);
        }
        self.index.insert(key.clone(), self.tokens.len());
        self.tokens.push(key);
        self.data.extend_from_slice(vector);
        self.fingerprint = OnceLock::new();
        Ok(true)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(&token.to_lowercase())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        let i = *self.index.get(&token.to_lowercase())?;
        Some(&self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Euclidean distance between two stored tokens.
    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        Some(euclidean(x, y))
    }

    /// Copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> EmbeddingStore {
        let mut s = self.clone();
        s.data.iter_mut().for_each(|x| *x *= factor);
        s
    }

    /// SHA-256 over dimension, tokens and vector bytes; identifies the store
    /// in caches and report provenance.
    pub fn fingerprint(&self) -> &str {
        self.fingerprint.get_or_init(|| {
            let mut h = Sha256::new();
            h.update((self.dimension as u64).to_le_bytes());
            for (i, t) in self.tokens.iter().enumerate() {
                h.update((t.len() as u64).to_le_bytes());
                h.update(t.as_bytes());
                for x in &self.data[i * self.dimension..(i + 1) * self.dimension] {
                    h.update(x.to_le_bytes());
                }
            }
            hex::encode(h.finalize())
        })
    }

    /// Reads `token v1 ... vd` lines. A leading `count dim` header line is
    /// accepted and skipped. With `keep`, only tokens in the set are stored.
    pub fn read_text<R: BufRead>(reader: R, keep: Option<&HashSet<String>>) -> Result<Self> {
        let mut store: Option<EmbeddingStore> = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Embeddings(format!("line {}: {e}", n + 1)))?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if n == 0 && rest.len() == 1 && token.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                continue;
            }
            let vector = rest
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Embeddings(format!("line {}: {e}", n + 1)))?;
            let s = match &mut store {
                Some(s) => s,
                None => store.insert(EmbeddingStore::new(vector.len())?),
            };
            if keep.is_some_and(|k| !k.contains(&token.to_lowercase())) {
                continue;
            }
            s.insert(token, &vector)
                .map_err(|e| Error::Embeddings(format!("line {}: {e}", n + 1)))?;
        }
        store.ok_or_else(|| Error::Embeddings("no vectors in text embedding file".into()))
    }

    /// Reads the word2vec binary layout: a `count dim\n` header followed by
    /// `count` records of `token<space>` and `dim` little-endian f32 values.
    pub fn read_word2vec_binary<R: BufRead>(mut reader: R, keep: Option<&HashSet<String>>) -> Result<Self> {
        let header = read_until(&mut reader, b'\n')?;
        let header = String::from_utf8_lossy(&header);
        let mut parts = header.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize> {
            s.and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Embeddings(format!("bad word2vec header `{}`", header.trim())))
        };
        let count = parse(parts.next())?;
        let dim = parse(parts.next())?;
        let mut store = EmbeddingStore::new(dim)?;
        let mut buf = vec![0u8; dim * 4];
        for i in 0..count {
            let mut word = read_until(&mut reader, b' ')?;
            while word.first() == Some(&b'\n') {
                word.remove(0);
            }
            if word.is_empty() {
                return Err(Error::Embeddings(format!("record {i}: empty token")));
            }
            reader
                .read_exact(&mut buf)
                .map_err(|e| Error::Embeddings(format!("record {i}: {e}")))?;
            let token = String::from_utf8_lossy(&word).into_owned();
            if keep.is_some_and(|k| !k.contains(&token.to_lowercase())) {
                continue;
            }
            let v: Vec<f64> = buf
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect();
            store.insert(&token, &v)?;
        }
        Ok(store)
    }

    /// Writes the word2vec binary layout (vectors narrowed to f32).
    pub fn write_word2vec_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dimension)?;
        for (i, t) in self.tokens.iter().enumerate() {
            w.write_all(t.as_bytes())?;
            w.write_all(b" ")?;
            for x in &self.data[i * self.dimension..(i + 1) * self.dimension] {
                w.write_all(&(*x as f32).to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, t) in self.tokens.iter().enumerate() {
            write!(w, "{t}")?;
            for x in &self.data[i * self.dimension..(i + 1) * self.dimension] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Loads by extension: `.bin` is word2vec binary, anything else text.
    pub fn load(path: &Path, keep: Option<&HashSet<String>>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        if path.extension().is_some_and(|e| e == "bin") {
            Self::read_word2vec_binary(reader, keep)
        } else {
            Self::read_text(reader, keep)
        }
    }
}

fn read_until<R: BufRead>(reader: &mut R, delim: u8) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    reader
        .read_until(delim, &mut buf)
        .map_err(|e| Error::Embeddings(e.to_string()))?;
    if buf.last() == Some(&delim) {
        buf.pop();
    } else {
        return Err(Error::Embeddings("unexpected end of word2vec file".into()));
    }
    Ok(buf)
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EmbeddingStore {
        EmbeddingStore::from_pairs(2, [("Refund", vec![0.0, 0.0]), ("apology", vec![3.0, 4.0])]).unwrap()
    }

    #[test]
    fn case_normalized_lookup() {
        let s = toy();
        assert!(s.contains("REFUND"));
        assert_eq!(s.get("refund"), Some(&[0.0, 0.0][..]));
        assert_eq!(s.distance("refund", "Apology"), Some(5.0));
    }

    #[test]
    fn dimension_enforced() {
        let mut s = toy();
        assert!(s.insert("x", &[1.0]).is_err());
        assert!(EmbeddingStore::new(0).is_err());
        assert!(!s.insert("REFUND", &[9.0, 9.0]).unwrap());
    }

    #[test]
    fn text_format_with_header_and_filter() {
        let text = "3 2\nfoo 1 2\nbar 3 4\nbaz 5 6\n";
        let s = EmbeddingStore::read_text(text.as_bytes(), None).unwrap();
        assert_eq!(s.len(), 3);
        let keep: HashSet<String> = ["bar".to_string()].into();
        let f = EmbeddingStore::read_text(text.as_bytes(), Some(&keep)).unwrap();
        assert_eq!(f.tokens(), ["bar"]);
        assert!(EmbeddingStore::read_text("a 1 2\nb 1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let s = EmbeddingStore::from_pairs(3, [("a", vec![0.5, -1.0, 2.0]), ("b", vec![0.25, 0.0, 8.0])]).unwrap();
        let mut bytes = Vec::new();
        s.write_word2vec_binary(&mut bytes).unwrap();
        let back = EmbeddingStore::read_word2vec_binary(bytes.as_slice(), None).unwrap();
        assert_eq!(back.tokens(), s.tokens());
        assert_eq!(back.get("b"), s.get("b"));
        assert_eq!(back.fingerprint(), s.fingerprint());
    }

    #[test]
    fn truncated_binary_rejected() {
        let s = toy();
        let mut bytes = Vec::new();
        s.write_word2vec_binary(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 6);
        assert!(EmbeddingStore::read_word2vec_binary(bytes.as_slice(), None).is_err());
    }

    #[test]
    fn fingerprint_changes_with_scaling() {
        let s = toy();
        assert_ne!(s.fingerprint(), s.scaled(2.0).fingerprint());
    }
}

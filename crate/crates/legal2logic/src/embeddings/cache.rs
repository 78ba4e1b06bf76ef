//! Append-only embedding cache file.
//!
//! Layout: one version byte (0x01), then records of
//! `[32-byte key][u32 LE dimension][dimension x f64 LE]`.
//! A corrupt trailing record (crash mid-append) is truncated on open.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::Path;

const VERSION: u8 = 0x01;

pub struct EmbeddingCache {
    file: File,
    entries: HashMap<[u8; 32], Vec<f64>>,
}

impl EmbeddingCache {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        if let Some(parent) = path.as_ref().parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;

        let mut entries = HashMap::new();
        let mut good_len;
        if bytes.is_empty() {
            file.write_all(&[VERSION])?;
            good_len = 1;
        } else if bytes[0] != VERSION {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported cache version {}", bytes[0]),
            ));
        } else {
            let mut pos = 1usize;
            good_len = 1;
            while pos + 36 <= bytes.len() {
                let mut key = [0u8; 32];
                key.copy_from_slice(&bytes[pos..pos + 32]);
                let dim =
                    u32::from_le_bytes(bytes[pos + 32..pos + 36].try_into().unwrap()) as usize;
                let end = pos + 36 + dim * 8;
                if end > bytes.len() {
                    break; // truncated trailing record
                }
                let values = bytes[pos + 36..end]
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                entries.insert(key, values);
                pos = end;
                good_len = end;
            }
        }
        if good_len < bytes.len() {
            file.set_len(good_len as u64)?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok(EmbeddingCache { file, entries })
    }

    pub fn get(&self, key: &[u8; 32]) -> Option<Vec<f64>> {
        self.entries.get(key).cloned()
    }

    pub fn put(&mut self, key: &[u8; 32], values: &[f64]) -> io::Result<()> {
        if self.entries.contains_key(key) {
            return Ok(());
        }
        let mut record = Vec::with_capacity(36 + values.len() * 8);
        record.extend_from_slice(key);
        record.extend_from_slice(&(values.len() as u32).to_le_bytes());
        for v in values {
            record.extend_from_slice(&v.to_le_bytes());
        }
        self.file.write_all(&record)?;
        self.file.flush()?;
        self.entries.insert(*key, values.to_vec());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{DeterministicLocalBackend, Embedder};

    #[test]
    fn round_trips_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let key_a = [1u8; 32];
        let key_b = [2u8; 32];
        {
            let mut c = EmbeddingCache::open(&path).unwrap();
            c.put(&key_a, &[0.5, -1.25]).unwrap();
            c.put(&key_b, &[3.0]).unwrap();
        }
        let c = EmbeddingCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get(&key_a).unwrap(), vec![0.5, -1.25]);
        assert_eq!(c.get(&key_b).unwrap(), vec![3.0]);
    }

    #[test]
    fn corrupt_trailing_record_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        {
            let mut c = EmbeddingCache::open(&path).unwrap();
            c.put(&[1u8; 32], &[1.0, 2.0]).unwrap();
        }
        // Simulate a crash mid-append.
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(&[9u8; 20]).unwrap();
        drop(f);

        let c = EmbeddingCache::open(&path).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&[1u8; 32]).unwrap(), vec![1.0, 2.0]);
        // The file is clean again: a fresh record appends fine.
        let mut c = EmbeddingCache::open(&path).unwrap();
        c.put(&[2u8; 32], &[4.0]).unwrap();
        let c = EmbeddingCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn cache_is_transparent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let texts = ["the lender sued", "the borrower paid", "the lender sued"];

        let plain = Embedder::new(DeterministicLocalBackend::default());
        let cached =
            Embedder::with_cache(DeterministicLocalBackend::default(), &path).unwrap();
        for text in texts {
            let a = plain.embed(text).unwrap();
            let b = cached.embed(text).unwrap();
            let abytes: Vec<u8> = a.values().iter().flat_map(|v| v.to_le_bytes()).collect();
            let bbytes: Vec<u8> = b.values().iter().flat_map(|v| v.to_le_bytes()).collect();
            assert_eq!(abytes, bbytes);
        }
        // Warm cache returns identical bytes too.
        let warm = Embedder::with_cache(DeterministicLocalBackend::default(), &path).unwrap();
        for text in texts {
            let a = plain.embed(text).unwrap();
            let b = warm.embed(text).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }
}

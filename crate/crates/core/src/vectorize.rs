//! Text to dense vectors: a feature-hashing vectorizer and the reader and
//! writer for precomputed embedding files.
//!
//! Embedding files are little-endian: the magic `DFE1`, a `u32` dimension,
//! a `u64` row count, then `count * dim` `f32` values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::lexswap::tokenize;

pub const EMBEDDING_MAGIC: &[u8; 4] = b"DFE1";
const HEADER_LEN: usize = 16;
pub const DEFAULT_DIM: usize = 384;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("offset 0: bad magic {0:?}, expected \"DFE1\"")]
    BadMagic([u8; 4]),
    #[error("offset {offset}: truncated file, expected {expected} bytes, found {found}")]
    Truncated { offset: usize, expected: usize, found: usize },
    #[error("offset {offset}: {excess} trailing bytes after the payload")]
    TrailingBytes { offset: usize, excess: usize },
    #[error("offset 4: dimension must be positive")]
    ZeroDim,
    #[error("offset {offset}: non-finite value {value}")]
    NonFinite { offset: usize, value: f32 },
    #[error("row {row} has length {len}, expected {dim}")]
    RaggedRow { row: usize, len: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f32>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
    }

    /// Scales to unit L2 norm; the zero vector is left alone.
    pub fn normalize(&mut self) {
        let norm = self.l2_norm();
        if norm > 0.0 {
            for v in &mut self.0 {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
    }
}

impl From<Vec<f32>> for Vector {
    fn from(values: Vec<f32>) -> Self {
        Self(values)
    }
}

/// Deterministic, stateless text-to-vector map.
pub trait Vectorizer: Send + Sync {
    fn dim(&self) -> usize;
    fn transform(&self, text: &str) -> Vector;
}

/// Signed feature hashing over lowercased unigram word tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingVectorizer {
    dim: usize,
    seed: u64,
}

impl HashingVectorizer {
    /// # Panics
    /// If `dim` is zero.
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1, "hashing dimension must be positive");
        Self { dim, seed }
    }

    /// Bucket and sign for one normalized token.
    pub fn bucket(&self, token: &str) -> (usize, f32) {
        let h = xxh3_64_with_seed(token.as_bytes(), self.seed);
        let bucket = ((h & 0x7fff_ffff_ffff_ffff) % self.dim as u64) as usize;
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        (bucket, sign)
    }
}

impl Default for HashingVectorizer {
    fn default() -> Self {
        Self::new(DEFAULT_DIM, 0)
    }
}

impl Vectorizer for HashingVectorizer {
    fn dim(&self) -> usize {
        self.dim
    }

    fn transform(&self, text: &str) -> Vector {
        let mut v = Vector::zeros(self.dim);
        for tok in tokenize(text).iter().filter(|t| t.is_word) {
            let (bucket, sign) = self.bucket(&tok.norm);
            v.0[bucket] += sign;
        }
        v.normalize();
        v
    }
}

pub fn hash_vectorize(text: &str, dim: usize, seed: u64) -> Vector {
    HashingVectorizer::new(dim, seed).transform(text)
}

pub fn encode_embeddings(dim: usize, vectors: &[Vector]) -> Result<Vec<u8>, EmbeddingError> {
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    let mut out = Vec::with_capacity(HEADER_LEN + vectors.len() * dim * 4);
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(vectors.len() as u64).to_le_bytes());
    for (row, v) in vectors.iter().enumerate() {
        if v.dim() != dim {
            return Err(EmbeddingError::RaggedRow { row, len: v.dim(), dim });
        }
        for x in &v.0 {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_embedding_file(path: &Path, dim: usize, vectors: &[Vector]) -> Result<(), EmbeddingError> {
    let bytes = encode_embeddings(dim, vectors)?;
    let io = |source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(&bytes).map_err(io)
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<(usize, Vec<Vector>), EmbeddingError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != EMBEDDING_MAGIC {
            return Err(EmbeddingError::BadMagic(bytes[..4].try_into().unwrap()));
        }
        return Err(EmbeddingError::Truncated {
            offset: 0,
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if &magic != EMBEDDING_MAGIC {
        return Err(EmbeddingError::BadMagic(magic));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    let payload_len = (count as u128) * (dim as u128) * 4;
    let expected = HEADER_LEN as u128 + payload_len;
    if (bytes.len() as u128) < expected {
        return Err(EmbeddingError::Truncated {
            offset: HEADER_LEN,
            expected: expected.min(usize::MAX as u128) as usize,
            found: bytes.len(),
        });
    }
    let expected = expected as usize;
    if bytes.len() > expected {
        return Err(EmbeddingError::TrailingBytes {
            offset: expected,
            excess: bytes.len() - expected,
        });
    }
    let mut vectors = Vec::with_capacity(count as usize);
    for (row, chunk) in bytes[HEADER_LEN..].chunks_exact(dim * 4).enumerate() {
        let mut values = Vec::with_capacity(dim);
        for (col, raw) in chunk.chunks_exact(4).enumerate() {
            let value = f32::from_le_bytes(raw.try_into().unwrap());
            if !value.is_finite() {
                return Err(EmbeddingError::NonFinite {
                    offset: HEADER_LEN + (row * dim + col) * 4,
                    value,
                });
            }
            values.push(value);
        }
        vectors.push(Vector(values));
    }
    Ok((dim, vectors))
}

/// Reads a whole embedding file; vectors line up with stream positions.
pub fn load_embedding_file(path: &Path) -> Result<(usize, Vec<Vector>), EmbeddingError> {
    let bytes = fs::read(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_embeddings(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_text_is_zero() {
        let v = hash_vectorize("", 384, 0);
        assert_eq!(v, Vector::zeros(384));
        assert_eq!(hash_vectorize("!!! ...", 16, 0).l2_norm(), 0.0);
    }

    #[test]
    fn deterministic_and_case_insensitive() {
        let h = HashingVectorizer::new(64, 5);
        assert_eq!(h.transform("Great food, great staff"), h.transform("Great food, great staff"));
        assert_eq!(h.transform("GREAT food"), h.transform("great FOOD"));
        assert_ne!(h.transform("great food"), HashingVectorizer::new(64, 6).transform("great food"));
    }

    #[test]
    fn two_token_collision_rate_near_birthday_bound() {
        // Two distinct tokens share a bucket with probability 1/dim.
        let dim = 384;
        let h = HashingVectorizer::new(dim, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let word = |rng: &mut ChaCha8Rng| -> String {
            (0..8).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
        };
        let trials = 10_000;
        let mut collisions = 0;
        for _ in 0..trials {
            let (a, b) = (word(&mut rng), word(&mut rng));
            if a != b && h.bucket(&a).0 == h.bucket(&b).0 {
                collisions += 1;
            }
        }
        let rate = collisions as f64 / trials as f64;
        let bound = 1.0 / dim as f64;
        assert!(rate <= 3.0 * bound && rate >= bound / 3.0, "rate {rate} vs {bound}");
    }

    #[test]
    fn header_and_rows() {
        let vectors: Vec<Vector> = (0..2).map(|r| Vector((0..384).map(|c| (r * 384 + c) as f32).collect())).collect();
        let bytes = encode_embeddings(384, &vectors).unwrap();
        assert_eq!(&bytes[..4], b"DFE1");
        assert_eq!(bytes.len(), 16 + 768 * 4);
        let (dim, back) = decode_embeddings(&bytes).unwrap();
        assert_eq!(dim, 384);
        assert_eq!(back, vectors);

        let (dim, empty) = decode_embeddings(&encode_embeddings(8, &[]).unwrap()).unwrap();
        assert_eq!((dim, empty.len()), (8, 0));
    }

    #[test]
    fn malformed_files() {
        let good = encode_embeddings(2, &[Vector(vec![1.0, 2.0])]).unwrap();
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode_embeddings(&bad_magic), Err(EmbeddingError::BadMagic(_))));
        assert!(matches!(
            decode_embeddings(&good[..good.len() - 1]),
            Err(EmbeddingError::Truncated { offset: 16, .. })
        ));
        let mut nan = good.clone();
        nan[20..24].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_embeddings(&nan), Err(EmbeddingError::NonFinite { offset: 20, .. })));
        let mut long = good;
        long.push(0);
        assert!(matches!(decode_embeddings(&long), Err(EmbeddingError::TrailingBytes { .. })));
        assert!(matches!(encode_embeddings(3, &[Vector(vec![1.0])]), Err(EmbeddingError::RaggedRow { .. })));
    }

    proptest! {
        #[test]
        fn hashed_vectors_are_unit_or_zero(text in "[a-zA-Z ,.!']{0,80}", dim in 1usize..512) {
            let norm = hash_vectorize(&text, dim, 3).l2_norm();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-6);
        }

        #[test]
        fn loaded_floats_match_little_endian_bytes(rows in prop::collection::vec(prop::collection::vec(-1e6f32..1e6, 3), 0..20)) {
            let vectors: Vec<Vector> = rows.into_iter().map(Vector).collect();
            let bytes = encode_embeddings(3, &vectors).unwrap();
            let (_, back) = decode_embeddings(&bytes).unwrap();
            for (i, v) in back.iter().enumerate() {
                for (j, x) in v.0.iter().enumerate() {
                    let at = 16 + (i * 3 + j) * 4;
                    prop_assert_eq!(x.to_bits(), u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()));
                }
            }
        }
    }
}

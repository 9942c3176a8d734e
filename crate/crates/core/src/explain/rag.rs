//! Flat (exact) vector store over chunked background documents.
//!
//! Vectors are hashed term-frequency bags of words: lowercase alphanumeric
//! tokens are hashed (FNV-1a) into a fixed number of buckets and the counts
//! are L2-normalised, so cosine similarity is a plain dot product.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const VECTOR_DIM: usize = 4096;
pub const DEFAULT_CHUNK_CHARS: usize = 1200;
pub const DEFAULT_OVERLAP_CHARS: usize = 200;
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("chunk size {chunk} must exceed overlap {overlap}")]
    BadChunking { chunk: usize, overlap: usize },
    #[error("store vectors have dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid store file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// L2-normalised sparse vector; entries sorted by bucket index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            v[i as usize] = x;
        }
        v
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut sum = 0.0;
        while a < self.entries.len() && b < other.entries.len() {
            let (ia, xa) = self.entries[a];
            let (ib, xb) = other.entries[b];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    sum += xa * xb;
                    a += 1;
                    b += 1;
                }
            }
        }
        sum
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Lowercased maximal runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn vectorize(text: &str) -> SparseVector {
    let mut counts = vec![0u32; VECTOR_DIM];
    for token in tokenize(text) {
        counts[(fnv1a(token.as_bytes()) % VECTOR_DIM as u64) as usize] += 1;
    }
    let norm = counts
        .iter()
        .map(|&c| f64::from(c) * f64::from(c))
        .sum::<f64>()
        .sqrt();
    let entries = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as u32, f64::from(c) / norm))
        .collect();
    SparseVector {
        dim: VECTOR_DIM,
        entries,
    }
}

pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    // both sides are unit length or zero
    a.dot(b)
}

/// Collapses every whitespace run to a single space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub text: String,
}

/// Sliding character windows over each whitespace-normalised document.
/// Windows start every `chunk_chars - overlap_chars` characters while the
/// start lies inside the text, so the last window may be short.
pub fn chunk_documents(
    docs: &[(String, String)],
    chunk_chars: usize,
    overlap_chars: usize,
) -> Result<Vec<Chunk>, StoreError> {
    if chunk_chars <= overlap_chars {
        return Err(StoreError::BadChunking {
            chunk: chunk_chars,
            overlap: overlap_chars,
        });
    }
    let step = chunk_chars - overlap_chars;
    let mut out = Vec::new();
    for (doc_id, text) in docs {
        let chars: Vec<char> = normalize_whitespace(text).chars().collect();
        let mut start = 0;
        while start < chars.len() {
            let end = (start + chunk_chars).min(chars.len());
            out.push(Chunk {
                doc_id: doc_id.clone(),
                text: chars[start..end].iter().collect(),
            });
            start += step;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredChunk {
    pub doc_id: String,
    pub text: String,
    pub vector: SparseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorStore {
    pub dim: usize,
    pub chunk_chars: usize,
    pub overlap_chars: usize,
    pub chunks: Vec<StoredChunk>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredChunk<'a> {
    pub chunk: &'a StoredChunk,
    pub score: f64,
}

impl Default for VectorStore {
    fn default() -> Self {
        Self::empty(DEFAULT_CHUNK_CHARS, DEFAULT_OVERLAP_CHARS)
    }
}

impl VectorStore {
    pub fn empty(chunk_chars: usize, overlap_chars: usize) -> Self {
        Self {
            dim: VECTOR_DIM,
            chunk_chars,
            overlap_chars,
            chunks: Vec::new(),
        }
    }

    pub fn build(
        docs: &[(String, String)],
        chunk_chars: usize,
        overlap_chars: usize,
    ) -> Result<Self, StoreError> {
        let mut store = Self::empty(chunk_chars, overlap_chars);
        for c in chunk_documents(docs, chunk_chars, overlap_chars)? {
            store.push(c);
        }
        Ok(store)
    }

    /// Adds a pre-cut chunk as-is.
    pub fn push(&mut self, chunk: Chunk) {
        let vector = vectorize(&chunk.text);
        self.chunks.push(StoredChunk {
            doc_id: chunk.doc_id,
            text: chunk.text,
            vector,
        });
    }

    /// The background documents bundled with the library.
    pub fn bundled() -> Self {
        Self::build(&bundled_documents(), DEFAULT_CHUNK_CHARS, DEFAULT_OVERLAP_CHARS)
            .expect("default chunking is valid")
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    /// Exact cosine ranking over every chunk, best first; equal scores keep
    /// insertion order.
    pub fn query(&self, question: &str, top_k: usize) -> Vec<ScoredChunk<'_>> {
        if top_k == 0 || self.chunks.is_empty() {
            return Vec::new();
        }
        let q = vectorize(question);
        let mut scored: Vec<ScoredChunk<'_>> = self
            .chunks
            .iter()
            .map(|chunk| ScoredChunk {
                chunk,
                score: cosine(&q, &chunk.vector),
            })
            .collect();
        // stable sort keeps insertion order among ties
        scored.sort_by(|a, b| b.score.total_cmp(&a.score));
        scored.truncate(top_k);
        scored
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("store serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        let store: Self = serde_json::from_str(text)?;
        for c in &store.chunks {
            if c.vector.dim != store.dim {
                return Err(StoreError::Dimension {
                    expected: store.dim,
                    found: c.vector.dim,
                });
            }
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Ordered chunk texts for `question`.
pub fn query_store(store: &VectorStore, question: &str, top_k: usize) -> Vec<String> {
    store
        .query(question, top_k)
        .into_iter()
        .map(|s| s.chunk.text.clone())
        .collect()
}

/// `.md` and `.txt` files of a directory as (file stem, contents), sorted by
/// file name.
pub fn read_documents(dir: &Path) -> io::Result<Vec<(String, String)>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("md") || e.eq_ignore_ascii_case("txt"))
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((id, fs::read_to_string(&p)?))
        })
        .collect()
}

const BUNDLED: [(&str, &str); 7] = [
    ("gpmal", include_str!("../../assets/background/gpmal.md")),
    ("gpmal2", include_str!("../../assets/background/gpmal2.md")),
    ("nrmse", include_str!("../../assets/background/nrmse.md")),
    ("umap", include_str!("../../assets/background/umap.md")),
    ("lexicographic", include_str!("../../assets/background/lexicographic.md")),
    ("double_tournament", include_str!("../../assets/background/double_tournament.md")),
    ("tarpeian", include_str!("../../assets/background/tarpeian.md")),
];

pub fn bundled_documents() -> Vec<(String, String)> {
    BUNDLED
        .iter()
        .map(|(id, text)| (id.to_string(), text.to_string()))
        .collect()
}

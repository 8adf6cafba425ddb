//! Deterministic dense-retrieval surrogate: character 3–5-grams feature-
//! hashed into a fixed-dimension vector with ±1 signs, L2-normalized, scored
//! by cosine similarity. Stands in for a learned encoder while keeping the
//! hybrid-fusion architecture; any embedding provider with the same shape
//! can be swapped in behind the index.

use super::{rank_and_clip, ScoredCandidate, Source};
use crate::util::fnv1a64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashedVectorIndex {
    dim: usize,
    doc_ids: Vec<String>,
    /// Doc index -> unit vector; zero-vector (degenerate) texts are absent.
    vectors: BTreeMap<u32, Vec<f64>>,
}

impl HashedVectorIndex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indexed_docs(&self) -> usize {
        self.vectors.len()
    }
}

/// Feature-hashed embedding. Buckets come from `(fnv1a64(gram) >> 1) % dim`
/// and the sign from the hash's low bit, so bucket and sign stay
/// uncorrelated. Texts with no 3-gram produce the zero vector.
pub fn embed_hashed(text: &str, dim: usize) -> Vec<f64> {
    debug_assert!(dim >= 16, "dim should be at least 16");
    let dim = dim.max(1);
    let mut vector = vec![0.0f64; dim];
    let chars: Vec<char> = text.chars().collect();
    let mut buf = String::new();
    for n in 3..=5usize {
        if chars.len() < n {
            break;
        }
        for window in chars.windows(n) {
            buf.clear();
            buf.extend(window.iter());
            let hash = fnv1a64(buf.as_bytes());
            let bucket = ((hash >> 1) % dim as u64) as usize;
            let sign = if hash & 1 == 1 { 1.0 } else { -1.0 };
            vector[bucket] += sign;
        }
    }
    let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut vector {
            *v /= norm;
        }
    }
    vector
}

pub fn dense_build(docs: &[(String, String)], dim: usize) -> HashedVectorIndex {
    let mut vectors = BTreeMap::new();
    for (idx, (_, text)) in docs.iter().enumerate() {
        let vector = embed_hashed(text, dim);
        if vector.iter().any(|v| *v != 0.0) {
            vectors.insert(idx as u32, vector);
        }
    }
    HashedVectorIndex {
        dim,
        doc_ids: docs.iter().map(|(id, _)| id.clone()).collect(),
        vectors,
    }
}

/// Top-k by cosine similarity (dot product of unit vectors). A degenerate
/// query embeds to zero and matches nothing.
pub fn dense_top_k(index: &HashedVectorIndex, query: &str, k: usize) -> Vec<ScoredCandidate> {
    if k == 0 {
        return Vec::new();
    }
    let q = embed_hashed(query, index.dim);
    if q.iter().all(|v| *v == 0.0) {
        return Vec::new();
    }
    let candidates = index
        .vectors
        .iter()
        .map(|(doc, vector)| ScoredCandidate {
            doc_id: index.doc_ids[*doc as usize].clone(),
            score: vector.iter().zip(&q).map(|(a, b)| a * b).sum(),
            source: Source::Dense,
        })
        .collect();
    rank_and_clip(candidates, k)
}

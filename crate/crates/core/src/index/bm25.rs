//! Okapi BM25 over the code tokenizer.

use super::{rank_and_clip, tokenize_code, ScoredCandidate, Source};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    doc_ids: Vec<String>,
    /// term -> (doc index, term frequency), ascending by doc index.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    doc_len: Vec<u32>,
    avg_len: f64,
    k1: f64,
    b: f64,
}

impl Bm25Index {
    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }
}

pub fn bm25_build(docs: &[(String, String)]) -> Bm25Index {
    bm25_build_with_params(docs, DEFAULT_K1, DEFAULT_B)
}

pub fn bm25_build_with_params(docs: &[(String, String)], k1: f64, b: f64) -> Bm25Index {
    let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    let mut doc_len = Vec::with_capacity(docs.len());
    for (idx, (_, text)) in docs.iter().enumerate() {
        let tokens = tokenize_code(text);
        doc_len.push(tokens.len() as u32);
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for token in tokens {
            *counts.entry(token).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            postings.entry(term).or_default().push((idx as u32, tf));
        }
    }
    let avg_len = if doc_len.is_empty() {
        0.0
    } else {
        doc_len.iter().map(|&l| l as f64).sum::<f64>() / doc_len.len() as f64
    };
    Bm25Index {
        doc_ids: docs.iter().map(|(id, _)| id.clone()).collect(),
        postings,
        doc_len,
        avg_len,
        k1,
        b,
    }
}

/// Top-k by `score(d, q) = Σ_t idf(t) · tf(k1+1) / (tf + k1(1 − b + b·len/avg))`
/// with `idf(t) = ln(1 + (N − n_t + 0.5)/(n_t + 0.5))`, floored at 0. The sum
/// runs over the query token multiset. Zero-scoring documents are excluded;
/// ties break by `doc_id`.
pub fn bm25_top_k(index: &Bm25Index, query: &str, k: usize) -> Vec<ScoredCandidate> {
    if index.doc_ids.is_empty() || k == 0 {
        return Vec::new();
    }
    let n_docs = index.doc_ids.len() as f64;
    let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
    for token in tokenize_code(query) {
        let Some(postings) = index.postings.get(&token) else {
            continue;
        };
        let df = postings.len() as f64;
        let idf = (1.0 + (n_docs - df + 0.5) / (df + 0.5)).ln().max(0.0);
        for &(doc, tf) in postings {
            let tf = tf as f64;
            let len_norm = index.doc_len[doc as usize] as f64 / index.avg_len;
            let denom = tf + index.k1 * (1.0 - index.b + index.b * len_norm);
            *scores.entry(doc).or_insert(0.0) += idf * tf * (index.k1 + 1.0) / denom;
        }
    }
    let candidates = scores
        .into_iter()
        .filter(|(_, score)| *score > 0.0)
        .map(|(doc, score)| ScoredCandidate {
            doc_id: index.doc_ids[doc as usize].clone(),
            score,
            source: Source::Bm25,
        })
        .collect();
    rank_and_clip(candidates, k)
}

//! Reciprocal-rank fusion: combine heterogeneous rankings without score
//! normalization.

use super::{rank_and_clip, ScoredCandidate, Source};

pub const DEFAULT_RRF_K: f64 = 60.0;

/// `score(d) = Σ over rankings containing d of 1/(k_const + rank_d)` with
/// 1-based ranks; descending, ties by `doc_id`. Rankings must be
/// duplicate-free.
pub fn rrf_fuse(rankings: &[Vec<String>], k_const: f64) -> Vec<ScoredCandidate> {
    let mut scores: std::collections::BTreeMap<&str, f64> = std::collections::BTreeMap::new();
    for ranking in rankings {
        debug_assert!(
            {
                let mut seen = std::collections::BTreeSet::new();
                ranking.iter().all(|d| seen.insert(d))
            },
            "rankings must be duplicate-free"
        );
        for (idx, doc) in ranking.iter().enumerate() {
            *scores.entry(doc.as_str()).or_insert(0.0) += 1.0 / (k_const + (idx + 1) as f64);
        }
    }
    let candidates = scores
        .into_iter()
        .map(|(doc_id, score)| ScoredCandidate {
            doc_id: doc_id.to_string(),
            score,
            source: Source::Fused,
        })
        .collect();
    rank_and_clip(candidates, usize::MAX)
}

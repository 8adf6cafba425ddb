//! Retrieval indices over chunks or files: BM25 (sparse), trigram substring
//! search (exact), a hashed character-n-gram vector space (dense surrogate),
//! and reciprocal-rank fusion across rankings.
//!
//! All builds and queries are deterministic: postings live in ordered maps,
//! ties break on `doc_id`, and the dense embedding uses a fixed 64-bit hash.
//! Indices are immutable after build and safe for concurrent readers.

mod bm25;
mod cache;
mod dense;
mod fuse;
mod trigram;

pub use bm25::{bm25_build, bm25_build_with_params, bm25_top_k, Bm25Index};
pub use cache::{corpus_hash, load_cache, save_cache};
pub use dense::{dense_build, dense_top_k, embed_hashed, HashedVectorIndex, DEFAULT_DIM};
pub use fuse::{rrf_fuse, DEFAULT_RRF_K};
pub use trigram::{trigram_build, trigram_search, TrigramIndex};

/// A scored retrieval result and the signal that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub doc_id: String,
    pub score: f64,
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Bm25,
    Trigram,
    Dense,
    Fused,
    Heuristic,
}

/// Sort candidates by descending score, ties by ascending `doc_id`, and clip
/// to `k`.
fn rank_and_clip(mut candidates: Vec<ScoredCandidate>, k: usize) -> Vec<ScoredCandidate> {
    candidates.sort_by(|a, b| {
        b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    candidates.truncate(k);
    candidates
}

/// Lowercased identifier/number runs. camelCase and snake_case identifiers
/// additionally emit their subtokens after the full identifier:
/// `fooBar` -> `[foobar, foo, bar]`, `get_user_id(x)` -> `[get_user_id, get,
/// user, id, x]`.
pub fn tokenize_code(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for ch in text.chars().chain(std::iter::once(' ')) {
        if ch.is_ascii_alphanumeric() || ch == '_' {
            run.push(ch);
            continue;
        }
        if run.is_empty() {
            continue;
        }
        let full = run.to_ascii_lowercase();
        let parts = subtokens(&run);
        run.clear();
        let trivial = parts.len() == 1 && parts[0] == full;
        tokens.push(full);
        if !trivial {
            tokens.extend(parts);
        }
    }
    tokens
}

/// Split one identifier on underscores and camelCase boundaries, lowercased.
fn subtokens(identifier: &str) -> Vec<String> {
    let mut parts = Vec::new();
    for segment in identifier.split('_').filter(|s| !s.is_empty()) {
        let chars: Vec<char> = segment.chars().collect();
        let mut start = 0usize;
        for i in 1..chars.len() {
            let prev = chars[i - 1];
            let cur = chars[i];
            let lower_to_upper = cur.is_ascii_uppercase() && (prev.is_ascii_lowercase() || prev.is_ascii_digit());
            let acronym_end = cur.is_ascii_uppercase()
                && prev.is_ascii_uppercase()
                && chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
            if lower_to_upper || acronym_end {
                parts.push(chars[start..i].iter().collect::<String>().to_ascii_lowercase());
                start = i;
            }
        }
        parts.push(chars[start..].iter().collect::<String>().to_ascii_lowercase());
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_examples() {
        assert_eq!(tokenize_code("fooBar"), vec!["foobar", "foo", "bar"]);
        assert!(tokenize_code("").is_empty());
        assert_eq!(
            tokenize_code("get_user_id(x)"),
            vec!["get_user_id", "get", "user", "id", "x"]
        );
    }

    #[test]
    fn tokenizer_handles_acronyms_and_digits() {
        assert_eq!(tokenize_code("HTTPServer"), vec!["httpserver", "http", "server"]);
        assert_eq!(tokenize_code("42"), vec!["42"]);
        assert_eq!(tokenize_code("v2Parser"), vec!["v2parser", "v2", "parser"]);
        assert_eq!(tokenize_code("__init__"), vec!["__init__", "init"]);
    }

    #[test]
    fn concurrent_queries_match_serial_results() {
        let docs: Vec<(String, String)> = (0..40)
            .map(|i| (format!("doc{i:02}"), format!("alpha beta_{i} gamma{}", i % 7)))
            .collect();
        let bm25 = bm25_build(&docs);
        let trigram = trigram_build(&docs);
        let dense = dense_build(&docs, 128);
        let queries = ["alpha gamma1", "beta_3", "gamma5 alpha", "nothing here"];

        let serial: Vec<_> = queries
            .iter()
            .map(|q| {
                (
                    bm25_top_k(&bm25, q, 5),
                    trigram_search(&trigram, &[vec![q.split(' ').next().unwrap().to_string()]], 5),
                    dense_top_k(&dense, q, 5),
                )
            })
            .collect();

        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|_| {
                    scope.spawn(|| {
                        queries
                            .iter()
                            .map(|q| {
                                (
                                    bm25_top_k(&bm25, q, 5),
                                    trigram_search(
                                        &trigram,
                                        &[vec![q.split(' ').next().unwrap().to_string()]],
                                        5,
                                    ),
                                    dense_top_k(&dense, q, 5),
                                )
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for handle in handles {
                assert_eq!(handle.join().unwrap(), serial);
            }
        });
    }
}

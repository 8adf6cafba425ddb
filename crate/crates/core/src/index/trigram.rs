//! Exact substring search through a trigram posting list, in the style of a
//! code search engine: trigrams generate candidates, a verbatim scan
//! confirms them, and scoring rewards occurrence counts, word-boundary
//! matches, and filename hits.

use super::{rank_and_clip, ScoredCandidate, Source};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigramIndex {
    /// Doc index -> path; doubles as the filename table used for scoring.
    doc_ids: Vec<String>,
    texts: Vec<String>,
    /// 3-character gram -> (doc index, ascending byte offsets).
    grams: BTreeMap<String, Vec<(u32, Vec<u32>)>>,
}

impl TrigramIndex {
    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }
}

fn char_trigrams(text: &str) -> Vec<(String, u32)> {
    let boundaries: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let mut grams = Vec::new();
    for w in boundaries.windows(4) {
        grams.push((text[w[0]..w[3]].to_string(), w[0] as u32));
    }
    grams
}

pub fn trigram_build(docs: &[(String, String)]) -> TrigramIndex {
    let mut grams: BTreeMap<String, Vec<(u32, Vec<u32>)>> = BTreeMap::new();
    for (idx, (_, text)) in docs.iter().enumerate() {
        let mut per_doc: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (gram, offset) in char_trigrams(text) {
            per_doc.entry(gram).or_default().push(offset);
        }
        for (gram, offsets) in per_doc {
            grams.entry(gram).or_default().push((idx as u32, offsets));
        }
    }
    TrigramIndex {
        doc_ids: docs.iter().map(|(id, _)| id.clone()).collect(),
        texts: docs.iter().map(|(_, text)| text.clone()).collect(),
        grams,
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Overlapping occurrence start offsets of `literal` in `text`.
fn occurrence_offsets(text: &str, literal: &str) -> Vec<usize> {
    if literal.is_empty() || literal.len() > text.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let lit = literal.as_bytes();
    for start in 0..=bytes.len() - lit.len() {
        if &bytes[start..start + lit.len()] == lit {
            out.push(start);
        }
    }
    out
}

fn has_boundary_occurrence(text: &str, literal: &str, offsets: &[usize]) -> bool {
    let bytes = text.as_bytes();
    offsets.iter().any(|&start| {
        let end = start + literal.len();
        let before_ok = start == 0 || !is_word_byte(bytes[start - 1]);
        let after_ok = end == bytes.len() || !is_word_byte(bytes[end]);
        before_ok && after_ok
    })
}

/// Docs containing `literal`, via trigram candidate generation plus exact
/// confirmation. Literals shorter than 3 characters fall back to a direct
/// scan of every document.
fn matching_docs(index: &TrigramIndex, literal: &str) -> BTreeSet<u32> {
    if literal.chars().count() < 3 {
        return (0..index.texts.len() as u32)
            .filter(|&d| index.texts[d as usize].contains(literal))
            .collect();
    }
    let mut candidates: Option<BTreeSet<u32>> = None;
    for (gram, _) in char_trigrams(literal) {
        let docs: BTreeSet<u32> = match index.grams.get(&gram) {
            Some(postings) => postings.iter().map(|(doc, _)| *doc).collect(),
            None => BTreeSet::new(),
        };
        candidates = Some(match candidates {
            Some(prev) => prev.intersection(&docs).copied().collect(),
            None => docs,
        });
        if candidates.as_ref().is_some_and(BTreeSet::is_empty) {
            break;
        }
    }
    candidates
        .unwrap_or_default()
        .into_iter()
        .filter(|&d| index.texts[d as usize].contains(literal))
        .collect()
}

/// Disjunctive-clause search: a doc matches when every clause has at least
/// one literal occurring as a substring. The score sums, over the distinct
/// matched literals across all clauses: occurrences × 1.0, plus 2.0 when
/// some occurrence is word-boundary delimited, plus 5.0 when the literal
/// occurs in the filename.
pub fn trigram_search(
    index: &TrigramIndex,
    clauses: &[Vec<String>],
    k: usize,
) -> Vec<ScoredCandidate> {
    debug_assert!(clauses.iter().all(|c| !c.is_empty()), "clauses must be non-empty");
    if index.doc_ids.is_empty() || clauses.is_empty() || k == 0 {
        return Vec::new();
    }

    let mut literal_docs: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for clause in clauses {
        for literal in clause {
            literal_docs
                .entry(literal.as_str())
                .or_insert_with(|| matching_docs(index, literal));
        }
    }

    let mut survivors: Option<BTreeSet<u32>> = None;
    for clause in clauses {
        let clause_docs: BTreeSet<u32> = clause
            .iter()
            .flat_map(|lit| literal_docs[lit.as_str()].iter().copied())
            .collect();
        survivors = Some(match survivors {
            Some(prev) => prev.intersection(&clause_docs).copied().collect(),
            None => clause_docs,
        });
    }

    let candidates = survivors
        .unwrap_or_default()
        .into_iter()
        .map(|doc| {
            let text = &index.texts[doc as usize];
            let filename = &index.doc_ids[doc as usize];
            let mut score = 0.0;
            for (literal, docs) in &literal_docs {
                if !docs.contains(&doc) {
                    continue;
                }
                let offsets = occurrence_offsets(text, literal);
                score += offsets.len() as f64;
                if has_boundary_occurrence(text, literal, &offsets) {
                    score += 2.0;
                }
                if filename.contains(literal) {
                    score += 5.0;
                }
            }
            ScoredCandidate { doc_id: filename.clone(), score, source: Source::Trigram }
        })
        .collect();
    rank_and_clip(candidates, k)
}

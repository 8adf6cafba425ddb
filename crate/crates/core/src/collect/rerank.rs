//! Heuristic re-ranking of collected snippets by structural signals:
//! whether a snippet defines a symbol referenced near the caret, how far its
//! path sits from the completion file, and how many snapshot files mention
//! its primary symbol.

use super::{HeuristicWeights, Snippet};
use crate::dataset::{CompletionPoint, RepoSnapshot};
use crate::lang::Language;
use crate::parse::{extract_definitions, extract_referenced_symbols};
use std::collections::BTreeSet;

/// Directory distance: the number of path components, filenames excluded,
/// not shared between the two paths.
pub(crate) fn path_distance(a: &str, b: &str) -> usize {
    let dirs = |p: &str| -> Vec<String> {
        let mut parts: Vec<String> = p.split('/').map(str::to_string).collect();
        parts.pop();
        parts
    };
    let da = dirs(a);
    let db = dirs(b);
    let common = da.iter().zip(&db).take_while(|(x, y)| x == y).count();
    (da.len() - common) + (db.len() - common)
}

/// `new_score = score + w_ref·[defines referenced symbol] −
/// w_path·path_distance + w_refs·ln(1 + incoming_refs)`, then a stable
/// descending re-sort. All-zero weights leave a score-ordered input
/// untouched.
pub fn heuristic_rerank(
    snippets: Vec<Snippet>,
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    weights: &HeuristicWeights,
    language: Language,
) -> Vec<Snippet> {
    let referenced: BTreeSet<String> = extract_referenced_symbols(&point.prefix, &point.suffix)
        .into_iter()
        .map(|s| s.name)
        .collect();

    let mut scored: Vec<Snippet> = snippets
        .into_iter()
        .map(|mut snippet| {
            let defs = extract_definitions(&snippet.file_path, &snippet.text, language);
            let defines_referenced = defs.iter().any(|d| referenced.contains(&d.name));
            let incoming = defs.first().map_or(0, |primary| {
                snapshot
                    .files()
                    .values()
                    .filter(|text| text.contains(&primary.name))
                    .count()
            });
            snippet.score += weights.referenced_def * f64::from(defines_referenced as u8)
                - weights.path_distance * path_distance(&snippet.file_path, &point.file_path) as f64
                + weights.incoming_refs * (1.0 + incoming as f64).ln();
            snippet
        })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    scored
}

//! The context-collection strategies.

use super::{finish, CollectorConfig, ContextDocument, Snippet};
use crate::chunk::{adjacent_chunk, block_chunks, line_window_chunks, Chunk, Direction};
use crate::dataset::{CompletionPoint, RepoSnapshot};
use crate::index::{
    bm25_build, bm25_top_k, dense_build, dense_top_k, rrf_fuse, trigram_build, trigram_search,
};
use crate::parse::{extract_definitions, extract_referenced_symbols, enclosing_blocks, imported_files};
use crate::util::{fnv1a64, head_lines, tail_lines, SplitMix64};
use std::collections::BTreeMap;

/// Snapshot files as `(path, text)` docs, skipping empty files and,
/// optionally, the completion file itself.
fn file_corpus(snapshot: &RepoSnapshot, exclude: Option<&str>) -> Vec<(String, String)> {
    snapshot
        .files()
        .iter()
        .filter(|(path, text)| Some(path.as_str()) != exclude && !text.is_empty())
        .map(|(path, text)| (path.clone(), text.clone()))
        .collect()
}

fn retrieval_query(point: &CompletionPoint, cfg: &CollectorConfig) -> String {
    format!(
        "{}{}",
        tail_lines(&point.prefix, cfg.prefix_query_lines),
        head_lines(&point.suffix, cfg.suffix_query_lines)
    )
}

/// No context at all: the floor every other strategy is measured against.
pub fn collect_empty(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    finish(Vec::new(), point, snapshot, cfg)
}

/// One uniformly chosen co-changed file, seeded by `rng_seed XOR
/// hash(point_id)`. A drawn path missing from the snapshot falls out of the
/// pool and the draw repeats; an exhausted pool yields the empty document.
pub fn collect_random_cochange(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    finish(random_cochange_snippets(point, snapshot, cfg), point, snapshot, cfg)
}

fn random_cochange_snippets(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> Vec<Snippet> {
    let mut rng = SplitMix64::new(cfg.rng_seed ^ fnv1a64(point.point_id.as_bytes()));
    let mut pool: Vec<&str> = point.co_changed_files.iter().map(String::as_str).collect();
    while !pool.is_empty() {
        let idx = rng.next_below(pool.len());
        let path = pool.swap_remove(idx);
        match snapshot.file(path) {
            Some(text) if !text.is_empty() => {
                return vec![Snippet {
                    file_path: path.to_string(),
                    text: text.to_string(),
                    score: 1.0,
                    provenance: "random:cochange".to_string(),
                }];
            }
            _ => {}
        }
    }
    Vec::new()
}

/// All co-changed files in dataset order — the offline proxy for the files
/// a developer has open.
pub fn collect_recent_files(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let snippets = point
        .co_changed_files
        .iter()
        .filter_map(|path| snapshot.file(path).map(|text| (path, text)))
        .filter(|(_, text)| !text.is_empty())
        .enumerate()
        .map(|(i, (path, text))| Snippet {
            file_path: path.clone(),
            text: text.to_string(),
            score: 1.0 / (i + 1) as f64,
            provenance: "recent:cochange".to_string(),
        })
        .collect();
    finish(snippets, point, snapshot, cfg)
}

/// The single closest file by BM25 over a caret-window query.
pub fn collect_bm25_file(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let corpus = file_corpus(snapshot, Some(&point.file_path));
    let mut snippets = Vec::new();
    if !corpus.is_empty() {
        let index = bm25_build(&corpus);
        let query = retrieval_query(point, cfg);
        if let Some(hit) = bm25_top_k(&index, &query, 1).into_iter().next() {
            let text = snapshot.file(&hit.doc_id).expect("doc ids come from the snapshot");
            snippets.push(Snippet {
                file_path: hit.doc_id,
                text: text.to_string(),
                score: hit.score,
                provenance: "bm25_file:bm25".to_string(),
            });
        }
    }
    finish(snippets, point, snapshot, cfg)
}

/// Hybrid chunk retrieval: overlapping line windows over the snapshot,
/// prefix-tail and suffix-head queries, BM25 and dense rankings fused per
/// query, both fused lists fused again, and each retrieved chunk extended
/// with its adjacent window (following for prefix hits, preceding for
/// suffix hits). Snippet order: the completion file's snapshot content,
/// then co-changed files, then retrieved chunks by fused score.
pub fn collect_hybrid_chunks(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let window = cfg.line_window.max(1);
    let stride = cfg.line_stride.clamp(1, window);
    let mut chunks: BTreeMap<String, Chunk> = BTreeMap::new();
    for (path, text) in file_corpus(snapshot, Some(&point.file_path)) {
        let windows = line_window_chunks(&path, &text, window, stride)
            .expect("window arguments are clamped to valid ranges");
        for chunk in windows {
            chunks.insert(chunk.chunk_id.clone(), chunk);
        }
    }
    let docs: Vec<(String, String)> =
        chunks.values().map(|c| (c.chunk_id.clone(), c.text.clone())).collect();

    let mut prefix_ranking = Vec::new();
    let mut suffix_ranking = Vec::new();
    if !docs.is_empty() {
        let bm25 = bm25_build(&docs);
        let dense = dense_build(&docs, cfg.dense_dim);
        let fused_for = |query: &str| -> Vec<String> {
            if query.is_empty() {
                return Vec::new();
            }
            let sparse: Vec<String> =
                bm25_top_k(&bm25, query, cfg.top_k).into_iter().map(|c| c.doc_id).collect();
            let semantic: Vec<String> =
                dense_top_k(&dense, query, cfg.top_k).into_iter().map(|c| c.doc_id).collect();
            rrf_fuse(&[sparse, semantic], cfg.rrf_k).into_iter().map(|c| c.doc_id).collect()
        };
        prefix_ranking = fused_for(&tail_lines(&point.prefix, cfg.prefix_query_lines));
        suffix_ranking = fused_for(&head_lines(&point.suffix, cfg.suffix_query_lines));
    }
    let final_ranking = rrf_fuse(&[prefix_ranking.clone(), suffix_ranking], cfg.rrf_k);

    let mut snippets = Vec::new();
    let top_fused = final_ranking.first().map_or(0.0, |c| c.score);
    if let Some(text) = snapshot.file(&point.file_path) {
        if !text.is_empty() {
            snippets.push(Snippet {
                file_path: point.file_path.clone(),
                text: text.to_string(),
                score: top_fused + 1.5,
                provenance: "hybrid:current_file".to_string(),
            });
        }
    }
    for (i, path) in point.co_changed_files.iter().enumerate() {
        if let Some(text) = snapshot.file(path) {
            if !text.is_empty() && path != &point.file_path {
                snippets.push(Snippet {
                    file_path: path.clone(),
                    text: text.to_string(),
                    score: top_fused + 1.0 / (i + 1) as f64,
                    provenance: "hybrid:cochange".to_string(),
                });
            }
        }
    }
    for candidate in final_ranking {
        let chunk = &chunks[&candidate.doc_id];
        let from_prefix = prefix_ranking.contains(&candidate.doc_id);
        let direction = if from_prefix { Direction::Next } else { Direction::Prev };
        let neighbour = adjacent_chunk(chunk, snapshot, direction)
            .expect("chunk paths come from the snapshot");
        let (text, signal) = match (direction, neighbour) {
            // The adjacent window is contiguous with the chunk, so the
            // joined text is still a verbatim slice of the file.
            (Direction::Next, Some(next)) => {
                (format!("{}{}", chunk.text, next.text), "hybrid:fused+next")
            }
            (Direction::Prev, Some(prev)) => {
                (format!("{}{}", prev.text, chunk.text), "hybrid:fused+prev")
            }
            (_, None) => (chunk.text.clone(), "hybrid:fused"),
        };
        snippets.push(Snippet {
            file_path: chunk.file_path.clone(),
            text,
            score: candidate.score,
            provenance: signal.to_string(),
        });
    }
    finish(snippets, point, snapshot, cfg)
}

/// Imported files (size-capped) followed by the definitions of every symbol
/// referenced near the caret, in symbol-proximity order. With no candidates
/// at all, falls back to [`collect_random_cochange`].
pub fn collect_symbol_defs(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let live_text = format!("{}{}", point.prefix, point.suffix);
    let mut snippets = Vec::new();
    let mut imported_line_cover: BTreeMap<String, usize> = BTreeMap::new();

    for path in imported_files(&live_text, snapshot, cfg.language) {
        let Some(text) = snapshot.file(&path) else { continue };
        let capped = head_lines(text, cfg.import_file_line_cap);
        if capped.is_empty() {
            continue;
        }
        imported_line_cover.insert(path.clone(), crate::util::inclusive_lines(&capped).len());
        snippets.push(Snippet {
            file_path: path,
            text: capped,
            score: 2.0,
            provenance: "symbol_defs:import".to_string(),
        });
    }

    let extension = match cfg.language {
        crate::lang::Language::Python => ".py",
        crate::lang::Language::Kotlin => ".kt",
    };
    type DefSite<'a> = (&'a String, (usize, usize), &'a str);
    let mut definitions: BTreeMap<&str, Vec<DefSite>> = BTreeMap::new();
    let mut parsed: Vec<(&String, Vec<crate::parse::SymbolDef>)> = Vec::new();
    for (path, text) in snapshot.files() {
        if path.ends_with(extension) || path.ends_with(".kts") && extension == ".kt" {
            parsed.push((path, extract_definitions(path, text, cfg.language)));
        }
    }
    for (path, defs) in &parsed {
        for def in defs {
            definitions.entry(&def.name).or_default().push((path, def.span, &def.text));
        }
    }

    let mut seen: std::collections::BTreeSet<(String, (usize, usize))> = Default::default();
    for (rank, symbol) in extract_referenced_symbols(&point.prefix, &point.suffix)
        .into_iter()
        .enumerate()
    {
        let Some(defs) = definitions.get(symbol.name.as_str()) else { continue };
        let mut defs = defs.clone();
        defs.sort_by_key(|(path, span, _)| ((*path).clone(), span.0));
        for (path, span, text) in defs {
            if !seen.insert((path.clone(), span)) {
                continue;
            }
            // Already fully covered by an imported-file snippet.
            if imported_line_cover.get(path).is_some_and(|covered| span.1 < *covered) {
                continue;
            }
            snippets.push(Snippet {
                file_path: path.clone(),
                text: text.to_string(),
                score: 1.0 / (rank + 1) as f64,
                provenance: format!("symbol_defs:def:{}", symbol.name),
            });
        }
    }

    if snippets.is_empty() {
        return collect_random_cochange(point, snapshot, cfg);
    }
    finish(snippets, point, snapshot, cfg)
}

/// BM25 over augmented definition blocks, queried with the enclosing blocks
/// on both sides of the caret; per-query hits merged by score and
/// deduplicated by chunk id.
pub fn collect_block_bm25(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let mut blocks: BTreeMap<String, Chunk> = BTreeMap::new();
    for (path, text) in file_corpus(snapshot, None) {
        for chunk in block_chunks(&path, &text, cfg.language) {
            blocks.insert(chunk.chunk_id.clone(), chunk);
        }
    }
    let docs: Vec<(String, String)> =
        blocks.values().map(|c| (c.chunk_id.clone(), c.text.clone())).collect();

    let mut snippets = Vec::new();
    if !docs.is_empty() {
        let index = bm25_build(&docs);
        let (before, after) = enclosing_blocks(&point.prefix, &point.suffix, cfg.language);
        let mut best: BTreeMap<String, f64> = BTreeMap::new();
        for query in [before, after] {
            if query.is_empty() {
                continue;
            }
            for hit in bm25_top_k(&index, &query, cfg.top_k) {
                let entry = best.entry(hit.doc_id).or_insert(f64::MIN);
                *entry = entry.max(hit.score);
            }
        }
        let mut merged: Vec<(String, f64)> = best.into_iter().collect();
        merged.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for (chunk_id, score) in merged {
            let chunk = &blocks[&chunk_id];
            snippets.push(Snippet {
                file_path: chunk.file_path.clone(),
                text: chunk.text.clone(),
                score,
                provenance: "block_bm25:bm25".to_string(),
            });
        }
    }
    finish(snippets, point, snapshot, cfg)
}

/// Disjunctive trigram search over whole files, with clauses drawn from the
/// symbols closest to the caret: the nearest `clause_size` symbols form the
/// first clause and the next batch the second; fewer than five symbols form
/// a single clause.
pub fn collect_trigram(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let symbols: Vec<String> = extract_referenced_symbols(&point.prefix, &point.suffix)
        .into_iter()
        .take(cfg.max_symbols)
        .map(|s| s.name)
        .collect();

    let mut snippets = Vec::new();
    if !symbols.is_empty() {
        let clauses: Vec<Vec<String>> = if symbols.len() < 5 {
            vec![symbols]
        } else {
            symbols.chunks(cfg.clause_size.max(1)).map(|c| c.to_vec()).collect()
        };
        let corpus = file_corpus(snapshot, None);
        let index = trigram_build(&corpus);
        for hit in trigram_search(&index, &clauses, cfg.top_k) {
            let text = snapshot.file(&hit.doc_id).expect("doc ids come from the snapshot");
            snippets.push(Snippet {
                file_path: hit.doc_id,
                text: text.to_string(),
                score: hit.score,
                provenance: "trigram:clauses".to_string(),
            });
        }
    }
    finish(snippets, point, snapshot, cfg)
}

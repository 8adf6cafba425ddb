//! Context-collection strategies: map one completion point plus its
//! repository snapshot to an ordered snippet list, optionally re-rank it,
//! and assemble the survivors into a budgeted, separator-delimited context
//! string.
//!
//! Every strategy is deterministic given `(point, snapshot, config)`
//! including the RNG seed, and only ever reads snapshot content — the
//! snapshot predates the edit, so ground truth cannot leak into a context.

mod assemble;
mod rerank;
mod strategies;

pub use assemble::assemble;
pub use rerank::heuristic_rerank;
pub use strategies::{
    collect_block_bm25, collect_bm25_file, collect_empty, collect_hybrid_chunks,
    collect_random_cochange, collect_recent_files, collect_symbol_defs, collect_trigram,
};

use crate::dataset::{CompletionPoint, RepoSnapshot};
use crate::lang::Language;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The canonical snippet separator of submitted contexts. Prompt rendering
/// re-maps it to each model's own file-separator token.
pub const FILE_SEP: &str = "<|file_sep|>";

/// One ordered piece of context: a file or chunk with the retrieval score
/// and signal that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snippet {
    pub file_path: String,
    pub text: String,
    pub score: f64,
    /// `strategy:signal`, e.g. `hybrid:fused+next`.
    pub provenance: String,
}

/// The assembled context: included snippets, their rendered serialization,
/// and the budget units they consumed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextDocument {
    pub snippets: Vec<Snippet>,
    pub rendered: String,
    pub budget_units_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Empty,
    Random,
    Recent,
    Bm25File,
    Hybrid,
    SymbolDefs,
    BlockBm25,
    Trigram,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Empty,
        Strategy::Random,
        Strategy::Recent,
        Strategy::Bm25File,
        Strategy::Hybrid,
        Strategy::SymbolDefs,
        Strategy::BlockBm25,
        Strategy::Trigram,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Empty => "empty",
            Strategy::Random => "random",
            Strategy::Recent => "recent",
            Strategy::Bm25File => "bm25_file",
            Strategy::Hybrid => "hybrid",
            Strategy::SymbolDefs => "symbol_defs",
            Strategy::BlockBm25 => "block_bm25",
            Strategy::Trigram => "trigram",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Strategy::ALL.iter().map(|s| s.as_str()).collect();
                format!("unknown strategy `{s}` (valid: {})", names.join(", "))
            })
    }
}

/// Per-signal weights for [`heuristic_rerank`]. All-zero weights leave
/// snippet order untouched.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicWeights {
    /// Bonus when a snippet defines a symbol referenced near the caret.
    pub referenced_def: f64,
    /// Penalty weight on the directory distance to the completion file.
    pub path_distance: f64,
    /// Weight on `ln(1 + incoming references)` of the snippet's primary symbol.
    pub incoming_refs: f64,
}

/// All strategy knobs. Every constant that is a declared assumption rather
/// than a published value lives here and can be overridden from the config
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollectorConfig {
    pub strategy: Strategy,
    pub language: Language,
    /// Context budget; 1 unit covers 4 characters.
    pub budget_units: usize,
    /// Results per retriever before fusion.
    pub top_k: usize,
    pub rng_seed: u64,
    pub weights: HeuristicWeights,
    /// Apply [`heuristic_rerank`] between collection and assembly.
    pub rerank: bool,
    /// Prefix lines feeding retrieval queries.
    pub prefix_query_lines: usize,
    /// Suffix lines feeding retrieval queries.
    pub suffix_query_lines: usize,
    /// Symbols considered by the trigram strategy.
    pub max_symbols: usize,
    /// Literals per disjunctive clause.
    pub clause_size: usize,
    /// Line cap for imported-file snippets.
    pub import_file_line_cap: usize,
    pub line_window: usize,
    pub line_stride: usize,
    pub char_window_size: usize,
    pub char_window_overlap: usize,
    pub rrf_k: f64,
    pub dense_dim: usize,
}

impl Default for CollectorConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Empty,
            language: Language::Python,
            budget_units: 8000,
            top_k: 10,
            rng_seed: 0,
            weights: HeuristicWeights::default(),
            rerank: false,
            prefix_query_lines: 50,
            suffix_query_lines: 10,
            max_symbols: 8,
            clause_size: 4,
            import_file_line_cap: 200,
            line_window: crate::chunk::DEFAULT_LINE_WINDOW,
            line_stride: crate::chunk::DEFAULT_LINE_STRIDE,
            char_window_size: crate::chunk::DEFAULT_CHAR_SIZE,
            char_window_overlap: crate::chunk::DEFAULT_CHAR_OVERLAP,
            rrf_k: crate::index::DEFAULT_RRF_K,
            dense_dim: crate::index::DEFAULT_DIM,
        }
    }
}

/// Run the configured strategy end to end: gather, optionally re-rank,
/// assemble under budget.
pub fn collect(
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    match cfg.strategy {
        Strategy::Empty => collect_empty(point, snapshot, cfg),
        Strategy::Random => collect_random_cochange(point, snapshot, cfg),
        Strategy::Recent => collect_recent_files(point, snapshot, cfg),
        Strategy::Bm25File => collect_bm25_file(point, snapshot, cfg),
        Strategy::Hybrid => collect_hybrid_chunks(point, snapshot, cfg),
        Strategy::SymbolDefs => collect_symbol_defs(point, snapshot, cfg),
        Strategy::BlockBm25 => collect_block_bm25(point, snapshot, cfg),
        Strategy::Trigram => collect_trigram(point, snapshot, cfg),
    }
}

/// Shared tail of every strategy: optional re-rank, then budgeted assembly.
pub(crate) fn finish(
    snippets: Vec<Snippet>,
    point: &CompletionPoint,
    snapshot: &RepoSnapshot,
    cfg: &CollectorConfig,
) -> ContextDocument {
    let snippets = if cfg.rerank {
        heuristic_rerank(snippets, point, snapshot, &cfg.weights, cfg.language)
    } else {
        snippets
    };
    assemble(snippets, cfg.budget_units)
}

//! Syntax-aware extraction of definitions, referenced symbols, and enclosing
//! blocks from source text.
//!
//! There is no external parser runtime behind this module: the Python backend
//! is an indentation scanner and the Kotlin backend a brace matcher. Both are
//! best-effort — on malformed input they skip degenerate regions and record a
//! diagnostic instead of failing.

mod kotlin;
mod python;

use crate::lang::Language;
use crate::util::{head_lines, inclusive_lines, tail_lines};
use std::collections::BTreeMap;

/// Number of fallback lines used by [`enclosing_blocks`] when no complete
/// top-level block exists on one side of the caret.
pub const BLOCK_FALLBACK_LINES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Function,
    Class,
    Object,
    Variable,
    Import,
}

/// One extracted definition. `text` is always a verbatim slice of the file
/// covering `span` (0-based inclusive line range).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDef {
    pub name: String,
    pub kind: SymbolKind,
    pub file_path: String,
    pub span: (usize, usize),
    pub text: String,
    /// For class-nested functions only: the definition re-emitted with the
    /// parent class header line prepended, so a retrieval unit keeps its
    /// enclosing context.
    pub augmented: Option<String>,
}

/// A symbol mentioned near the caret, ranked by proximity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSymbol {
    pub name: String,
    /// Character distance from the caret to the nearest occurrence.
    pub distance_chars: usize,
    pub occurrences: usize,
}

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

const KOTLIN_KEYWORDS: &[&str] = &[
    "as", "break", "class", "continue", "do", "else", "false", "for", "fun", "if", "in",
    "interface", "is", "null", "object", "package", "return", "super", "this", "throw",
    "true", "try", "typealias", "typeof", "val", "var", "when", "while",
];

fn is_keyword(name: &str) -> bool {
    PYTHON_KEYWORDS.contains(&name) || KOTLIN_KEYWORDS.contains(&name)
}

/// Definitions in `file_text`, discarding any parser diagnostics.
pub fn extract_definitions(file_path: &str, file_text: &str, language: Language) -> Vec<SymbolDef> {
    extract_definitions_with_diagnostics(file_path, file_text, language).0
}

/// Definitions plus diagnostics for regions the backend had to skip.
pub fn extract_definitions_with_diagnostics(
    file_path: &str,
    file_text: &str,
    language: Language,
) -> (Vec<SymbolDef>, Vec<String>) {
    match language {
        Language::Python => python::extract(file_path, file_text),
        Language::Kotlin => kotlin::extract(file_path, file_text),
    }
}

/// Identifiers mentioned in the prefix and suffix, nearest to the caret
/// first. Identifiers are letter/digit/underscore runs that do not start
/// with a digit; Python and Kotlin keywords are dropped. Ties on distance
/// break by higher occurrence count, then lexicographically.
pub fn extract_referenced_symbols(prefix: &str, suffix: &str) -> Vec<RankedSymbol> {
    // name -> (min distance, occurrences)
    let mut table: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let prefix_len = prefix.chars().count();

    for (name, end) in identifier_runs(prefix) {
        let distance = prefix_len - end;
        let entry = table.entry(name).or_insert((usize::MAX, 0));
        entry.0 = entry.0.min(distance);
        entry.1 += 1;
    }
    for (name, end) in identifier_runs(suffix) {
        let start = end - name.chars().count();
        let entry = table.entry(name).or_insert((usize::MAX, 0));
        entry.0 = entry.0.min(start);
        entry.1 += 1;
    }

    let mut symbols: Vec<RankedSymbol> = table
        .into_iter()
        .filter(|(name, _)| !is_keyword(name))
        .map(|(name, (distance_chars, occurrences))| RankedSymbol { name, distance_chars, occurrences })
        .collect();
    symbols.sort_by(|a, b| {
        a.distance_chars
            .cmp(&b.distance_chars)
            .then(b.occurrences.cmp(&a.occurrences))
            .then(a.name.cmp(&b.name))
    });
    symbols
}

/// Identifier runs in `text` as (name, exclusive end char index).
fn identifier_runs(text: &str) -> Vec<(String, usize)> {
    let mut runs = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (i, ch) in text.chars().enumerate() {
        if ch.is_ascii_alphanumeric() || ch == '_' {
            if current.is_empty() {
                start = i;
            }
            current.push(ch);
        } else if !current.is_empty() {
            push_run(&mut runs, std::mem::take(&mut current), start, i);
        }
    }
    if !current.is_empty() {
        let end = text.chars().count();
        push_run(&mut runs, current, start, end);
    }
    runs
}

fn push_run(runs: &mut Vec<(String, usize)>, run: String, start: usize, end: usize) {
    debug_assert_eq!(end - start, run.chars().count());
    let starts_with_digit = run.chars().next().is_some_and(|c| c.is_ascii_digit());
    if !starts_with_digit {
        runs.push((run, end));
    }
}

/// The last complete top-level function/class block contained in the prefix
/// and the first one starting in the suffix. Falls back to the trailing
/// (resp. leading) [`BLOCK_FALLBACK_LINES`] lines when no block exists.
pub fn enclosing_blocks(prefix: &str, suffix: &str, language: Language) -> (String, String) {
    let top_level_block = |defs: Vec<SymbolDef>, text: &str| -> Vec<SymbolDef> {
        let lines = inclusive_lines(text);
        defs.into_iter()
            .filter(|d| {
                matches!(d.kind, SymbolKind::Function | SymbolKind::Class)
                    && lines
                        .get(d.span.0)
                        .is_some_and(|l| !l.starts_with(' ') && !l.starts_with('\t'))
            })
            .collect()
    };

    let before_defs = top_level_block(extract_definitions("", prefix, language), prefix);
    let before = match before_defs.into_iter().max_by_key(|d| d.span.1) {
        Some(def) => def.text,
        None => tail_lines(prefix, BLOCK_FALLBACK_LINES),
    };

    let after = if suffix.is_empty() {
        String::new()
    } else {
        let after_defs = top_level_block(extract_definitions("", suffix, language), suffix);
        match after_defs.into_iter().min_by_key(|d| d.span.0) {
            Some(def) => def.text,
            None => head_lines(suffix, BLOCK_FALLBACK_LINES),
        }
    };

    (before, after)
}

/// Snapshot paths imported by `file_text`. Unresolvable imports are omitted.
///
/// Python: dotted module paths resolve root-relative to `a/b.py` or
/// `a/b/__init__.py`; when that fails, a unique path-suffix match is
/// accepted. Kotlin: `import a.b.C` matches files declaring `package a.b`
/// that define `C` at the top level; `import a.b.*` matches every file
/// declaring the package.
pub fn imported_files(
    file_text: &str,
    snapshot: &crate::dataset::RepoSnapshot,
    language: Language,
) -> Vec<String> {
    match language {
        Language::Python => python::imported_files(file_text, snapshot),
        Language::Kotlin => kotlin::imported_files(file_text, snapshot),
    }
}

#[cfg(test)]
mod tests;

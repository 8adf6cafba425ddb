//! Retrieval units: overlapping line windows, overlapping character windows,
//! and definition blocks, plus adjacency navigation between a unit and its
//! neighbour window in the original file.
//!
//! Line splitting keeps trailing newlines, so every line-based chunk text is
//! a verbatim slice of its file and concatenating the non-overlapping
//! portions of successive windows reconstructs the file exactly.

use crate::dataset::RepoSnapshot;
use crate::lang::Language;
use crate::parse::{extract_definitions, SymbolKind};
use crate::util::inclusive_lines;
use thiserror::Error;

pub const DEFAULT_LINE_WINDOW: usize = 30;
pub const DEFAULT_LINE_STRIDE: usize = 15;
pub const DEFAULT_CHAR_SIZE: usize = 2000;
pub const DEFAULT_CHAR_OVERLAP: usize = 500;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChunkError {
    #[error("invalid chunk arguments: {0}")]
    InvalidArgs(String),
    #[error("path `{0}` not present in snapshot")]
    MissingPath(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChunkKind {
    LineWindow,
    CharWindow,
    Block,
}

impl ChunkKind {
    fn tag(self) -> &'static str {
        match self {
            ChunkKind::LineWindow => "L",
            ChunkKind::CharWindow => "C",
            ChunkKind::Block => "B",
        }
    }
}

/// A contiguous slice of one file. `chunk_id` is deterministic
/// (`path#kind:start`), unique within a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub chunk_id: String,
    pub file_path: String,
    /// 0-based inclusive line span.
    pub start_line: usize,
    pub end_line: usize,
    pub text: String,
    pub kind: ChunkKind,
    /// Character span for [`ChunkKind::CharWindow`] chunks.
    pub char_span: Option<(usize, usize)>,
}

fn make_id(path: &str, kind: ChunkKind, start: usize) -> String {
    format!("{path}#{}:{start}", kind.tag())
}

/// Overlapping line windows starting at lines `0, stride, 2*stride, ...`.
/// The final partial window is kept when non-empty.
pub fn line_window_chunks(
    file_path: &str,
    text: &str,
    window: usize,
    stride: usize,
) -> Result<Vec<Chunk>, ChunkError> {
    if window < 1 || stride < 1 || stride > window {
        return Err(ChunkError::InvalidArgs(format!(
            "window={window} stride={stride} (need window >= 1 and 1 <= stride <= window)"
        )));
    }
    let lines = inclusive_lines(text);
    let mut chunks = Vec::new();
    let mut start = 0usize;
    while start < lines.len() {
        let end = (start + window).min(lines.len()) - 1;
        chunks.push(Chunk {
            chunk_id: make_id(file_path, ChunkKind::LineWindow, start),
            file_path: file_path.to_string(),
            start_line: start,
            end_line: end,
            text: lines[start..=end].concat(),
            kind: ChunkKind::LineWindow,
            char_span: None,
        });
        start += stride;
    }
    Ok(chunks)
}

/// Overlapping character windows advancing by `size - overlap`.
pub fn char_window_chunks(
    file_path: &str,
    text: &str,
    size: usize,
    overlap: usize,
) -> Result<Vec<Chunk>, ChunkError> {
    if size < 1 || overlap >= size {
        return Err(ChunkError::InvalidArgs(format!(
            "size={size} overlap={overlap} (need size >= 1 and overlap < size)"
        )));
    }
    let chars: Vec<char> = text.chars().collect();
    let step = size - overlap;
    let mut chunks = Vec::new();
    let mut start = 0usize;
    while start < chars.len() {
        let end = (start + size).min(chars.len());
        chunks.push(char_window_at(file_path, &chars, start, end));
        start += step;
    }
    Ok(chunks)
}

fn char_window_at(file_path: &str, chars: &[char], start: usize, end: usize) -> Chunk {
    let line_of = |pos: usize| chars[..pos].iter().filter(|c| **c == '\n').count();
    Chunk {
        chunk_id: make_id(file_path, ChunkKind::CharWindow, start),
        file_path: file_path.to_string(),
        start_line: line_of(start),
        end_line: line_of(end.saturating_sub(1)),
        text: chars[start..end].iter().collect(),
        kind: ChunkKind::CharWindow,
        char_span: Some((start, end)),
    }
}

/// One chunk per function/class definition, using the augmented variant
/// (parent class header prepended) for methods.
pub fn block_chunks(file_path: &str, text: &str, language: Language) -> Vec<Chunk> {
    extract_definitions(file_path, text, language)
        .into_iter()
        .filter(|d| matches!(d.kind, SymbolKind::Function | SymbolKind::Class))
        .map(|d| Chunk {
            chunk_id: make_id(file_path, ChunkKind::Block, d.span.0),
            file_path: file_path.to_string(),
            start_line: d.span.0,
            end_line: d.span.1,
            text: d.augmented.unwrap_or(d.text),
            kind: ChunkKind::Block,
            char_span: None,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Next,
    Prev,
}

/// The same-size window immediately after (or before) `chunk` in its file,
/// clipped at file boundaries; `None` when the chunk already touches the
/// boundary. Line-based inputs yield line windows; char-based yield char
/// windows.
pub fn adjacent_chunk(
    chunk: &Chunk,
    snapshot: &RepoSnapshot,
    direction: Direction,
) -> Result<Option<Chunk>, ChunkError> {
    let file = snapshot
        .file(&chunk.file_path)
        .ok_or_else(|| ChunkError::MissingPath(chunk.file_path.clone()))?;

    if chunk.kind == ChunkKind::CharWindow {
        let (start, end) = chunk.char_span.unwrap_or((0, 0));
        let chars: Vec<char> = file.chars().collect();
        let size = end.saturating_sub(start).max(1);
        return Ok(match direction {
            Direction::Next if end < chars.len() => {
                Some(char_window_at(&chunk.file_path, &chars, end, (end + size).min(chars.len())))
            }
            Direction::Prev if start > 0 => {
                Some(char_window_at(&chunk.file_path, &chars, start.saturating_sub(size), start))
            }
            _ => None,
        });
    }

    let lines = inclusive_lines(file);
    let size = chunk.end_line - chunk.start_line + 1;
    let span = match direction {
        Direction::Next => {
            if chunk.end_line + 1 >= lines.len() {
                return Ok(None);
            }
            let start = chunk.end_line + 1;
            (start, (start + size - 1).min(lines.len() - 1))
        }
        Direction::Prev => {
            if chunk.start_line == 0 {
                return Ok(None);
            }
            (chunk.start_line.saturating_sub(size), chunk.start_line - 1)
        }
    };
    Ok(Some(Chunk {
        chunk_id: make_id(&chunk.file_path, ChunkKind::LineWindow, span.0),
        file_path: chunk.file_path.clone(),
        start_line: span.0,
        end_line: span.1,
        text: lines[span.0..=span.1].concat(),
        kind: ChunkKind::LineWindow,
        char_span: None,
    }))
}

//! Kotlin backend: a brace matcher.
//!
//! The file is first re-rendered with every comment, string, and character
//! literal blanked out (newlines kept), so structural scanning can count
//! braces and parentheses with plain character matches. String templates
//! (`"${...}"`) are blanked including their expression holes. Definition
//! text is always sliced from the original lines.

use super::{SymbolDef, SymbolKind};
use crate::dataset::RepoSnapshot;
use crate::util::inclusive_lines;

const MODIFIERS: &[&str] = &[
    "abstract", "actual", "annotation", "companion", "const", "crossinline", "data", "enum",
    "expect", "external", "final", "infix", "inline", "inner", "internal", "lateinit",
    "noinline", "open", "operator", "override", "private", "protected", "public", "sealed",
    "suspend", "tailrec", "value", "vararg",
];

/// Blank out comments, strings, and char literals; keep newlines and code.
fn strip_noncode(text: &str) -> String {
    #[derive(Clone, Copy, PartialEq)]
    enum Mode {
        Code,
        Line,
        Block(u32),
        Str,
        RawStr,
        Char,
    }

    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut mode = Mode::Code;
    // String-template holes: (string mode to return to, open brace count).
    let mut holes: Vec<(Mode, u32)> = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            if mode == Mode::Line {
                mode = Mode::Code;
            }
            out.push('\n');
            i += 1;
            continue;
        }
        match mode {
            Mode::Code => {
                if c == '/' && chars.get(i + 1) == Some(&'/') {
                    mode = Mode::Line;
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                if c == '/' && chars.get(i + 1) == Some(&'*') {
                    mode = Mode::Block(1);
                    out.push_str("  ");
                    i += 2;
                    continue;
                }
                if c == '"' {
                    if chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                        mode = Mode::RawStr;
                        out.push_str("   ");
                        i += 3;
                    } else {
                        mode = Mode::Str;
                        out.push(' ');
                        i += 1;
                    }
                    continue;
                }
                if c == '\'' {
                    mode = Mode::Char;
                    out.push(' ');
                    i += 1;
                    continue;
                }
                if let Some(hole) = holes.last_mut() {
                    // Inside a template hole: structurally string content.
                    if c == '{' {
                        hole.1 += 1;
                    } else if c == '}' {
                        if hole.1 == 0 {
                            mode = holes.pop().unwrap().0;
                        } else {
                            hole.1 -= 1;
                        }
                    }
                    out.push(' ');
                    i += 1;
                    continue;
                }
                out.push(c);
                i += 1;
            }
            Mode::Line => {
                out.push(' ');
                i += 1;
            }
            Mode::Block(depth) => {
                if c == '/' && chars.get(i + 1) == Some(&'*') {
                    mode = Mode::Block(depth + 1);
                    out.push_str("  ");
                    i += 2;
                } else if c == '*' && chars.get(i + 1) == Some(&'/') {
                    mode = if depth == 1 { Mode::Code } else { Mode::Block(depth - 1) };
                    out.push_str("  ");
                    i += 2;
                } else {
                    out.push(' ');
                    i += 1;
                }
            }
            Mode::Str => {
                if c == '\\' {
                    out.push(' ');
                    if let Some(&next) = chars.get(i + 1) {
                        out.push(if next == '\n' { '\n' } else { ' ' });
                    }
                    i += 2;
                } else if c == '$' && chars.get(i + 1) == Some(&'{') {
                    holes.push((Mode::Str, 0));
                    mode = Mode::Code;
                    out.push_str("  ");
                    i += 2;
                } else {
                    if c == '"' {
                        mode = Mode::Code;
                    }
                    out.push(' ');
                    i += 1;
                }
            }
            Mode::RawStr => {
                if c == '"' && chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                    mode = Mode::Code;
                    out.push_str("   ");
                    i += 3;
                } else if c == '$' && chars.get(i + 1) == Some(&'{') {
                    holes.push((Mode::RawStr, 0));
                    mode = Mode::Code;
                    out.push_str("  ");
                    i += 2;
                } else {
                    out.push(' ');
                    i += 1;
                }
            }
            Mode::Char => {
                if c == '\\' {
                    out.push(' ');
                    if let Some(&next) = chars.get(i + 1) {
                        out.push(if next == '\n' { '\n' } else { ' ' });
                    }
                    i += 2;
                } else {
                    if c == '\'' {
                        mode = Mode::Code;
                    }
                    out.push(' ');
                    i += 1;
                }
            }
        }
    }
    out
}

fn word_is_identifier(w: &str) -> bool {
    let mut chars = w.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parse `modifiers* keyword name` from a stripped declaration line.
fn parse_decl(line: &str) -> Option<(SymbolKind, String)> {
    let mut rest = line.trim_start();
    loop {
        let word: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        if word.is_empty() {
            return None;
        }
        let after = rest[word.len()..].trim_start();
        let kind = match word.as_str() {
            "fun" => Some(SymbolKind::Function),
            "class" | "interface" => Some(SymbolKind::Class),
            "object" => Some(SymbolKind::Object),
            "val" | "var" => Some(SymbolKind::Variable),
            _ => None,
        };
        if let Some(kind) = kind {
            return decl_name(after, kind).map(|name| (kind, name));
        }
        if !MODIFIERS.contains(&word.as_str()) {
            return None;
        }
        rest = after;
    }
}

fn decl_name(after_keyword: &str, kind: SymbolKind) -> Option<String> {
    let mut rest = after_keyword.trim_start();
    // Skip a generic parameter list: `fun <T> name(...)`.
    if rest.starts_with('<') {
        let mut depth = 0i32;
        let mut cut = rest.len();
        for (idx, c) in rest.char_indices() {
            match c {
                '<' => depth += 1,
                '>' => {
                    depth -= 1;
                    if depth == 0 {
                        cut = idx + 1;
                        break;
                    }
                }
                _ => {}
            }
        }
        rest = rest[cut..].trim_start();
    }
    if kind == SymbolKind::Function {
        // `fun Receiver.name(` — keep the last dotted segment.
        let head: String = rest.chars().take_while(|c| *c != '(' && *c != '\n').collect();
        let name = head.trim().rsplit('.').next()?.trim().to_string();
        return word_is_identifier(&name).then_some(name);
    }
    let name: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
    word_is_identifier(&name).then_some(name)
}

struct Layout<'a> {
    original: Vec<&'a str>,
    stripped: Vec<String>,
    /// Brace depth at the start of each line.
    depth_at_start: Vec<i32>,
    /// Paren/bracket depth at the start of each line.
    paren_at_start: Vec<i32>,
}

fn layout(text: &str) -> Layout<'_> {
    let original = inclusive_lines(text);
    let stripped_text = strip_noncode(text);
    let stripped: Vec<String> = inclusive_lines(&stripped_text).iter().map(|s| s.to_string()).collect();
    debug_assert_eq!(original.len(), stripped.len());

    let mut depth_at_start = Vec::with_capacity(original.len() + 1);
    let mut paren_at_start = Vec::with_capacity(original.len() + 1);
    let mut brace = 0i32;
    let mut paren = 0i32;
    for line in &stripped {
        depth_at_start.push(brace);
        paren_at_start.push(paren);
        for c in line.chars() {
            match c {
                '{' => brace += 1,
                '}' => brace -= 1,
                '(' | '[' => paren += 1,
                ')' | ']' => paren -= 1,
                _ => {}
            }
        }
    }
    depth_at_start.push(brace);
    paren_at_start.push(paren);
    Layout { original, stripped, depth_at_start, paren_at_start }
}

/// End line of a declaration starting at `start`, plus the line of its `{`
/// when it has a brace body. `None` when braces never close (degenerate).
fn decl_extent(lay: &Layout<'_>, start: usize) -> Option<(usize, Option<usize>)> {
    let mut paren = 0i32;
    let mut brace = 0i32;
    let mut seen_eq = false;
    let mut body_open: Option<usize> = None;
    for j in start..lay.stripped.len() {
        for c in lay.stripped[j].chars() {
            match c {
                '(' | '[' => paren += 1,
                ')' | ']' => paren -= 1,
                '{' => {
                    if paren == 0 && body_open.is_none() {
                        body_open = Some(j);
                    }
                    brace += 1;
                }
                '}' => {
                    brace -= 1;
                    if body_open.is_some() && brace == 0 {
                        return Some((j, body_open));
                    }
                }
                '=' if paren == 0 && body_open.is_none() => seen_eq = true,
                _ => {}
            }
        }
        if body_open.is_none() && paren <= 0 {
            let tail = lay.stripped[j].trim_end();
            let continued = tail.ends_with([':', ',', '=', '.', '+', '?']) || tail.ends_with("->");
            // A brace-less header whose `{` sits on the next line is still
            // one declaration.
            let opens_next = !seen_eq && next_code_line_opens_brace(lay, j);
            if !continued && !opens_next && (seen_eq || !tail.is_empty() || j > start) {
                return Some((j, None));
            }
        }
    }
    if body_open.is_some() {
        None // unbalanced braces
    } else {
        Some((lay.stripped.len().saturating_sub(1), None))
    }
}

fn next_code_line_opens_brace(lay: &Layout<'_>, after: usize) -> bool {
    lay.stripped
        .iter()
        .skip(after + 1)
        .map(|line| line.trim())
        .find(|line| !line.is_empty())
        .is_some_and(|line| line.starts_with('{'))
}

pub(super) fn extract(file_path: &str, text: &str) -> (Vec<SymbolDef>, Vec<String>) {
    if text.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let lay = layout(text);
    let mut defs = Vec::new();
    let mut diags = Vec::new();
    scan_decls(&lay, 0..lay.original.len(), 0, file_path, true, None, &mut defs, &mut diags);
    (defs, diags)
}

#[allow(clippy::too_many_arguments)]
fn scan_decls(
    lay: &Layout<'_>,
    range: std::ops::Range<usize>,
    required_depth: i32,
    file_path: &str,
    recurse: bool,
    parent_header: Option<&str>,
    defs: &mut Vec<SymbolDef>,
    diags: &mut Vec<String>,
) {
    let mut pending: Option<usize> = None;
    let mut i = range.start;
    while i < range.end {
        if lay.depth_at_start[i] != required_depth || lay.paren_at_start[i] > 0 {
            i += 1;
            continue;
        }
        let content = lay.stripped[i].trim();
        if content.is_empty() {
            i += 1;
            continue;
        }
        if content.starts_with('@') {
            pending.get_or_insert(i);
            i += 1;
            continue;
        }
        let Some((kind, name)) = parse_decl(content) else {
            pending = None;
            i += 1;
            continue;
        };
        let Some((end, body_open)) = decl_extent(lay, i) else {
            diags.push(format!("{file_path}: unbalanced braces at line {i}, declaration skipped"));
            pending = None;
            i += 1;
            continue;
        };
        let end = end.min(range.end - 1);
        let start = pending.take().unwrap_or(i);
        let text: String = lay.original[start..=end].concat();
        let augmented = match (kind, parent_header) {
            (SymbolKind::Function, Some(header)) => Some(format!("{header}\n{text}")),
            _ => None,
        };
        defs.push(SymbolDef {
            name,
            kind,
            file_path: file_path.to_string(),
            span: (start, end),
            text,
            augmented,
        });
        if recurse && matches!(kind, SymbolKind::Class | SymbolKind::Object) {
            if let Some(open) = body_open {
                if open < end {
                    let header = lay.original[i].trim_end_matches(['\n', '\r']).to_string();
                    scan_decls(
                        lay,
                        open + 1..end,
                        required_depth + 1,
                        file_path,
                        false,
                        Some(&header),
                        defs,
                        diags,
                    );
                }
            }
        }
        i = end + 1;
    }
}

fn declared_package(stripped: &str) -> String {
    for line in stripped.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('@') {
            continue;
        }
        if let Some(rest) = t.strip_prefix("package ") {
            return rest.trim_end_matches(';').trim().to_string();
        }
        return String::new();
    }
    String::new()
}

pub(super) fn imported_files(text: &str, snapshot: &RepoSnapshot) -> Vec<String> {
    let kotlin_paths: Vec<&str> = snapshot
        .paths()
        .filter(|p| p.ends_with(".kt") || p.ends_with(".kts"))
        .collect();
    let packages: Vec<String> = kotlin_paths
        .iter()
        .map(|p| declared_package(&strip_noncode(snapshot.file(p).unwrap_or(""))))
        .collect();

    let mut out: Vec<String> = Vec::new();
    let mut push = |path: &str| {
        if !out.iter().any(|p| p == path) {
            out.push(path.to_string());
        }
    };

    for line in text.lines() {
        let t = line.trim();
        let Some(rest) = t.strip_prefix("import ") else {
            continue;
        };
        let target = rest.split_whitespace().next().unwrap_or("").trim_end_matches(';');
        if target.is_empty() {
            continue;
        }
        if let Some(package) = target.strip_suffix(".*") {
            for (path, pkg) in kotlin_paths.iter().zip(&packages) {
                if pkg == package {
                    push(path);
                }
            }
            continue;
        }
        let (package, symbol) = match target.rsplit_once('.') {
            Some((p, s)) => (p.to_string(), s),
            None => (String::new(), target),
        };
        for (path, pkg) in kotlin_paths.iter().zip(&packages) {
            if *pkg != package {
                continue;
            }
            let text = snapshot.file(path).unwrap_or("");
            let (defs, _) = extract(path, text);
            if defs.iter().any(|d| d.name == symbol) {
                push(path);
            }
        }
    }
    out
}

//! Python backend: an indentation scanner.
//!
//! One pass classifies every line (blank, comment, string continuation,
//! bracket continuation, or code with an indent level); a second pass walks
//! top-level statements and class bodies. Triple-quoted strings and bracket
//! continuations are tracked so stray `def` text inside a docstring does not
//! start a block.

use super::{SymbolDef, SymbolKind};
use crate::dataset::RepoSnapshot;
use crate::util::inclusive_lines;

#[derive(Debug, Clone, Copy)]
struct LineInfo {
    blank: bool,
    comment_only: bool,
    /// Line starts inside a triple-quoted string.
    in_string_at_start: bool,
    /// Open `([{` depth carried into this line from code above.
    bracket_at_start: i32,
    /// Leading whitespace width for code lines.
    indent: usize,
}

impl LineInfo {
    /// True when the line continues an enclosing statement or string and
    /// must be treated as block content rather than inspected for indent.
    fn is_continuation(&self) -> bool {
        !self.blank && (self.in_string_at_start || self.bracket_at_start > 0)
    }
}

/// Per-line classification with cross-line string and bracket state.
fn analyze(lines: &[&str]) -> Vec<LineInfo> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Code,
        Str { quote: char, triple: bool },
    }

    let mut infos = Vec::with_capacity(lines.len());
    let mut state = State::Code;
    let mut bracket: i32 = 0;

    for line in lines {
        let in_string_at_start = matches!(state, State::Str { triple: true, .. });
        let bracket_at_start = bracket;
        let chars: Vec<char> = line.chars().collect();
        let mut first_code: Option<usize> = None;
        let mut i = 0usize;
        while i < chars.len() {
            let c = chars[i];
            match state {
                State::Code => {
                    if c == '\n' || c == '\r' {
                        i += 1;
                        continue;
                    }
                    if c == '#' {
                        break;
                    }
                    if !c.is_whitespace() && first_code.is_none() {
                        first_code = Some(i);
                    }
                    match c {
                        '(' | '[' | '{' => bracket += 1,
                        ')' | ']' | '}' => bracket -= 1,
                        '\'' | '"' => {
                            let triple = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                            state = State::Str { quote: c, triple };
                            if triple {
                                i += 2;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                State::Str { quote, triple } => {
                    if c == '\\' {
                        i += 2;
                        continue;
                    }
                    if c == quote {
                        if !triple {
                            state = State::Code;
                        } else if chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                            state = State::Code;
                            i += 2;
                        }
                    }
                    i += 1;
                }
            }
        }
        // A single-quoted string left open at end of line is a syntax error;
        // close it here to localize the damage.
        if let State::Str { triple: false, .. } = state {
            state = State::Code;
        }

        let trimmed = line.trim_end_matches(['\n', '\r']);
        let blank = !in_string_at_start && trimmed.trim().is_empty();
        let comment_only = !in_string_at_start
            && bracket_at_start == 0
            && trimmed.trim_start().starts_with('#');
        infos.push(LineInfo {
            blank,
            comment_only,
            in_string_at_start,
            bracket_at_start,
            indent: first_code.unwrap_or(0),
        });
    }
    infos
}

fn header(content: &str) -> Option<(SymbolKind, String)> {
    let rest = content.strip_prefix("async ").map(str::trim_start).unwrap_or(content);
    for (kw, kind) in [("def", SymbolKind::Function), ("class", SymbolKind::Class)] {
        if let Some(after) = rest.strip_prefix(kw) {
            if after.starts_with([' ', '\t']) {
                let name: String = after
                    .trim_start()
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                if !name.is_empty() {
                    return Some((kind, name));
                }
            }
        }
    }
    None
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `NAME = ...` or `NAME: ann = ...`, rejecting comparison and augmented
/// assignment operators.
fn assignment_target(content: &str) -> Option<String> {
    let chars: Vec<char> = content.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c != '=' {
            continue;
        }
        if chars.get(i + 1) == Some(&'=') {
            return None;
        }
        if i > 0 && "=!<>+-*/%&|^@:~".contains(chars[i - 1]) {
            return None;
        }
        let lhs: String = chars[..i].iter().collect();
        let lhs = lhs.trim();
        let target = match lhs.split_once(':') {
            Some((name, _annotation)) => name.trim(),
            None => lhs,
        };
        return is_identifier(target).then(|| target.to_string());
    }
    None
}

pub(super) fn extract(file_path: &str, text: &str) -> (Vec<SymbolDef>, Vec<String>) {
    let lines = inclusive_lines(text);
    let infos = analyze(&lines);
    let mut defs = Vec::new();
    let mut diags = Vec::new();

    // Consume bracket/string continuation lines following `start`.
    let continuation_end = |start: usize| -> usize {
        let mut j = start;
        while j + 1 < lines.len() && infos[j + 1].is_continuation() {
            j += 1;
        }
        j
    };

    // Last line of the block opened by a header ending at `header_end` with
    // the given indent.
    let block_end = |header_end: usize, header_indent: usize| -> usize {
        let mut last = header_end;
        let mut j = header_end + 1;
        while j < lines.len() {
            let li = infos[j];
            if li.blank || li.comment_only {
                j += 1;
                continue;
            }
            if li.is_continuation() {
                last = j;
                j += 1;
                continue;
            }
            if li.indent <= header_indent {
                break;
            }
            last = j;
            j += 1;
        }
        last
    };

    let slice = |start: usize, end: usize| lines[start..=end].concat();

    let emit_methods = |defs: &mut Vec<SymbolDef>,
                            diags: &mut Vec<String>,
                            class_line: usize,
                            body_start: usize,
                            class_end: usize| {
        let body_indent = (body_start..=class_end)
            .filter(|&j| {
                let li = infos[j];
                !li.blank && !li.comment_only && !li.is_continuation()
            })
            .map(|j| infos[j].indent)
            .min();
        let Some(body_indent) = body_indent else {
            return;
        };
        let class_header = lines[class_line].trim_end_matches(['\n', '\r']).to_string();

        let mut pending: Option<usize> = None;
        let mut j = body_start;
        while j <= class_end {
            let li = infos[j];
            if li.blank || li.comment_only || li.is_continuation() {
                j += 1;
                continue;
            }
            if li.indent != body_indent {
                if li.indent < body_indent {
                    diags.push(format!(
                        "{file_path}: inconsistent indentation at line {j}, region skipped"
                    ));
                }
                j += 1;
                continue;
            }
            let content = lines[j].trim();
            if content.starts_with('@') {
                pending.get_or_insert(j);
                j = continuation_end(j) + 1;
                continue;
            }
            if let Some((kind, name)) = header(content) {
                let header_end = continuation_end(j);
                let end = block_end(header_end, body_indent).min(class_end);
                let start = pending.take().unwrap_or(j);
                let text = slice(start, end);
                let augmented = (kind == SymbolKind::Function)
                    .then(|| format!("{class_header}\n{text}"));
                defs.push(SymbolDef {
                    name,
                    kind,
                    file_path: file_path.to_string(),
                    span: (start, end),
                    text,
                    augmented,
                });
                j = end + 1;
                continue;
            }
            pending = None;
            j = continuation_end(j) + 1;
        }
    };

    let mut pending: Option<usize> = None;
    let mut i = 0;
    while i < lines.len() {
        let li = infos[i];
        if li.blank || li.comment_only || li.is_continuation() {
            i += 1;
            continue;
        }
        if li.indent > 0 {
            pending = None;
            i += 1;
            continue;
        }
        let content = lines[i].trim();
        if content.starts_with('@') {
            pending.get_or_insert(i);
            i = continuation_end(i) + 1;
            continue;
        }
        if let Some((kind, name)) = header(content) {
            let header_end = continuation_end(i);
            let end = block_end(header_end, 0);
            let start = pending.take().unwrap_or(i);
            defs.push(SymbolDef {
                name,
                kind,
                file_path: file_path.to_string(),
                span: (start, end),
                text: slice(start, end),
                augmented: None,
            });
            if kind == SymbolKind::Class && header_end < end {
                emit_methods(&mut defs, &mut diags, i, header_end + 1, end);
            }
            i = end + 1;
            continue;
        }
        if pending.is_none() {
            if let Some(name) = assignment_target(content) {
                let end = continuation_end(i);
                defs.push(SymbolDef {
                    name,
                    kind: SymbolKind::Variable,
                    file_path: file_path.to_string(),
                    span: (i, end),
                    text: slice(i, end),
                    augmented: None,
                });
                i = end + 1;
                continue;
            }
        }
        pending = None;
        i = continuation_end(i) + 1;
    }

    (defs, diags)
}

/// Modules named by `import`/`from` statements, resolved against the
/// snapshot. Leading dots of relative imports are stripped; resolution tries
/// the root-relative `a/b.py` and `a/b/__init__.py` first and falls back to
/// a unique path-suffix match.
pub(super) fn imported_files(text: &str, snapshot: &RepoSnapshot) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |path: String| {
        if !out.contains(&path) {
            out.push(path);
        }
    };

    for line in text.lines() {
        let stmt = line.trim();
        let modules: Vec<String> = if let Some(rest) = stmt.strip_prefix("from ") {
            match rest.split_once(" import ") {
                Some((module, _)) => vec![module.trim().to_string()],
                None => continue,
            }
        } else if let Some(rest) = stmt.strip_prefix("import ") {
            rest.split(',')
                .map(|part| {
                    let part = part.trim();
                    part.split_once(" as ").map_or(part, |(m, _)| m.trim()).to_string()
                })
                .collect()
        } else {
            continue;
        };

        for module in modules {
            let module = module.trim_start_matches('.');
            if module.is_empty() || !module.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
                continue;
            }
            let rel = module.replace('.', "/");
            let direct = format!("{rel}.py");
            let as_package = format!("{rel}/__init__.py");
            if snapshot.file(&direct).is_some() {
                push(direct);
                continue;
            }
            if snapshot.file(&as_package).is_some() {
                push(as_package);
                continue;
            }
            let mut matches: Vec<&str> = snapshot
                .paths()
                .filter(|p| p.ends_with(&format!("/{direct}")) || p.ends_with(&format!("/{as_package}")))
                .collect();
            if matches.len() == 1 {
                push(matches.remove(0).to_string());
            }
        }
    }
    out
}

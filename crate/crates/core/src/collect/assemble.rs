//! Budget-constrained assembly of ordered snippets into the rendered
//! context string.

use super::{ContextDocument, Snippet, FILE_SEP};
use crate::util::{budget_units, inclusive_lines};

fn render_block(snippet: &Snippet) -> String {
    format!("{FILE_SEP}{}\n{}\n", snippet.file_path, snippet.text)
}

/// Include snippets greedily in the given order. One unit covers 4
/// characters, rounded up per snippet block (separator, path, newline, text,
/// newline). A snippet that would overflow the budget is dropped, except the
/// very first snippet, which is truncated at the last whole line that still
/// fits — a partial top-ranked snippet beats losing it, while partial
/// low-ranked snippets only add noise.
pub fn assemble(snippets: Vec<Snippet>, budget_units_total: usize) -> ContextDocument {
    let mut doc = ContextDocument::default();
    for (idx, snippet) in snippets.into_iter().enumerate() {
        let block = render_block(&snippet);
        let units = budget_units(&block);
        if doc.budget_units_used + units <= budget_units_total {
            doc.rendered.push_str(&block);
            doc.budget_units_used += units;
            doc.snippets.push(snippet);
            continue;
        }
        if idx == 0 {
            let remaining = budget_units_total - doc.budget_units_used;
            if let Some(truncated) = truncate_to_fit(snippet, remaining) {
                let block = render_block(&truncated);
                doc.budget_units_used += budget_units(&block);
                doc.rendered.push_str(&block);
                doc.snippets.push(truncated);
            }
        }
    }
    doc
}

/// Longest whole-line prefix of the snippet text whose rendered block fits
/// in `remaining` units; `None` when not even one line fits.
fn truncate_to_fit(snippet: Snippet, remaining: usize) -> Option<Snippet> {
    let overhead = FILE_SEP.chars().count() + snippet.file_path.chars().count() + 2;
    let lines = inclusive_lines(&snippet.text);
    let mut kept_chars = 0usize;
    let mut kept_lines = 0usize;
    for line in &lines {
        let next = kept_chars + line.chars().count();
        if (overhead + next).div_ceil(4) > remaining {
            break;
        }
        kept_chars = next;
        kept_lines += 1;
    }
    if kept_lines == 0 {
        return None;
    }
    let text = lines[..kept_lines].concat();
    Some(Snippet { text, ..snippet })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snippet(path: &str, text: &str) -> Snippet {
        Snippet { file_path: path.into(), text: text.into(), score: 1.0, provenance: "test".into() }
    }

    fn sep_count(rendered: &str) -> usize {
        rendered.matches(FILE_SEP).count()
    }

    #[test]
    fn empty_input_renders_empty() {
        let doc = assemble(Vec::new(), 100);
        assert_eq!(doc.rendered, "");
        assert_eq!(doc.budget_units_used, 0);
        assert!(doc.snippets.is_empty());
    }

    #[test]
    fn single_snippet_is_one_separator_block() {
        let doc = assemble(vec![snippet("a.py", "x = 1\ny = 2\n")], 100);
        assert_eq!(doc.rendered, "<|file_sep|>a.py\nx = 1\ny = 2\n\n");
        assert_eq!(sep_count(&doc.rendered), 1);
        assert_eq!(doc.budget_units_used, budget_units(&doc.rendered));
    }

    #[test]
    fn overflowing_later_snippets_are_dropped() {
        // Each block is ~(12 + 4 + 1 + 30 + 1) chars = 12 units.
        let text = "123456789012345678901234567890";
        let snippets =
            vec![snippet("a.py", text), snippet("b.py", text), snippet("c.py", text)];
        let doc = assemble(snippets, 25);
        assert_eq!(sep_count(&doc.rendered), 2);
        assert_eq!(doc.snippets.len(), 2);
        assert!(doc.rendered.chars().count() <= 4 * 25);
        assert!(doc.budget_units_used <= 25);
    }

    #[test]
    fn first_snippet_truncates_at_a_line_boundary() {
        let long: String = (0..100).map(|i| format!("line number {i}\n")).collect();
        let doc = assemble(vec![snippet("big.py", &long), snippet("next.py", "tiny\n")], 30);
        assert_eq!(doc.snippets.len(), 1, "truncation fills the whole budget");
        assert_eq!(doc.snippets[0].file_path, "big.py");
        assert!(doc.snippets[0].text.ends_with('\n'));
        assert!(doc.snippets[0].text.chars().count() < long.chars().count());
        assert!(long.starts_with(&doc.snippets[0].text));
        assert!(doc.rendered.chars().count() <= 4 * 30);
    }

    #[test]
    fn greedy_inclusion_continues_past_a_dropped_snippet() {
        let huge: String = "x".repeat(400);
        let doc = assemble(
            vec![snippet("a.py", "fits\n"), snippet("big.py", &huge), snippet("c.py", "also\n")],
            20,
        );
        let paths: Vec<&str> = doc.snippets.iter().map(|s| s.file_path.as_str()).collect();
        assert_eq!(paths, vec!["a.py", "c.py"]);
    }

    #[test]
    fn zero_budget_renders_nothing() {
        let doc = assemble(vec![snippet("a.py", "content\n")], 0);
        assert_eq!(doc.rendered, "");
        assert!(doc.snippets.is_empty());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn budget_and_separator_invariants(
                texts in proptest::collection::vec("[a-z \\n]{1,80}", 0..12),
                budget in 0usize..120,
            ) {
                let snippets: Vec<Snippet> = texts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| snippet(&format!("f{i}.py"), t))
                    .collect();
                let doc = assemble(snippets, budget);
                prop_assert!(doc.rendered.chars().count() <= 4 * budget);
                prop_assert!(doc.budget_units_used <= budget);
                prop_assert_eq!(doc.rendered.matches(FILE_SEP).count(), doc.snippets.len());
                // Rendered is exactly the serialization of the included snippets.
                let expected: String = doc.snippets.iter().map(render_block).collect();
                prop_assert_eq!(&doc.rendered, &expected);
                for s in &doc.snippets {
                    prop_assert!(!s.text.is_empty());
                }
            }
        }
    }
}

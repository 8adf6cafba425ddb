use super::*;
use crate::dataset::RepoSnapshot;
use crate::lang::Language;
use std::collections::BTreeMap;

/// Span fixture: 3 classes, 7 methods, 4 top-level functions. Line numbers
/// are 0-based and asserted below, so edits here must update the table.
const PYTHON_FIXTURE: &str = r#""""Utilities for the span fixture."""
import os

def top_one(a, b):
    return a + b

class Alpha:
    """Alpha doc."""

    def method_a(self):
        return 1

    @staticmethod
    def method_b(x,
                 y):
        return x + y

class Beta(Base):
    attr = 0

    def method_c(self):
        if self.attr:
            return 2
        return 3

    def method_d(self):
        return 4

    def method_e(self):
        return 5

@decorator
def top_two():
    pass

async def top_three(q):
    await q

class Gamma:
    def method_f(self):
        return "}"

    def method_g(self):
        text = """
def not_a_def():
"""
        return text

def top_four():
    return 0
"#;

fn reslice(text: &str, span: (usize, usize)) -> String {
    crate::util::inclusive_lines(text)[span.0..=span.1].concat()
}

#[test]
fn python_fixture_spans_match_hand_annotation() {
    let defs = extract_definitions("fix.py", PYTHON_FIXTURE, Language::Python);
    let expected: &[(&str, SymbolKind, (usize, usize), bool)] = &[
        ("top_one", SymbolKind::Function, (3, 4), false),
        ("Alpha", SymbolKind::Class, (6, 15), false),
        ("method_a", SymbolKind::Function, (9, 10), true),
        ("method_b", SymbolKind::Function, (12, 15), true),
        ("Beta", SymbolKind::Class, (17, 29), false),
        ("method_c", SymbolKind::Function, (20, 23), true),
        ("method_d", SymbolKind::Function, (25, 26), true),
        ("method_e", SymbolKind::Function, (28, 29), true),
        ("top_two", SymbolKind::Function, (31, 33), false),
        ("top_three", SymbolKind::Function, (35, 36), false),
        ("Gamma", SymbolKind::Class, (38, 46), false),
        ("method_f", SymbolKind::Function, (39, 40), true),
        ("method_g", SymbolKind::Function, (42, 46), true),
        ("top_four", SymbolKind::Function, (48, 49), false),
    ];
    assert_eq!(defs.len(), expected.len(), "defs: {:#?}", defs.iter().map(|d| (&d.name, d.span)).collect::<Vec<_>>());
    let mut augmented_count = 0;
    for (def, (name, kind, span, has_aug)) in defs.iter().zip(expected) {
        assert_eq!(def.name, *name);
        assert_eq!(def.kind, *kind, "{name}");
        assert_eq!(def.span, *span, "{name}");
        assert_eq!(def.text, reslice(PYTHON_FIXTURE, def.span), "{name} re-slice");
        assert_eq!(def.augmented.is_some(), *has_aug, "{name} augmented");
        if def.augmented.is_some() {
            augmented_count += 1;
        }
    }
    assert_eq!(augmented_count, 7);

    // Augmented variants start with the owning class header line.
    let method_b = defs.iter().find(|d| d.name == "method_b").unwrap();
    let aug = method_b.augmented.as_ref().unwrap();
    assert!(aug.starts_with("class Alpha:\n"), "got {aug:?}");
    assert!(aug.ends_with(&method_b.text));
}

#[test]
fn python_minimal_examples() {
    assert!(extract_definitions("f.py", "", Language::Python).is_empty());
    let defs = extract_definitions("f.py", "def f():\n  pass", Language::Python);
    assert_eq!(defs.len(), 1);
    assert_eq!(defs[0].kind, SymbolKind::Function);
    assert_eq!(defs[0].span, (0, 1));
}

#[test]
fn python_top_level_assignments_only() {
    let text = "LIMIT = 10\nx: int = 5\nif True:\n    hidden = 1\na, b = 1, 2\ny == 2\n";
    let defs = extract_definitions("f.py", text, Language::Python);
    let names: Vec<&str> = defs.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, vec!["LIMIT", "x"]);
    assert!(defs.iter().all(|d| d.kind == SymbolKind::Variable));
}

const KOTLIN_FIXTURE: &str = r#"package com.example.app

import com.example.lib.Helper

const val LIMIT = 10

fun topLevel(x: Int): Int {
    return x + LIMIT
}

class Widget(val name: String) {
    fun render(): String {
        return "<$name>"
    }

    fun area(w: Int, h: Int) = w * h
}

object Registry {
    fun lookup(key: String): Widget? {
        return null
    }
}

data class Point(val x: Int, val y: Int)

fun main() {
    println(topLevel(1))
}
"#;

#[test]
fn kotlin_fixture_spans_match_hand_annotation() {
    let defs = extract_definitions("fix.kt", KOTLIN_FIXTURE, Language::Kotlin);
    let expected: &[(&str, SymbolKind, (usize, usize), bool)] = &[
        ("LIMIT", SymbolKind::Variable, (4, 4), false),
        ("topLevel", SymbolKind::Function, (6, 8), false),
        ("Widget", SymbolKind::Class, (10, 16), false),
        ("render", SymbolKind::Function, (11, 13), true),
        ("area", SymbolKind::Function, (15, 15), true),
        ("Registry", SymbolKind::Object, (18, 22), false),
        ("lookup", SymbolKind::Function, (19, 21), true),
        ("Point", SymbolKind::Class, (24, 24), false),
        ("main", SymbolKind::Function, (26, 28), false),
    ];
    assert_eq!(defs.len(), expected.len(), "defs: {:#?}", defs.iter().map(|d| (&d.name, d.span)).collect::<Vec<_>>());
    for (def, (name, kind, span, has_aug)) in defs.iter().zip(expected) {
        assert_eq!(def.name, *name);
        assert_eq!(def.kind, *kind, "{name}");
        assert_eq!(def.span, *span, "{name}");
        assert_eq!(def.text, reslice(KOTLIN_FIXTURE, def.span), "{name} re-slice");
        assert_eq!(def.augmented.is_some(), *has_aug, "{name}");
    }
    let render = defs.iter().find(|d| d.name == "render").unwrap();
    assert!(render.augmented.as_ref().unwrap().starts_with("class Widget(val name: String) {\n"));
}

#[test]
fn kotlin_braces_in_strings_and_comments_are_ignored() {
    let text = "fun tricky(): String {\n    // } not a close\n    /* } also { not */\n    return \"{ ${'}'} }\"\n}\n\nval after = 1\n";
    let defs = extract_definitions("t.kt", text, Language::Kotlin);
    let names: Vec<&str> = defs.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, vec!["tricky", "after"]);
    assert_eq!(defs[0].span, (0, 4));
}

#[test]
fn kotlin_allman_style_braces_stay_one_declaration() {
    let text = "fun detached(x: Int): Int\n{\n    return x\n}\n\nval after = 1\n";
    let defs = extract_definitions("t.kt", text, Language::Kotlin);
    let spans: Vec<(&str, (usize, usize))> =
        defs.iter().map(|d| (d.name.as_str(), d.span)).collect();
    assert_eq!(spans, vec![("detached", (0, 3)), ("after", (5, 5))]);
}

#[test]
fn kotlin_unbalanced_braces_record_diagnostic() {
    let text = "fun broken() {\n    if (x) {\n}\n";
    let (defs, diags) = extract_definitions_with_diagnostics("b.kt", text, Language::Kotlin);
    assert!(defs.is_empty());
    assert_eq!(diags.len(), 1);
    assert!(diags[0].contains("unbalanced"));
}

#[test]
fn referenced_symbols_empty_and_positional() {
    assert!(extract_referenced_symbols("", "").is_empty());

    let symbols = extract_referenced_symbols("x = Pipeline(", "");
    let names: Vec<&str> = symbols.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, vec!["Pipeline", "x"]);
    assert_eq!(symbols[0].distance_chars, 1);
    assert_eq!(symbols[1].distance_chars, 12);
}

#[test]
fn referenced_symbols_drop_keywords_and_numbers() {
    let symbols = extract_referenced_symbols("for item in items:\n    if 42:", "val x = item");
    let names: Vec<&str> = symbols.iter().map(|s| s.name.as_str()).collect();
    assert!(names.contains(&"item"));
    assert!(names.contains(&"items"));
    assert!(names.contains(&"x"));
    assert!(!names.contains(&"for"));
    assert!(!names.contains(&"in"));
    assert!(!names.contains(&"if"));
    assert!(!names.contains(&"val"));
    assert!(!names.contains(&"42"));
    let item = symbols.iter().find(|s| s.name == "item").unwrap();
    assert_eq!(item.occurrences, 2);
}

/// Brute-force re-derivation of the ordering key for a 14-identifier pair.
#[test]
fn referenced_symbols_order_matches_distance_oracle() {
    let prefix = "alpha beta gamma\ndelta epsilon zeta alpha\ncursor_near = frame(";
    let suffix = ")\nomega psi chi\nphi upsilon tau omega\n";

    // Oracle: scan every character position for identifier runs and compute
    // distances directly.
    let occurrences = |text: &str| -> Vec<(String, usize, usize)> {
        let chars: Vec<char> = text.chars().collect();
        let mut found = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_ascii_alphabetic() || chars[i] == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                found.push((chars[start..i].iter().collect(), start, i));
            } else {
                i += 1;
            }
        }
        found
    };
    let mut table: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let plen = prefix.chars().count();
    for (name, _, end) in occurrences(prefix) {
        let e = table.entry(name).or_insert((usize::MAX, 0));
        e.0 = e.0.min(plen - end);
        e.1 += 1;
    }
    for (name, start, _) in occurrences(suffix) {
        let e = table.entry(name).or_insert((usize::MAX, 0));
        e.0 = e.0.min(start);
        e.1 += 1;
    }
    let mut expected: Vec<(usize, std::cmp::Reverse<usize>, String)> = table
        .into_iter()
        .map(|(name, (d, n))| (d, std::cmp::Reverse(n), name))
        .collect();
    expected.sort();

    let got = extract_referenced_symbols(prefix, suffix);
    assert_eq!(got.len(), 14);
    let got_names: Vec<&str> = got.iter().map(|s| s.name.as_str()).collect();
    let expected_names: Vec<&str> = expected.iter().map(|(_, _, n)| n.as_str()).collect();
    assert_eq!(got_names, expected_names);
}

#[test]
fn referenced_symbols_are_duplicate_free_and_ordered() {
    let symbols = extract_referenced_symbols("a b a c b a", "c d a");
    let mut names: Vec<&str> = symbols.iter().map(|s| s.name.as_str()).collect();
    let total = names.len();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), total);
    for pair in symbols.windows(2) {
        let key = |s: &RankedSymbol| (s.distance_chars, std::cmp::Reverse(s.occurrences), s.name.clone());
        assert!(key(&pair[0]) <= key(&pair[1]));
    }
}

#[test]
fn enclosing_blocks_basics() {
    // No complete block: fall back to the trailing prefix lines.
    let plain: String = (0..60).map(|i| format!("line{i}\n")).collect();
    let (before, _) = enclosing_blocks(&plain, "", Language::Python);
    assert_eq!(before, crate::util::tail_lines(&plain, BLOCK_FALLBACK_LINES));

    // Prefix ending exactly at a function's last line returns that function.
    let prefix = "import os\n\ndef ready():\n    return 1\n";
    let (before, after) = enclosing_blocks(prefix, "", Language::Python);
    assert_eq!(before, "def ready():\n    return 1\n");
    assert_eq!(after, "");

    // First complete block of the suffix, skipping the cut-off tail.
    let suffix = "    return partial\n\ndef following():\n    return 2\n\nx = 1\n";
    let (_, after) = enclosing_blocks("", suffix, Language::Python);
    assert_eq!(after, "def following():\n    return 2\n");
}

#[test]
fn enclosing_blocks_kotlin_skips_unclosed_prefix_function() {
    let prefix = "fun outer() {\n    val x = 1\n";
    let (before, _) = enclosing_blocks(prefix, "", Language::Kotlin);
    // The cut-off function never closes its brace, so fall back to raw lines.
    assert_eq!(before, crate::util::tail_lines(prefix, BLOCK_FALLBACK_LINES));
}

fn snapshot(files: &[(&str, &str)]) -> RepoSnapshot {
    let map: BTreeMap<String, String> =
        files.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect();
    RepoSnapshot::new("repo", "rev", map).unwrap()
}

#[test]
fn python_imports_resolve_three_of_five() {
    let snap = snapshot(&[
        ("lib.py", "x = 1\n"),
        ("pkg/__init__.py", ""),
        ("pkg/mod.py", "class X: pass\n"),
        ("pkg/mod2.py", "y = 2\n"),
    ]);
    let text = "import lib\nfrom pkg.mod import X\nimport pkg.mod2 as m\nimport missing_mod\nfrom ..rel import thing\n";
    let got = imported_files(text, &snap, Language::Python);
    assert_eq!(got, vec!["lib.py", "pkg/mod.py", "pkg/mod2.py"]);
}

#[test]
fn python_import_no_imports_and_package_fallback() {
    let snap = snapshot(&[("pkg/__init__.py", ""), ("pkg/mod.py", "")]);
    assert!(imported_files("x = 1\n", &snap, Language::Python).is_empty());
    assert_eq!(imported_files("import pkg\n", &snap, Language::Python), vec!["pkg/__init__.py"]);
}

#[test]
fn kotlin_imports_match_package_declarations() {
    let snap = snapshot(&[
        ("app/a.kt", "package com.example.lib\n\nclass Helper\n"),
        ("app/b.kt", "package com.example.lib\n\nfun util() = 1\n"),
        ("app/c.kt", "package com.other\n\nval x = 1\n"),
    ]);
    let text = "import com.example.lib.Helper\nimport com.example.lib.*\nimport com.other.Absent\n";
    let got = imported_files(text, &snap, Language::Kotlin);
    assert_eq!(got, vec!["app/a.kt", "app/b.kt"]);
}

mod fuzz {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn backends_never_panic(text in "\\PC{0,300}") {
            let _ = extract_definitions("f.py", &text, Language::Python);
            let _ = extract_definitions("f.kt", &text, Language::Kotlin);
        }

        #[test]
        fn backends_survive_structural_soup(
            text in proptest::collection::vec(
                proptest::sample::select(vec![
                    "def f(:", "class", "{", "}", "(", "\"\"\"", "'", "fun ", "val x", "@d\n",
                    "\n", "    ", "#", "//", "/*", "*/", "\\", "\"", "${", "async ",
                ]),
                0..40,
            )
        ) {
            let joined = text.concat();
            let _ = extract_definitions("f.py", &joined, Language::Python);
            let _ = extract_definitions("f.kt", &joined, Language::Kotlin);
            let _ = extract_referenced_symbols(&joined, &joined);
            let _ = enclosing_blocks(&joined, &joined, Language::Python);
            let _ = enclosing_blocks(&joined, &joined, Language::Kotlin);
        }

        #[test]
        fn reslice_invariant_holds_on_python_soup(
            lines in proptest::collection::vec(
                proptest::sample::select(vec![
                    "def f():", "    pass", "class C:", "    def m(self):", "        return 1",
                    "x = 1", "", "  # comment", "@dec", "if True:", "    y = [", "    ]",
                ]),
                0..30,
            )
        ) {
            let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
            for def in extract_definitions("f.py", &text, Language::Python) {
                let lines = crate::util::inclusive_lines(&text);
                prop_assert_eq!(&def.text, &lines[def.span.0..=def.span.1].concat());
            }
        }
    }
}

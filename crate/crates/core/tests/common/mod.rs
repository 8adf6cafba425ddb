//! Fixture builders shared by the integration suites. Each test binary
//! compiles its own copy and uses a different subset.
#![allow(dead_code)]

use fimctx::dataset::{CompletionPoint, Dataset, RepoSnapshot};
use fimctx::Language;
use std::collections::BTreeMap;
use std::path::Path;

pub fn snapshot(files: &[(&str, &str)]) -> RepoSnapshot {
    let map: BTreeMap<String, String> =
        files.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect();
    RepoSnapshot::new("repo", "rev", map).expect("fixture snapshot is valid")
}

pub fn point(
    id: &str,
    file_path: &str,
    prefix: &str,
    suffix: &str,
    truth: Option<&str>,
    co_changed: &[&str],
) -> CompletionPoint {
    CompletionPoint {
        point_id: id.to_string(),
        repo_id: "repo".to_string(),
        revision: "rev".to_string(),
        file_path: file_path.to_string(),
        prefix: prefix.to_string(),
        suffix: suffix.to_string(),
        ground_truth: truth.map(str::to_string),
        co_changed_files: co_changed.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn dataset(points: Vec<CompletionPoint>, snap: RepoSnapshot, language: Language) -> Dataset {
    let mut snapshots = BTreeMap::new();
    snapshots.insert(("repo".to_string(), "rev".to_string()), snap);
    Dataset::new(points, snapshots, language).expect("fixture dataset is consistent")
}

/// Write a loadable dataset tree under `root` for `language`.
pub fn write_dataset_tree(
    root: &Path,
    language: Language,
    points: &[CompletionPoint],
    files: &[(&str, &str)],
) {
    let lang_dir = root.join(language.as_str());
    let snap_dir = lang_dir.join("snapshots/repo/rev");
    std::fs::create_dir_all(&snap_dir).unwrap();
    for (path, text) in files {
        let full = snap_dir.join(path);
        std::fs::create_dir_all(full.parent().unwrap()).unwrap();
        std::fs::write(full, text).unwrap();
    }
    std::fs::write(
        lang_dir.join("points.jsonl"),
        fimctx::dataset::write_points_file(points),
    )
    .unwrap();
}

//! Completion points and repository snapshots.
//!
//! On disk a dataset root holds one subdirectory per language:
//!
//! ```text
//! <root>/<language>/points.jsonl                      one completion point per line
//! <root>/<language>/snapshots/<repo>/<revision>/...   plain file trees
//! ```
//!
//! Points files are UTF-8 JSON-lines with LF endings and the fields
//! `id, repo, revision, path, prefix, suffix, ground_truth, modified_files`.
//! Snapshots are the repository state *before* the ground-truth edit; the
//! edited file's post-edit content is only ever visible through the
//! prefix/suffix split.

use crate::lang::Language;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("points file line {line}: {source}")]
    MalformedLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("point `{point_id}` references missing snapshot {repo}@{revision}")]
    MissingSnapshot {
        point_id: String,
        repo: String,
        revision: String,
    },
    #[error("invalid snapshot path `{path}`: {reason}")]
    InvalidPath { path: String, reason: String },
}

/// Immutable map of relative file paths to file text for one repository
/// revision. Paths are `/`-separated, relative, and free of `..` segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoSnapshot {
    repo_id: String,
    revision: String,
    files: BTreeMap<String, String>,
}

impl RepoSnapshot {
    pub fn new(
        repo_id: impl Into<String>,
        revision: impl Into<String>,
        files: BTreeMap<String, String>,
    ) -> Result<Self, DatasetError> {
        for path in files.keys() {
            validate_rel_path(path)?;
        }
        Ok(Self { repo_id: repo_id.into(), revision: revision.into(), files })
    }

    pub fn repo_id(&self) -> &str {
        &self.repo_id
    }

    pub fn revision(&self) -> &str {
        &self.revision
    }

    pub fn file(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(String::as_str)
    }

    /// Paths in sorted order.
    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn files(&self) -> &BTreeMap<String, String> {
        &self.files
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

fn validate_rel_path(path: &str) -> Result<(), DatasetError> {
    if path.is_empty() {
        return Err(DatasetError::InvalidPath { path: path.into(), reason: "empty".into() });
    }
    if path.starts_with('/') || path.contains(':') || path.contains('\\') {
        return Err(DatasetError::InvalidPath { path: path.into(), reason: "not relative".into() });
    }
    if path.split('/').any(|seg| seg == "..") {
        return Err(DatasetError::InvalidPath {
            path: path.into(),
            reason: "contains `..` segment".into(),
        });
    }
    Ok(())
}

/// One fill-in-the-middle task. The caret sits exactly between `prefix` and
/// `suffix`; `co_changed_files` lists the other files touched by the same
/// commit, the offline stand-in for recently-open files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionPoint {
    #[serde(rename = "id")]
    pub point_id: String,
    #[serde(rename = "repo")]
    pub repo_id: String,
    pub revision: String,
    #[serde(rename = "path")]
    pub file_path: String,
    pub prefix: String,
    pub suffix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<String>,
    #[serde(rename = "modified_files", default)]
    pub co_changed_files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Vec<CompletionPoint>,
    snapshots: BTreeMap<(String, String), RepoSnapshot>,
    pub language: Language,
    /// Non-fatal findings recorded during loading (e.g. skipped binary files).
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn new(
        points: Vec<CompletionPoint>,
        snapshots: BTreeMap<(String, String), RepoSnapshot>,
        language: Language,
    ) -> Result<Self, DatasetError> {
        for point in &points {
            if !snapshots.contains_key(&(point.repo_id.clone(), point.revision.clone())) {
                return Err(DatasetError::MissingSnapshot {
                    point_id: point.point_id.clone(),
                    repo: point.repo_id.clone(),
                    revision: point.revision.clone(),
                });
            }
        }
        Ok(Self { points, snapshots, language, warnings: Vec::new() })
    }

    pub fn snapshot(&self, repo_id: &str, revision: &str) -> Option<&RepoSnapshot> {
        self.snapshots.get(&(repo_id.to_string(), revision.to_string()))
    }

    /// The snapshot backing a point. Loading guarantees it exists.
    pub fn snapshot_for(&self, point: &CompletionPoint) -> &RepoSnapshot {
        self.snapshot(&point.repo_id, &point.revision)
            .expect("dataset invariant: every point resolves to a snapshot")
    }

    pub fn snapshots(&self) -> &BTreeMap<(String, String), RepoSnapshot> {
        &self.snapshots
    }
}

/// A validation finding. Diagnostics never abort anything; the CLI turns a
/// non-empty list into exit code 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub point_id: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.point_id, self.message)
    }
}

pub fn points_path(root: &Path, language: Language) -> PathBuf {
    root.join(language.as_str()).join("points.jsonl")
}

pub fn snapshots_dir(root: &Path, language: Language) -> PathBuf {
    root.join(language.as_str()).join("snapshots")
}

/// Parse a points file. Line numbers in errors are 1-based.
pub fn read_points_file(text: &str) -> Result<Vec<CompletionPoint>, DatasetError> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let point: CompletionPoint = serde_json::from_str(line)
            .map_err(|source| DatasetError::MalformedLine { line: idx + 1, source })?;
        points.push(point);
    }
    Ok(points)
}

/// Canonical serialization: one compact JSON object per line, LF endings,
/// `ground_truth` omitted when absent. Reading a canonical file and writing
/// it again is byte-identical.
pub fn write_points_file(points: &[CompletionPoint]) -> String {
    let mut out = String::new();
    for point in points {
        out.push_str(&serde_json::to_string(point).expect("point serialization cannot fail"));
        out.push('\n');
    }
    out
}

/// Load the points file and every referenced snapshot under `root`.
///
/// Hard errors: unreadable tree, malformed points line, snapshot directory
/// missing for a referenced `(repo, revision)`. Non-UTF-8 files are skipped
/// with a warning on [`Dataset::warnings`]. Point order is preserved.
pub fn load_dataset(root: &Path, language: Language) -> Result<Dataset, DatasetError> {
    let points_file = points_path(root, language);
    let text = std::fs::read_to_string(&points_file)
        .map_err(|source| DatasetError::Io { path: points_file.clone(), source })?;
    let points = read_points_file(&text)?;

    let mut needed: Vec<(String, String)> = Vec::new();
    for point in &points {
        let key = (point.repo_id.clone(), point.revision.clone());
        if !needed.contains(&key) {
            needed.push(key);
        }
    }

    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let snap_root = snapshots_dir(root, language);
    let results: Vec<Result<(RepoSnapshot, Vec<String>), DatasetError>> =
        crate::util::parallel_map(&needed, workers, |(repo, revision)| {
            let dir = snap_root.join(repo).join(revision);
            if !dir.is_dir() {
                let point = points
                    .iter()
                    .find(|p| p.repo_id == *repo && p.revision == *revision)
                    .expect("needed key comes from points");
                return Err(DatasetError::MissingSnapshot {
                    point_id: point.point_id.clone(),
                    repo: repo.clone(),
                    revision: revision.clone(),
                });
            }
            load_snapshot_dir(&dir, repo, revision)
        });

    let mut snapshots = BTreeMap::new();
    let mut warnings = Vec::new();
    for (key, result) in needed.into_iter().zip(results) {
        let (snapshot, mut warns) = result?;
        warnings.append(&mut warns);
        snapshots.insert(key, snapshot);
    }

    let mut dataset = Dataset::new(points, snapshots, language)?;
    dataset.warnings = warnings;
    Ok(dataset)
}

/// Read one snapshot directory into memory. Directory entries are visited in
/// sorted order so loading is deterministic.
pub fn load_snapshot_dir(
    dir: &Path,
    repo: &str,
    revision: &str,
) -> Result<(RepoSnapshot, Vec<String>), DatasetError> {
    let mut files = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut stack = vec![(dir.to_path_buf(), String::new())];
    while let Some((current, rel_prefix)) = stack.pop() {
        let mut entries: Vec<_> = std::fs::read_dir(&current)
            .map_err(|source| DatasetError::Io { path: current.clone(), source })?
            .collect::<Result<_, _>>()
            .map_err(|source| DatasetError::Io { path: current.clone(), source })?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let name = entry.file_name().to_string_lossy().into_owned();
            let rel = if rel_prefix.is_empty() { name.clone() } else { format!("{rel_prefix}/{name}") };
            let path = entry.path();
            let file_type = entry
                .file_type()
                .map_err(|source| DatasetError::Io { path: path.clone(), source })?;
            if file_type.is_dir() {
                stack.push((path, rel));
            } else if file_type.is_file() {
                let bytes = std::fs::read(&path)
                    .map_err(|source| DatasetError::Io { path: path.clone(), source })?;
                match String::from_utf8(bytes) {
                    Ok(text) => {
                        files.insert(rel, text);
                    }
                    Err(_) => warnings.push(format!(
                        "{repo}@{revision}: skipped non-UTF-8 file `{rel}`"
                    )),
                }
            }
        }
    }
    Ok((RepoSnapshot::new(repo, revision, files)?, warnings))
}

/// Non-mutating consistency checks for one point against its snapshot:
/// point-level invariants plus existence of every co-changed file.
pub fn validate_point(point: &CompletionPoint, snapshot: &RepoSnapshot) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut push = |message: String| {
        diags.push(Diagnostic { point_id: point.point_id.clone(), message });
    };

    if let Some(truth) = &point.ground_truth {
        if truth.is_empty() {
            push("ground_truth is present but empty".to_string());
        }
    }
    if validate_rel_path(&point.file_path).is_err() {
        push(format!("completion path `{}` is not a clean relative path", point.file_path));
    }
    let mut seen = std::collections::BTreeSet::new();
    for path in &point.co_changed_files {
        if !seen.insert(path) {
            push(format!("duplicate path `{path}` in modified_files"));
            continue;
        }
        if path == &point.file_path {
            push("modified_files contains the completion file itself".to_string());
        }
        if snapshot.file(path).is_none() {
            push(format!("modified file `{path}` is missing from the snapshot"));
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(id: &str) -> CompletionPoint {
        CompletionPoint {
            point_id: id.to_string(),
            repo_id: "repo".to_string(),
            revision: "rev".to_string(),
            file_path: "src/main.py".to_string(),
            prefix: "a = 1\n".to_string(),
            suffix: "\nprint(a)\n".to_string(),
            ground_truth: Some("b = 2".to_string()),
            co_changed_files: vec!["src/util.py".to_string()],
        }
    }

    fn snapshot() -> RepoSnapshot {
        let mut files = BTreeMap::new();
        files.insert("src/main.py".to_string(), "a = 1\nprint(a)\n".to_string());
        files.insert("src/util.py".to_string(), "def helper():\n    pass\n".to_string());
        RepoSnapshot::new("repo", "rev", files).unwrap()
    }

    #[test]
    fn clean_point_validates_empty() {
        assert_eq!(validate_point(&point("p1"), &snapshot()), Vec::new());
    }

    #[test]
    fn missing_cochange_is_reported_by_path() {
        let mut p = point("p1");
        p.co_changed_files.push("src/gone.py".to_string());
        let diags = validate_point(&p, &snapshot());
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("src/gone.py"));
    }

    #[test]
    fn duplicate_cochange_is_one_diagnostic() {
        let mut p = point("p1");
        p.co_changed_files.push("src/util.py".to_string());
        let diags = validate_point(&p, &snapshot());
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("duplicate"));
    }

    #[test]
    fn snapshot_rejects_escaping_paths() {
        let mut files = BTreeMap::new();
        files.insert("../evil".to_string(), String::new());
        assert!(RepoSnapshot::new("r", "v", files).is_err());
        let mut files = BTreeMap::new();
        files.insert("/abs".to_string(), String::new());
        assert!(RepoSnapshot::new("r", "v", files).is_err());
    }

    #[test]
    fn points_file_round_trips_byte_for_byte() {
        let points = vec![point("p1"), {
            let mut p = point("p2");
            p.ground_truth = None;
            p.co_changed_files.clear();
            p
        }];
        let text = write_points_file(&points);
        let reread = read_points_file(&text).unwrap();
        assert_eq!(reread, points);
        assert_eq!(write_points_file(&reread), text);
        assert!(!text.lines().nth(1).unwrap().contains("ground_truth"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"id\":\"p\",\"repo\":\"r\",\"revision\":\"v\",\"path\":\"f.py\",\"prefix\":\"\",\"suffix\":\"\"}\nnot json\n";
        match read_points_file(text) {
            Err(DatasetError::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-line error, got {other:?}"),
        }
    }

    #[test]
    fn empty_points_file_loads_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let lang_dir = dir.path().join("python");
        std::fs::create_dir_all(&lang_dir).unwrap();
        std::fs::write(lang_dir.join("points.jsonl"), "").unwrap();
        let ds = load_dataset(dir.path(), Language::Python).unwrap();
        assert!(ds.points.is_empty());
        assert!(ds.snapshots().is_empty());
    }

    #[test]
    fn loader_round_trips_a_small_tree() {
        let dir = tempfile::tempdir().unwrap();
        let lang_dir = dir.path().join("python");
        let snap = lang_dir.join("snapshots/repo/rev");
        std::fs::create_dir_all(snap.join("src")).unwrap();
        std::fs::write(snap.join("src/main.py"), "a = 1\nprint(a)\n").unwrap();
        std::fs::write(snap.join("src/util.py"), "def helper():\n    pass\n").unwrap();
        let points_text = write_points_file(&[point("p1")]);
        std::fs::write(lang_dir.join("points.jsonl"), &points_text).unwrap();

        let ds = load_dataset(dir.path(), Language::Python).unwrap();
        assert_eq!(ds.points.len(), 1);
        assert_eq!(ds.snapshots().len(), 1);
        let snap = ds.snapshot_for(&ds.points[0]);
        assert_eq!(snap.len(), 2);
        assert_eq!(snap.file("src/util.py"), Some("def helper():\n    pass\n"));
        // Re-serializing the points reproduces the input bytes.
        assert_eq!(write_points_file(&ds.points), points_text);
        assert!(ds.warnings.is_empty());

        // Two loads agree structurally.
        let again = load_dataset(dir.path(), Language::Python).unwrap();
        assert_eq!(again.points, ds.points);
        assert_eq!(again.snapshots(), ds.snapshots());
    }

    #[test]
    fn missing_snapshot_names_the_point() {
        let dir = tempfile::tempdir().unwrap();
        let lang_dir = dir.path().join("python");
        std::fs::create_dir_all(&lang_dir).unwrap();
        std::fs::write(lang_dir.join("points.jsonl"), write_points_file(&[point("p9")])).unwrap();
        match load_dataset(dir.path(), Language::Python) {
            Err(DatasetError::MissingSnapshot { point_id, .. }) => assert_eq!(point_id, "p9"),
            other => panic!("expected missing-snapshot error, got {other:?}"),
        }
    }

    #[test]
    fn non_utf8_files_are_skipped_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let lang_dir = dir.path().join("python");
        let snap = lang_dir.join("snapshots/repo/rev");
        std::fs::create_dir_all(&snap).unwrap();
        std::fs::write(snap.join("src.py"), "x = 1\n").unwrap();
        std::fs::write(snap.join("blob.bin"), [0xff, 0xfe, 0x00, 0x01]).unwrap();
        let mut p = point("p1");
        p.file_path = "src.py".to_string();
        p.co_changed_files.clear();
        std::fs::write(lang_dir.join("points.jsonl"), write_points_file(&[p])).unwrap();

        let ds = load_dataset(dir.path(), Language::Python).unwrap();
        let snap = ds.snapshot("repo", "rev").unwrap();
        assert_eq!(snap.len(), 1);
        assert_eq!(ds.warnings.len(), 1);
        assert!(ds.warnings[0].contains("blob.bin"));
    }
}

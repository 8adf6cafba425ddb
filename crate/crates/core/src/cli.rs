//! Command implementations behind the `fimctx` binary.
//!
//! Exit codes: 0 success, 1 validation/evaluation findings, 2 usage or I/O
//! errors. Every command honors the seed and parallelism knobs, and two
//! invocations with identical inputs produce identical outputs.

use crate::collect::{collect, CollectorConfig};
use crate::dataset::{load_dataset, validate_point, Dataset};
use crate::harness::{
    evaluate_run, leaderboard, BackendRegistry, ConstantBackend, EchoGroundTruthBackend,
    EvalOptions, LeaderboardFormat, ModelProfile, OfflineFileBackend, RetryPolicy, RunReport,
};
use crate::lang::Language;
use crate::util::parallel_map;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// The optional TOML config file: collector knobs, model profiles, harness
/// settings. Anything omitted falls back to defaults; CLI flags override
/// the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    pub collector: CollectorConfig,
    pub profiles: Vec<ModelProfile>,
    pub harness: HarnessSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct HarnessSection {
    pub parallelism: usize,
    pub run_id: Option<String>,
    pub timeout_secs: u64,
    pub retry_base_ms: u64,
    pub max_retries: u32,
}

impl Default for HarnessSection {
    fn default() -> Self {
        Self { parallelism: 8, run_id: None, timeout_secs: 60, retry_base_ms: 500, max_retries: 3 }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn profiles_or_default(&self) -> Vec<ModelProfile> {
        if self.profiles.is_empty() {
            ModelProfile::default_profiles()
        } else {
            self.profiles.clone()
        }
    }
}

/// One fully resolved run: dataset location plus all knobs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset_root: PathBuf,
    pub language: Language,
    pub collector: CollectorConfig,
    pub profiles: Vec<ModelProfile>,
    pub parallelism: usize,
    pub run_id: String,
    pub retry: RetryPolicy,
    pub http_timeout: Duration,
}

impl RunConfig {
    pub fn from_file_config(
        dataset_root: PathBuf,
        language: Language,
        file: &FileConfig,
    ) -> Self {
        let mut collector = file.collector.clone();
        collector.language = language;
        Self {
            dataset_root,
            language,
            collector,
            profiles: file.profiles_or_default(),
            parallelism: file.harness.parallelism.max(1),
            run_id: file.harness.run_id.clone().unwrap_or_else(|| "run".to_string()),
            retry: RetryPolicy {
                max_retries: file.harness.max_retries,
                base_delay: Duration::from_millis(file.harness.retry_base_ms),
            },
            http_timeout: Duration::from_secs(file.harness.timeout_secs),
        }
    }
}

fn load_or_usage(root: &Path, language: Language) -> Result<Dataset, i32> {
    match load_dataset(root, language) {
        Ok(dataset) => Ok(dataset),
        Err(err) => {
            eprintln!("error: {err}");
            Err(EXIT_USAGE)
        }
    }
}

/// `validate`: print diagnostics for every point, exit 0 only when clean.
pub fn cmd_validate(dataset_root: &Path, language: Language) -> i32 {
    let dataset = match load_or_usage(dataset_root, language) {
        Ok(d) => d,
        Err(code) => return code,
    };
    for warning in &dataset.warnings {
        eprintln!("warning: {warning}");
    }
    let mut findings = 0usize;
    for point in &dataset.points {
        for diag in validate_point(point, dataset.snapshot_for(point)) {
            println!("{diag}");
            findings += 1;
        }
    }
    println!(
        "validated {} points across {} snapshots: {} finding(s)",
        dataset.points.len(),
        dataset.snapshots().len(),
        findings
    );
    if findings == 0 {
        EXIT_OK
    } else {
        EXIT_FINDINGS
    }
}

/// `collect`: run the configured strategy over every point and write the
/// submission-format contexts file (`{"id", "context"}` JSON lines ordered
/// by point id).
pub fn cmd_collect(cfg: &RunConfig, out: &Path) -> i32 {
    let dataset = match load_or_usage(&cfg.dataset_root, cfg.language) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let docs = parallel_map(&dataset.points, cfg.parallelism, |point| {
        let doc = collect(point, dataset.snapshot_for(point), &cfg.collector);
        (point.point_id.clone(), doc.rendered)
    });
    let mut rows: Vec<(String, String)> = docs;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut text = String::new();
    for (id, context) in &rows {
        text.push_str(
            &serde_json::to_string(&serde_json::json!({ "id": id, "context": context }))
                .expect("context row serialization cannot fail"),
        );
        text.push('\n');
    }
    if let Err(err) = std::fs::write(out, text) {
        eprintln!("error: cannot write {}: {err}", out.display());
        return EXIT_USAGE;
    }
    println!(
        "collected {} contexts with strategy `{}` into {}",
        rows.len(),
        cfg.collector.strategy,
        out.display()
    );
    EXIT_OK
}

#[derive(Debug, Deserialize)]
struct ContextRow {
    id: String,
    context: String,
}

pub fn read_contexts_file(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut contexts = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: ContextRow = serde_json::from_str(line)
            .map_err(|e| format!("{} line {}: {e}", path.display(), idx + 1))?;
        contexts.insert(row.id, row.context);
    }
    Ok(contexts)
}

/// Offline/mock source for completions, replacing real model endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockSpec {
    /// `echo`: return each point's ground truth (sanity ceiling).
    Echo,
    /// `empty`: return the empty string (floor).
    Empty,
    /// `constant:<text>`: return fixed text.
    Constant(String),
}

impl std::str::FromStr for MockSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "echo" => Ok(MockSpec::Echo),
            "empty" => Ok(MockSpec::Empty),
            other => other
                .strip_prefix("constant:")
                .map(|text| MockSpec::Constant(text.to_string()))
                .ok_or_else(|| format!("unknown mock `{other}` (echo, empty, constant:<text>)")),
        }
    }
}

/// `evaluate`: render prompts, obtain completions (endpoint, offline file,
/// or mock), score with chrF, and write the run report JSON. Exit 1 when
/// more than half of all requests failed.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    contexts_path: &Path,
    completions: Option<&Path>,
    mock: Option<&MockSpec>,
    out: &Path,
) -> i32 {
    let dataset = match load_or_usage(&cfg.dataset_root, cfg.language) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let contexts = match read_contexts_file(contexts_path) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };

    let mut registry = BackendRegistry::new();
    registry.set_http_timeout(cfg.http_timeout);
    if let Some(path) = completions {
        match OfflineFileBackend::load(path) {
            Ok(backend) => registry.register_default(Arc::new(backend)),
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_USAGE;
            }
        }
    } else if let Some(mock) = mock {
        let backend: Arc<dyn crate::harness::CompletionBackend> = match mock {
            MockSpec::Echo => Arc::new(EchoGroundTruthBackend::from_dataset(&dataset)),
            MockSpec::Empty => Arc::new(ConstantBackend(String::new())),
            MockSpec::Constant(text) => Arc::new(ConstantBackend(text.clone())),
        };
        registry.register_default(backend);
    }

    let opts = EvalOptions {
        run_id: cfg.run_id.clone(),
        parallelism: cfg.parallelism,
        chrf: Default::default(),
        retry: cfg.retry,
    };
    let report = match evaluate_run(&dataset, &contexts, &cfg.profiles, &registry, &opts) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let json = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    if let Err(err) = std::fs::write(out, json) {
        eprintln!("error: cannot write {}: {err}", out.display());
        return EXIT_USAGE;
    }

    println!("run `{}`: overall {}", report.run_id, crate::metric::format_score(report.overall));
    for (model, mean) in &report.per_model_mean {
        println!("  {model}: {}", crate::metric::format_score(*mean));
    }

    let total: usize = report.per_point.values().map(|m| m.len()).sum();
    let failed: usize = report
        .per_point
        .values()
        .flat_map(|m| m.values())
        .filter(|r| r.error.is_some())
        .count();
    if total > 0 && failed * 2 > total {
        eprintln!("error: {failed}/{total} completion requests failed");
        return EXIT_FINDINGS;
    }
    EXIT_OK
}

/// `leaderboard`: rank previously written run reports.
pub fn cmd_leaderboard(report_paths: &[PathBuf], format: LeaderboardFormat) -> i32 {
    let mut reports: Vec<RunReport> = Vec::new();
    for path in report_paths {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(err) => {
                eprintln!("error: {}: {err}", path.display());
                return EXIT_USAGE;
            }
        };
        match serde_json::from_str(&text) {
            Ok(report) => reports.push(report),
            Err(err) => {
                eprintln!("error: {} is not a run report: {err}", path.display());
                return EXIT_USAGE;
            }
        }
    }
    match leaderboard(&reports, format) {
        Ok(table) => {
            print!("{table}");
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_USAGE
        }
    }
}

/// `convert`: adapt a published archive layout into the snapshot store.
///
/// The source directory must hold `points.jsonl` plus `snapshots/<repo>/`
/// entries that are either already-extracted `<revision>/` trees or
/// `<revision>.tar.gz` archives. The destination becomes a loadable dataset
/// root for `language`.
pub fn cmd_convert(source: &Path, dest: &Path, language: Language) -> i32 {
    match convert_tree(source, dest, language) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_USAGE
        }
    }
}

fn convert_tree(source: &Path, dest: &Path, language: Language) -> Result<String, String> {
    let points_src = source.join("points.jsonl");
    let points = std::fs::read(&points_src).map_err(|e| format!("{}: {e}", points_src.display()))?;
    // Validate before copying so a broken source fails loudly.
    let parsed = crate::dataset::read_points_file(
        std::str::from_utf8(&points).map_err(|_| "points.jsonl is not UTF-8".to_string())?,
    )
    .map_err(|e| e.to_string())?;

    let lang_dir = dest.join(language.as_str());
    let snap_dest = lang_dir.join("snapshots");
    std::fs::create_dir_all(&snap_dest).map_err(|e| format!("{}: {e}", snap_dest.display()))?;
    std::fs::write(lang_dir.join("points.jsonl"), &points)
        .map_err(|e| format!("cannot write points file: {e}"))?;

    let snap_src = source.join("snapshots");
    let mut trees = 0usize;
    let mut archives = 0usize;
    if snap_src.is_dir() {
        for repo_entry in read_sorted_dir(&snap_src)? {
            let repo_name = repo_entry.file_name().to_string_lossy().into_owned();
            if !repo_entry.path().is_dir() {
                continue;
            }
            for rev_entry in read_sorted_dir(&repo_entry.path())? {
                let rev_path = rev_entry.path();
                let rev_name = rev_entry.file_name().to_string_lossy().into_owned();
                if rev_path.is_dir() {
                    copy_tree(&rev_path, &snap_dest.join(&repo_name).join(&rev_name))?;
                    trees += 1;
                } else if let Some(stem) = rev_name
                    .strip_suffix(".tar.gz")
                    .or_else(|| rev_name.strip_suffix(".tgz"))
                {
                    extract_archive(&rev_path, &snap_dest.join(&repo_name).join(stem))?;
                    archives += 1;
                }
            }
        }
    }
    Ok(format!(
        "converted {} points, {trees} snapshot tree(s), {archives} archive(s) into {}",
        parsed.len(),
        lang_dir.display()
    ))
}

fn read_sorted_dir(dir: &Path) -> Result<Vec<std::fs::DirEntry>, String> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .collect::<Result<_, _>>()
        .map_err(|e| format!("{}: {e}", dir.display()))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn copy_tree(src: &Path, dest: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dest).map_err(|e| format!("{}: {e}", dest.display()))?;
    for entry in read_sorted_dir(src)? {
        let from = entry.path();
        let to = dest.join(entry.file_name());
        if from.is_dir() {
            copy_tree(&from, &to)?;
        } else {
            std::fs::copy(&from, &to).map_err(|e| format!("{}: {e}", from.display()))?;
        }
    }
    Ok(())
}

#[cfg(feature = "archive")]
fn extract_archive(archive: &Path, dest: &Path) -> Result<(), String> {
    let file = std::fs::File::open(archive).map_err(|e| format!("{}: {e}", archive.display()))?;
    let tar = flate2::read::GzDecoder::new(file);
    let mut unpacker = tar::Archive::new(tar);
    std::fs::create_dir_all(dest).map_err(|e| format!("{}: {e}", dest.display()))?;
    unpacker.unpack(dest).map_err(|e| format!("{}: {e}", archive.display()))?;
    Ok(())
}

#[cfg(not(feature = "archive"))]
fn extract_archive(archive: &Path, _dest: &Path) -> Result<(), String> {
    Err(format!(
        "{}: archive extraction requires the `archive` feature",
        archive.display()
    ))
}

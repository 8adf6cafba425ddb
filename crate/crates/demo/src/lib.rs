//! Browser bindings for the fimctx pipeline. Three operations back the
//! static page in `www/`: chrF scoring between two texts, context
//! collection over a pasted mini-repository, and model-specific FIM prompt
//! rendering.
//!
//! Build with `wasm-pack build --target web crates/demo`. The `_impl`
//! functions hold the logic and compile (and test) on any target; the
//! `#[wasm_bindgen]` wrappers only translate errors into `JsValue`.

use fimctx::collect::{collect, CollectorConfig, Strategy};
use fimctx::dataset::{CompletionPoint, RepoSnapshot};
use fimctx::harness::{render_prompt, ModelProfile};
use fimctx::metric::{chrf, ChrfParams, WhitespaceMode};
use fimctx::Language;
use serde::Serialize;
use std::collections::BTreeMap;
use wasm_bindgen::prelude::*;

/// chrF between a hypothesis and a reference, in `[0, 1]`.
#[wasm_bindgen]
pub fn score_chrf(hypothesis: &str, reference: &str, max_order: usize, collapse_whitespace: bool) -> f64 {
    let params = ChrfParams {
        max_order: max_order.clamp(1, 10),
        whitespace_mode: if collapse_whitespace {
            WhitespaceMode::Collapse
        } else {
            WhitespaceMode::Keep
        },
    };
    chrf(hypothesis, reference, &params)
}

#[derive(Serialize)]
struct SnippetView {
    file_path: String,
    provenance: String,
    score: f64,
    chars: usize,
}

#[derive(Serialize)]
struct CollectView {
    rendered: String,
    budget_units_used: usize,
    snippets: Vec<SnippetView>,
}

fn collect_context_impl(
    files_json: &str,
    prefix: &str,
    suffix: &str,
    strategy: &str,
    language: &str,
    budget_units: usize,
    seed: u64,
) -> Result<String, String> {
    let files: BTreeMap<String, String> =
        serde_json::from_str(files_json).map_err(|e| format!("files: {e}"))?;
    let language: Language = language.parse()?;
    let strategy: Strategy = strategy.parse()?;

    let co_changed: Vec<String> = files.keys().cloned().collect();
    let snapshot = RepoSnapshot::new("demo", "live", files).map_err(|e| e.to_string())?;
    let point = CompletionPoint {
        point_id: "demo-point".to_string(),
        repo_id: "demo".to_string(),
        revision: "live".to_string(),
        file_path: "__editing__".to_string(),
        prefix: prefix.to_string(),
        suffix: suffix.to_string(),
        ground_truth: None,
        co_changed_files: co_changed,
    };
    let cfg = CollectorConfig {
        strategy,
        language,
        budget_units,
        rng_seed: seed,
        ..Default::default()
    };
    let doc = collect(&point, &snapshot, &cfg);
    let view = CollectView {
        rendered: doc.rendered,
        budget_units_used: doc.budget_units_used,
        snippets: doc
            .snippets
            .iter()
            .map(|s| SnippetView {
                file_path: s.file_path.clone(),
                provenance: s.provenance.clone(),
                score: s.score,
                chars: s.text.chars().count(),
            })
            .collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Run one context-collection strategy over a pasted repository.
///
/// `files_json` is an object mapping relative paths to file text. Every file
/// doubles as a co-changed candidate so the recent/random strategies have
/// something to draw from. Returns a JSON object with the rendered context,
/// the units spent, and per-snippet provenance.
#[wasm_bindgen]
pub fn collect_context(
    files_json: &str,
    prefix: &str,
    suffix: &str,
    strategy: &str,
    language: &str,
    budget_units: usize,
    seed: u64,
) -> Result<String, JsValue> {
    collect_context_impl(files_json, prefix, suffix, strategy, language, budget_units, seed)
        .map_err(|e| JsValue::from_str(&e))
}

fn render_fim_prompt_impl(
    context: &str,
    prefix: &str,
    suffix: &str,
    model: &str,
    budget_units: usize,
) -> Result<String, String> {
    let mut profile: ModelProfile = ModelProfile::default_profiles()
        .into_iter()
        .find(|p| p.name == model)
        .ok_or_else(|| format!("unknown model `{model}` (alpha-fim, beta-fim, gamma-fim)"))?;
    if budget_units > 0 {
        profile.context_budget_units = budget_units;
    }
    let rendered = render_prompt(&profile, context, prefix, suffix);
    Ok(serde_json::json!({
        "prompt": rendered.prompt,
        "warnings": rendered.warnings,
    })
    .to_string())
}

/// Render the final prompt for one of the bundled model profiles
/// (`alpha-fim`, `beta-fim`, `gamma-fim`), overriding its context budget.
#[wasm_bindgen]
pub fn render_fim_prompt(
    context: &str,
    prefix: &str,
    suffix: &str,
    model: &str,
    budget_units: usize,
) -> Result<String, JsValue> {
    render_fim_prompt_impl(context, prefix, suffix, model, budget_units)
        .map_err(|e| JsValue::from_str(&e))
}

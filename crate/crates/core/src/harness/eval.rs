//! Run evaluation: render → request → score → aggregate.

use super::backend::{request_completion, BackendRegistry, RetryPolicy};
use super::{render_prompt, HarnessError, ModelProfile};
use crate::dataset::Dataset;
use crate::metric::{aggregate_scores, chrf, ChrfParams};
use crate::util::parallel_map;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub completion: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One evaluated run. `overall` always equals the aggregate of `per_point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    /// point id -> model name -> result.
    pub per_point: BTreeMap<String, BTreeMap<String, PointResult>>,
    pub per_model_mean: BTreeMap<String, f64>,
    pub overall: f64,
    /// Points excluded for having no ground truth.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_points: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub config: serde_json::Value,
}

impl RunReport {
    /// Score view of `per_point`, for re-aggregation.
    pub fn scores(&self) -> BTreeMap<String, BTreeMap<String, f64>> {
        self.per_point
            .iter()
            .map(|(point, models)| {
                let inner = models.iter().map(|(m, r)| (m.clone(), r.score)).collect();
                (point.clone(), inner)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub run_id: String,
    /// Completion requests in flight at once.
    pub parallelism: usize,
    pub chrf: ChrfParams,
    pub retry: RetryPolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            run_id: "run".to_string(),
            parallelism: 8,
            chrf: ChrfParams::default(),
            retry: RetryPolicy::default(),
        }
    }
}

/// Evaluate every point that has a ground truth against every profile.
///
/// A point absent from `contexts` is scored with an empty context and noted
/// as a warning; a failed request (after retries) scores 0 with the error
/// recorded, and the run continues. With deterministic backends the report
/// is byte-identical regardless of `parallelism`.
pub fn evaluate_run(
    dataset: &Dataset,
    contexts: &BTreeMap<String, String>,
    profiles: &[ModelProfile],
    backends: &BackendRegistry,
    opts: &EvalOptions,
) -> Result<RunReport, HarnessError> {
    if profiles.is_empty() {
        return Err(HarnessError::InvalidInput("no model profiles given".to_string()));
    }
    for profile in profiles {
        profile.validate()?;
    }
    let mut names: Vec<&str> = profiles.iter().map(|p| p.name.as_str()).collect();
    names.sort();
    names.dedup();
    if names.len() != profiles.len() {
        return Err(HarnessError::InvalidInput("duplicate profile names".to_string()));
    }

    let mut skipped_points = Vec::new();
    let mut eligible = Vec::new();
    for point in &dataset.points {
        match &point.ground_truth {
            Some(truth) if !truth.is_empty() => eligible.push((point, truth.clone())),
            _ => skipped_points.push(point.point_id.clone()),
        }
    }

    type PointOutcome = (String, BTreeMap<String, PointResult>, Vec<String>);
    let outcomes: Vec<PointOutcome> = parallel_map(&eligible, opts.parallelism, |(point, truth)| {
        let mut warnings = Vec::new();
        let context = match contexts.get(&point.point_id) {
            Some(ctx) => ctx.as_str(),
            None => {
                warnings.push(format!(
                    "point `{}` missing from contexts; scored with empty context",
                    point.point_id
                ));
                ""
            }
        };
        let mut results = BTreeMap::new();
        for profile in profiles {
            let rendered = render_prompt(profile, context, &point.prefix, &point.suffix);
            warnings.extend(rendered.warnings);
            let result = match request_completion(
                profile,
                &rendered.prompt,
                &point.point_id,
                backends,
                &opts.retry,
            ) {
                Ok(completion) => {
                    let score = chrf(&completion, truth, &opts.chrf);
                    PointResult { completion, score, error: None }
                }
                Err(err) => PointResult {
                    completion: String::new(),
                    score: 0.0,
                    error: Some(err.to_string()),
                },
            };
            results.insert(profile.name.clone(), result);
        }
        (point.point_id.clone(), results, warnings)
    });

    let mut per_point = BTreeMap::new();
    let mut warnings = Vec::new();
    for (point_id, results, mut point_warnings) in outcomes {
        warnings.append(&mut point_warnings);
        per_point.insert(point_id, results);
    }

    let (per_model_mean, overall) = if per_point.is_empty() {
        (BTreeMap::new(), 0.0)
    } else {
        let scores: BTreeMap<String, BTreeMap<String, f64>> = per_point
            .iter()
            .map(|(p, models)| {
                (p.clone(), models.iter().map(|(m, r)| (m.clone(), r.score)).collect())
            })
            .collect();
        aggregate_scores(&scores)?
    };

    Ok(RunReport {
        run_id: opts.run_id.clone(),
        per_point,
        per_model_mean,
        overall,
        skipped_points,
        warnings,
        // Execution details like parallelism stay out of the snapshot: the
        // report must be byte-identical whatever the pool size.
        config: serde_json::json!({
            "run_id": opts.run_id,
            "chrf": opts.chrf,
            "profiles": profiles,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CompletionPoint, RepoSnapshot};
    use crate::harness::{BackendError, CompletionBackend, CompletionRequest, ConstantBackend, EchoGroundTruthBackend};
    use crate::lang::Language;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn tiny_dataset(n: usize) -> Dataset {
        let mut files = BTreeMap::new();
        files.insert("main.py".to_string(), "x = 1\n".to_string());
        let snapshot = RepoSnapshot::new("repo", "rev", files).unwrap();
        let points = (0..n)
            .map(|i| CompletionPoint {
                point_id: format!("p{i:02}"),
                repo_id: "repo".to_string(),
                revision: "rev".to_string(),
                file_path: "main.py".to_string(),
                prefix: format!("prefix {i}\n"),
                suffix: "suffix\n".to_string(),
                ground_truth: Some(format!("truth_{i} = {i}\n")),
                co_changed_files: Vec::new(),
            })
            .collect();
        let mut snaps = BTreeMap::new();
        snaps.insert(("repo".to_string(), "rev".to_string()), snapshot);
        Dataset::new(points, snaps, Language::Python).unwrap()
    }

    fn contexts_for(dataset: &Dataset) -> BTreeMap<String, String> {
        dataset
            .points
            .iter()
            .map(|p| (p.point_id.clone(), String::new()))
            .collect()
    }

    struct CountingBackend {
        inner: EchoGroundTruthBackend,
        calls: AtomicUsize,
    }

    impl CompletionBackend for CountingBackend {
        fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.complete(request)
        }
    }

    #[test]
    fn echo_backend_scores_one_and_counts_requests() {
        let dataset = tiny_dataset(5);
        let profiles = ModelProfile::default_profiles();
        let counting = Arc::new(CountingBackend {
            inner: EchoGroundTruthBackend::from_dataset(&dataset),
            calls: AtomicUsize::new(0),
        });
        let mut registry = BackendRegistry::new();
        registry.register_default(counting.clone());
        let report = evaluate_run(
            &dataset,
            &contexts_for(&dataset),
            &profiles,
            &registry,
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.overall, 1.0);
        for mean in report.per_model_mean.values() {
            assert_eq!(*mean, 1.0);
        }
        // Exactly k·m requests.
        assert_eq!(counting.calls.load(Ordering::SeqCst), 5 * profiles.len());
    }

    #[test]
    fn constant_empty_backend_scores_zero() {
        let dataset = tiny_dataset(3);
        let mut registry = BackendRegistry::new();
        registry.register_default(Arc::new(ConstantBackend(String::new())));
        let report = evaluate_run(
            &dataset,
            &contexts_for(&dataset),
            &ModelProfile::default_profiles(),
            &registry,
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.overall, 0.0);
    }

    #[test]
    fn missing_context_warns_and_scores_empty() {
        let dataset = tiny_dataset(2);
        let mut registry = BackendRegistry::new();
        registry.register_default(Arc::new(EchoGroundTruthBackend::from_dataset(&dataset)));
        let mut contexts = contexts_for(&dataset);
        contexts.remove("p01");
        let report = evaluate_run(
            &dataset,
            &contexts,
            &ModelProfile::default_profiles(),
            &registry,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("p01")));
        assert!(report.per_point.contains_key("p01"));
    }

    #[test]
    fn truthless_points_are_skipped_and_listed() {
        let mut dataset = tiny_dataset(3);
        dataset.points[1].ground_truth = None;
        let mut registry = BackendRegistry::new();
        registry.register_default(Arc::new(EchoGroundTruthBackend::from_dataset(&dataset)));
        let report = evaluate_run(
            &dataset,
            &contexts_for(&dataset),
            &ModelProfile::default_profiles(),
            &registry,
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.skipped_points, vec!["p01".to_string()]);
        assert_eq!(report.per_point.len(), 2);
    }

    #[test]
    fn failed_requests_score_zero_and_run_continues() {
        struct AlwaysFatal;
        impl CompletionBackend for AlwaysFatal {
            fn complete(&self, _r: &CompletionRequest<'_>) -> Result<String, BackendError> {
                Err(BackendError::Fatal("down".to_string()))
            }
        }
        let dataset = tiny_dataset(2);
        let mut registry = BackendRegistry::new();
        registry.register_default(Arc::new(AlwaysFatal));
        let report = evaluate_run(
            &dataset,
            &contexts_for(&dataset),
            &ModelProfile::default_profiles(),
            &registry,
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.overall, 0.0);
        let any = report.per_point.values().next().unwrap().values().next().unwrap();
        assert!(any.error.as_deref().unwrap().contains("down"));
    }

    #[test]
    fn parallel_report_is_byte_identical_to_serial() {
        let dataset = tiny_dataset(17);
        let mut registry = BackendRegistry::new();
        registry.register_default(Arc::new(EchoGroundTruthBackend::from_dataset(&dataset)));
        let profiles = ModelProfile::default_profiles();
        let contexts = contexts_for(&dataset);

        let serial = evaluate_run(
            &dataset,
            &contexts,
            &profiles,
            &registry,
            &EvalOptions { parallelism: 1, ..Default::default() },
        )
        .unwrap();
        let parallel = evaluate_run(
            &dataset,
            &contexts,
            &profiles,
            &registry,
            &EvalOptions { parallelism: 8, ..Default::default() },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_vec(&serial).unwrap(),
            serde_json::to_vec(&parallel).unwrap()
        );
    }

    #[test]
    fn overall_matches_recomputation() {
        let dataset = tiny_dataset(6);
        let mut registry = BackendRegistry::new();
        registry.register_default(Arc::new(ConstantBackend("truth_0 = 0\n".to_string())));
        let report = evaluate_run(
            &dataset,
            &contexts_for(&dataset),
            &ModelProfile::default_profiles(),
            &registry,
            &EvalOptions::default(),
        )
        .unwrap();
        let (_, overall) = aggregate_scores(&report.scores()).unwrap();
        assert!((report.overall - overall).abs() < 1e-12);
    }
}

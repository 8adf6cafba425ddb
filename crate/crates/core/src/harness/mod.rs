//! The evaluation harness: render model-specific FIM prompts from collected
//! contexts, obtain completions from a backend (HTTP endpoint, offline file,
//! or deterministic mocks), score them with chrF, and aggregate runs into
//! leaderboard reports.

mod backend;
mod board;
mod eval;

pub use backend::{
    request_completion, BackendError, BackendRegistry, CompletionBackend, CompletionRequest,
    ConstantBackend, EchoGroundTruthBackend, OfflineFileBackend, RetryPolicy,
};
#[cfg(feature = "net")]
pub use backend::HttpBackend;
pub use board::{leaderboard, LeaderboardFormat};
pub use eval::{evaluate_run, EvalOptions, PointResult, RunReport};

use crate::collect::FILE_SEP;
use crate::metric::MetricError;
use crate::util::{budget_units, truncate_chars_head, truncate_chars_tail};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid profile `{name}`: {reason}")]
    InvalidProfile { name: String, reason: String },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptOrder {
    /// context, prefix, suffix, middle-sentinel.
    ContextFirstPsm,
    /// context, suffix, prefix, middle-sentinel.
    ContextFirstSpm,
}

/// Everything needed to turn a context + caret split into one model's
/// prompt and to reach that model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub name: String,
    pub fim_prefix_token: String,
    pub fim_suffix_token: String,
    pub fim_middle_token: String,
    pub file_sep_token: String,
    /// Whole-prompt budget in units (1 unit covers 4 characters); context is
    /// sacrificed first when it does not fit.
    pub context_budget_units: usize,
    pub order: PromptOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Environment variable holding the bearer token for `endpoint`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    pub max_new_units: usize,
}

impl ModelProfile {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let tokens = [
            &self.fim_prefix_token,
            &self.fim_suffix_token,
            &self.fim_middle_token,
            &self.file_sep_token,
        ];
        if tokens.iter().any(|t| t.is_empty()) {
            return Err(HarnessError::InvalidProfile {
                name: self.name.clone(),
                reason: "FIM tokens must be non-empty".to_string(),
            });
        }
        for i in 0..tokens.len() {
            for j in i + 1..tokens.len() {
                if tokens[i] == tokens[j] {
                    return Err(HarnessError::InvalidProfile {
                        name: self.name.clone(),
                        reason: format!("duplicate special token `{}`", tokens[i]),
                    });
                }
            }
        }
        Ok(())
    }

    /// Three placeholder models with distinct token sets and budgets, so
    /// per-model rendering differences are exercised without real vendor
    /// templates (those are user-supplied config).
    pub fn default_profiles() -> Vec<ModelProfile> {
        let mk = |name: &str, tag: &str, budget: usize, order: PromptOrder| ModelProfile {
            name: name.to_string(),
            fim_prefix_token: format!("<|{tag}_pre|>"),
            fim_suffix_token: format!("<|{tag}_suf|>"),
            fim_middle_token: format!("<|{tag}_mid|>"),
            file_sep_token: format!("<|{tag}_file|>"),
            context_budget_units: budget,
            order,
            endpoint: None,
            api_key_env: None,
            max_new_units: 64,
        };
        vec![
            mk("alpha-fim", "a", 4000, PromptOrder::ContextFirstPsm),
            mk("beta-fim", "b", 2000, PromptOrder::ContextFirstSpm),
            mk("gamma-fim", "g", 1000, PromptOrder::ContextFirstPsm),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedPrompt {
    pub prompt: String,
    pub warnings: Vec<String>,
}

/// Render one model's prompt. The canonical `<|file_sep|>` separators are
/// re-mapped to the profile's own token, the context is trimmed tail-first
/// into whatever budget remains after prefix and suffix, and only when
/// prefix + suffix alone exceed the budget is the prefix head-trimmed and
/// the suffix tail-trimmed (with a warning) — context is always sacrificed
/// before caret content.
pub fn render_prompt(
    profile: &ModelProfile,
    context: &str,
    prefix: &str,
    suffix: &str,
) -> RenderedPrompt {
    let mut warnings = Vec::new();
    let mapped_context = if context.is_empty() {
        String::new()
    } else {
        context.split(FILE_SEP).collect::<Vec<_>>().join(&profile.file_sep_token)
    };

    let budget = profile.context_budget_units;
    let prefix_units = budget_units(prefix);
    let suffix_units = budget_units(suffix);

    let (context_part, prefix_part, suffix_part);
    if prefix_units + suffix_units > budget {
        warnings.push(format!(
            "{}: prefix+suffix ({} units) exceed the context budget ({budget}); \
             context dropped, caret windows trimmed",
            profile.name,
            prefix_units + suffix_units,
        ));
        let half = budget / 2;
        let prefix_alloc = prefix_units.min(half.max(budget.saturating_sub(suffix_units)));
        let suffix_alloc = budget - prefix_alloc;
        context_part = String::new();
        prefix_part = truncate_chars_head(prefix, 4 * prefix_alloc).to_string();
        suffix_part = truncate_chars_tail(suffix, 4 * suffix_alloc).to_string();
    } else {
        let available = budget - prefix_units - suffix_units;
        context_part = truncate_chars_tail(&mapped_context, 4 * available).to_string();
        prefix_part = prefix.to_string();
        suffix_part = suffix.to_string();
    }

    let prompt = match profile.order {
        PromptOrder::ContextFirstPsm => format!(
            "{context_part}{}{prefix_part}{}{suffix_part}{}",
            profile.fim_prefix_token, profile.fim_suffix_token, profile.fim_middle_token
        ),
        PromptOrder::ContextFirstSpm => format!(
            "{context_part}{}{suffix_part}{}{prefix_part}{}",
            profile.fim_suffix_token, profile.fim_prefix_token, profile.fim_middle_token
        ),
    };
    RenderedPrompt { prompt, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> ModelProfile {
        ModelProfile::default_profiles().remove(0)
    }

    #[test]
    fn profiles_validate_and_require_distinct_tokens() {
        for p in ModelProfile::default_profiles() {
            p.validate().unwrap();
        }
        let mut bad = profile();
        bad.fim_suffix_token = bad.fim_prefix_token.clone();
        assert!(bad.validate().is_err());
        let mut empty = profile();
        empty.fim_middle_token.clear();
        assert!(empty.validate().is_err());
    }

    #[test]
    fn empty_context_is_pure_fim() {
        let p = profile();
        let out = render_prompt(&p, "", "PRE", "SUF");
        assert_eq!(out.prompt, "<|a_pre|>PRE<|a_suf|>SUF<|a_mid|>");
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn spm_order_swaps_the_segments() {
        let mut p = profile();
        p.order = PromptOrder::ContextFirstSpm;
        let out = render_prompt(&p, "", "PRE", "SUF");
        assert_eq!(out.prompt, "<|a_suf|>SUF<|a_pre|>PRE<|a_mid|>");
    }

    #[test]
    fn separators_are_remapped_per_model() {
        let p = profile();
        let context = "<|file_sep|>a.py\nx = 1\n<|file_sep|>b.py\ny = 2\n";
        let out = render_prompt(&p, context, "PRE", "SUF");
        let before_prefix = out.prompt.split("<|a_pre|>").next().unwrap();
        assert_eq!(before_prefix.matches("<|a_file|>").count(), 2);
        assert!(!out.prompt.contains(FILE_SEP));
    }

    #[test]
    fn oversized_context_is_trimmed_tail_first() {
        let mut p = profile();
        p.context_budget_units = 50;
        let context = format!("<|file_sep|>big.py\n{}\n", "x".repeat(4000));
        let out = render_prompt(&p, &context, "PRE", "SUF");
        assert!(out.warnings.is_empty());
        let max_len = 4 * 50 + "PRE".len() + "SUF".len()
            + p.fim_prefix_token.len() + p.fim_suffix_token.len() + p.fim_middle_token.len();
        assert!(out.prompt.len() <= max_len, "{} > {max_len}", out.prompt.len());
        assert!(out.prompt.ends_with("<|a_pre|>PRE<|a_suf|>SUF<|a_mid|>"));
    }

    #[test]
    fn caret_content_survives_while_any_context_remains() {
        let mut p = profile();
        p.context_budget_units = 12; // 48 chars
        let prefix = "p".repeat(20);
        let suffix = "s".repeat(16);
        let out = render_prompt(&p, "<|file_sep|>f\ncontext body\n", &prefix, &suffix);
        assert!(out.warnings.is_empty());
        assert!(out.prompt.contains(&prefix));
        assert!(out.prompt.contains(&suffix));
        // 5 + 4 = 9 units for the caret leave 3 units (12 chars) of context.
        assert!(out.prompt.starts_with("<|a_file|>f\n<|a_pre|>"), "{}", out.prompt);
    }

    #[test]
    fn over_budget_caret_trims_head_and_tail_with_warning() {
        let mut p = profile();
        p.context_budget_units = 10; // 40 chars total
        let prefix: String = ('a'..='z').cycle().take(100).collect();
        let suffix: String = ('A'..='Z').cycle().take(100).collect();
        let out = render_prompt(&p, "<|file_sep|>f\nctx\n", &prefix, &suffix);
        assert_eq!(out.warnings.len(), 1);
        // Context is gone entirely.
        assert!(!out.prompt.contains("<|a_file|>"));
        // Prefix keeps its tail (the caret side), suffix keeps its head.
        let kept_prefix = out
            .prompt
            .split("<|a_pre|>")
            .nth(1)
            .unwrap()
            .split("<|a_suf|>")
            .next()
            .unwrap();
        assert!(prefix.ends_with(kept_prefix));
        let kept_suffix = out
            .prompt
            .split("<|a_suf|>")
            .nth(1)
            .unwrap()
            .split("<|a_mid|>")
            .next()
            .unwrap();
        assert!(suffix.starts_with(kept_suffix));
        assert_eq!(budget_units(kept_prefix) + budget_units(kept_suffix), 10);
    }
}

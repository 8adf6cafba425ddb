//! chrF scoring and run-level aggregation.
//!
//! chrF is the harmonic mean of character-level n-gram precision and recall,
//! averaged over orders 1..=`max_order`. Matches are clipped (multiset
//! intersection), which makes the score symmetric under swapping hypothesis
//! and reference.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("no scores")]
    NoScores,
    #[error("point `{point_id}` has a different model set than the first point")]
    ModelSetMismatch { point_id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhitespaceMode {
    /// Score the strings as-is.
    Keep,
    /// Collapse every whitespace run to a single space before scoring, so
    /// indentation-only differences do not dominate code scores.
    Collapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrfParams {
    /// Highest n-gram order, 1..=10.
    pub max_order: usize,
    pub whitespace_mode: WhitespaceMode,
}

impl Default for ChrfParams {
    fn default() -> Self {
        Self { max_order: 6, whitespace_mode: WhitespaceMode::Collapse }
    }
}

/// All contiguous length-`n` character substrings of `text` with multiplicity.
/// Empty when `text` has fewer than `n` characters.
pub fn char_ngrams(text: &str, n: usize) -> HashMap<String, usize> {
    assert!(n >= 1, "n-gram order must be at least 1");
    let chars: Vec<char> = text.chars().collect();
    let mut grams = HashMap::new();
    if chars.len() < n {
        return grams;
    }
    for window in chars.windows(n) {
        *grams.entry(window.iter().collect::<String>()).or_insert(0) += 1;
    }
    grams
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_run = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !in_run {
                out.push(' ');
                in_run = true;
            }
        } else {
            out.push(ch);
            in_run = false;
        }
    }
    out
}

/// Allocation-free counting used by the scoring loop; `char_ngrams` keeps
/// the owned-string form for callers.
fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut grams: HashMap<&[char], usize> = HashMap::new();
    if chars.len() >= n {
        for window in chars.windows(n) {
            *grams.entry(window).or_insert(0) += 1;
        }
    }
    grams
}

fn clipped_matches(a: &HashMap<&[char], usize>, b: &HashMap<&[char], usize>) -> usize {
    a.iter().map(|(gram, &count)| count.min(b.get(gram).copied().unwrap_or(0))).sum()
}

/// chrF in `[0, 1]`.
///
/// Per order n: precision is clipped matches over hypothesis n-grams, recall
/// is clipped matches over reference n-grams. Orders where both strings are
/// shorter than n are excluded from the averages. The final score is the
/// plain harmonic mean (β = 1) of the averaged precision and recall, and 0
/// when both averages are 0. Two empty strings score 1, one empty scores 0.
pub fn chrf(hypothesis: &str, reference: &str, params: &ChrfParams) -> f64 {
    let max_order = params.max_order.clamp(1, 10);
    let (hyp, refr) = match params.whitespace_mode {
        WhitespaceMode::Keep => (hypothesis.to_string(), reference.to_string()),
        WhitespaceMode::Collapse => (collapse_whitespace(hypothesis), collapse_whitespace(reference)),
    };
    let hyp_chars: Vec<char> = hyp.chars().collect();
    let ref_chars: Vec<char> = refr.chars().collect();
    let hyp_len = hyp_chars.len();
    let ref_len = ref_chars.len();
    if hyp_len == 0 && ref_len == 0 {
        return 1.0;
    }
    if hyp_len == 0 || ref_len == 0 {
        return 0.0;
    }

    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=max_order {
        if hyp_len < n && ref_len < n {
            continue;
        }
        let hyp_grams = ngram_counts(&hyp_chars, n);
        let ref_grams = ngram_counts(&ref_chars, n);
        let matched = clipped_matches(&hyp_grams, &ref_grams) as f64;
        let hyp_total = hyp_len.saturating_sub(n - 1) as f64;
        let ref_total = ref_len.saturating_sub(n - 1) as f64;
        precision_sum += if hyp_total > 0.0 { matched / hyp_total } else { 0.0 };
        recall_sum += if ref_total > 0.0 { matched / ref_total } else { 0.0 };
        orders += 1;
    }
    debug_assert!(orders > 0);
    let chr_p = precision_sum / orders as f64;
    let chr_r = recall_sum / orders as f64;
    if chr_p + chr_r == 0.0 {
        return 0.0;
    }
    2.0 * chr_p * chr_r / (chr_p + chr_r)
}

/// Per-model means over points, plus the overall mean of the per-model means.
///
/// Every point must carry scores for the same model set.
pub fn aggregate_scores(
    per_point: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Result<(BTreeMap<String, f64>, f64), MetricError> {
    let mut points = per_point.iter();
    let Some((_, first)) = points.next() else {
        return Err(MetricError::NoScores);
    };
    let models: Vec<&String> = first.keys().collect();
    if models.is_empty() {
        return Err(MetricError::NoScores);
    }
    for (point_id, scores) in per_point {
        if scores.len() != models.len() || !models.iter().all(|m| scores.contains_key(*m)) {
            return Err(MetricError::ModelSetMismatch { point_id: point_id.clone() });
        }
    }

    let n_points = per_point.len() as f64;
    let mut per_model_mean = BTreeMap::new();
    for model in &models {
        let sum: f64 = per_point.values().map(|scores| scores[*model]).sum();
        per_model_mean.insert((*model).clone(), sum / n_points);
    }
    let overall = per_model_mean.values().sum::<f64>() / per_model_mean.len() as f64;
    Ok((per_model_mean, overall))
}

/// Report formatting: 4 fractional digits, as in leaderboard tables.
pub fn format_score(score: f64) -> String {
    format!("{score:.4}")
}

//! Leaderboard rendering over evaluated runs.

use super::{HarnessError, RunReport};
use crate::metric::format_score;
use std::str::FromStr;

/// Overall scores this close share a rank, mirroring how negligible
/// differences are reported as ties.
pub const SHARED_RANK_THRESHOLD: f64 = 0.0005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderboardFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for LeaderboardFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(LeaderboardFormat::Markdown),
            "csv" => Ok(LeaderboardFormat::Csv),
            "json" => Ok(LeaderboardFormat::Json),
            other => Err(format!("unknown format `{other}` (markdown, csv, json)")),
        }
    }
}

struct Row<'a> {
    rank: usize,
    report: &'a RunReport,
}

/// Rows sorted by overall score descending; runs within
/// [`SHARED_RANK_THRESHOLD`] of their group leader share a (dense) rank.
/// All reports must carry the same model set.
pub fn leaderboard(reports: &[RunReport], format: LeaderboardFormat) -> Result<String, HarnessError> {
    if reports.is_empty() {
        return Err(HarnessError::InvalidInput("no reports to rank".to_string()));
    }
    let models: Vec<&String> = reports[0].per_model_mean.keys().collect();
    for report in reports {
        let these: Vec<&String> = report.per_model_mean.keys().collect();
        if these != models {
            return Err(HarnessError::InvalidInput(format!(
                "report `{}` has a different model set than `{}`",
                report.run_id, reports[0].run_id
            )));
        }
    }

    let mut ordered: Vec<&RunReport> = reports.iter().collect();
    ordered.sort_by(|a, b| {
        b.overall.total_cmp(&a.overall).then_with(|| a.run_id.cmp(&b.run_id))
    });

    let mut rows: Vec<Row> = Vec::with_capacity(ordered.len());
    let mut rank = 0usize;
    let mut leader = f64::INFINITY;
    for report in ordered {
        if leader - report.overall > SHARED_RANK_THRESHOLD {
            rank += 1;
            leader = report.overall;
        } else if rank == 0 {
            rank = 1;
            leader = report.overall;
        }
        rows.push(Row { rank, report });
    }

    Ok(match format {
        LeaderboardFormat::Markdown => render_markdown(&rows, &models),
        LeaderboardFormat::Csv => render_csv(&rows, &models),
        LeaderboardFormat::Json => render_json(&rows, &models),
    })
}

fn render_markdown(rows: &[Row], models: &[&String]) -> String {
    let mut out = String::from("| Rank | Run | Average |");
    for model in models {
        out.push_str(&format!(" {model} |"));
    }
    out.push('\n');
    out.push_str("|---|---|---|");
    out.push_str(&"---|".repeat(models.len()));
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "| {} | {} | {} |",
            row.rank,
            row.report.run_id,
            format_score(row.report.overall)
        ));
        for model in models {
            out.push_str(&format!(" {} |", format_score(row.report.per_model_mean[*model])));
        }
        out.push('\n');
    }
    out
}

fn render_csv(rows: &[Row], models: &[&String]) -> String {
    let mut out = String::from("rank,run,average");
    for model in models {
        out.push(',');
        out.push_str(model);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{}",
            row.rank,
            row.report.run_id,
            format_score(row.report.overall)
        ));
        for model in models {
            out.push(',');
            out.push_str(&format_score(row.report.per_model_mean[*model]));
        }
        out.push('\n');
    }
    out
}

fn render_json(rows: &[Row], models: &[&String]) -> String {
    let rounded = |x: f64| (x * 10_000.0).round() / 10_000.0;
    let items: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let per_model: serde_json::Map<String, serde_json::Value> = models
                .iter()
                .map(|m| {
                    ((*m).clone(), serde_json::json!(rounded(row.report.per_model_mean[*m])))
                })
                .collect();
            serde_json::json!({
                "rank": row.rank,
                "run": row.report.run_id,
                "average": rounded(row.report.overall),
                "per_model": per_model,
            })
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("leaderboard JSON serialization cannot fail")
}

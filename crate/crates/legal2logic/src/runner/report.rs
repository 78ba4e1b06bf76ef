//! Long-format CSV report over one or more run manifests.
//!
//! One row per (model, seed, ratio, lambda, shots) cell plus a `mean` row per
//! configuration, ready for external plotting.

use std::path::Path;

use serde::Serialize;

use super::{load_aggregate, RunManifest, RunnerError};

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub model: String,
    /// Seed number, or `mean` for a cross-seed row.
    pub seed: String,
    pub ratio: f64,
    pub lambda: f64,
    pub shots: String,
    pub exact_acc: f64,
    pub soft_acc: f64,
    pub mean_pairwise_sim: Option<f64>,
}

pub fn report_rows(manifests: &[RunManifest]) -> Result<Vec<ReportRow>, RunnerError> {
    let mut rows = Vec::new();
    for manifest in manifests {
        let aggregate = load_aggregate(manifest)?;
        for cell in &aggregate.cells {
            rows.push(ReportRow {
                model: aggregate.model.clone(),
                seed: cell.seed.to_string(),
                ratio: cell.ratio,
                lambda: cell.lambda,
                shots: cell.shots.to_string(),
                exact_acc: cell.exact_acc,
                soft_acc: cell.soft_acc,
                mean_pairwise_sim: cell.mean_pairwise_sim,
            });
        }
        for group in &aggregate.groups {
            rows.push(ReportRow {
                model: aggregate.model.clone(),
                seed: "mean".into(),
                ratio: group.ratio,
                lambda: group.lambda,
                shots: group.shots.to_string(),
                exact_acc: group.exact_acc_mean,
                soft_acc: group.soft_acc_mean,
                mean_pairwise_sim: group.mean_pairwise_sim,
            });
        }
    }
    Ok(rows)
}

/// Write the report for `manifests` to `path`.
pub fn write_report_csv(
    manifests: &[RunManifest],
    path: impl AsRef<Path>,
) -> Result<Vec<ReportRow>, RunnerError> {
    let rows = report_rows(manifests)?;
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| RunnerError::Config(format!("cannot write csv: {e}")))?;
    writer
        .write_record([
            "model",
            "seed",
            "ratio",
            "lambda",
            "shots",
            "exact_acc",
            "soft_acc",
            "mean_pairwise_sim",
        ])
        .and_then(|_| {
            for row in &rows {
                writer.write_record([
                    row.model.as_str(),
                    row.seed.as_str(),
                    &row.ratio.to_string(),
                    &row.lambda.to_string(),
                    row.shots.as_str(),
                    &row.exact_acc.to_string(),
                    &row.soft_acc.to_string(),
                    &row
                        .mean_pairwise_sim
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                ])?;
            }
            writer.flush()?;
            Ok(())
        })
        .map_err(|e| RunnerError::Config(format!("cannot write csv: {e}")))?;
    Ok(rows)
}

//! Evaluation reports: one JSON document per run plus CSV tables, Markdown
//! summaries and SVG charts, written under a directory named by a hash of
//! the run configuration.

mod bias;
mod center;
mod svg;
mod tables;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use bias::{bias_csv, bias_plot_svg, bias_points, read_bias_csv, BiasPlotPoint};
pub use center::{center_distance_csv, center_distance_svg};
pub use tables::{attributes_csv, scores_csv, tables_csv, tables_md};

use crate::attributes::{
    attribute_breakdown, center_distance_breakdown, compute_attributes, Attribute, AttributeBreakdown, AttributeConfig,
    AttributeIndex, BinBreakdown,
};
use crate::error::{Error, Result};
use crate::metrics::{paired_t_test, Metric, ScoreMode, SequenceScore, TTest};
use crate::model::{DatasetManifest, View};
use crate::sope::{
    evaluate_dataset, paired_scores, EvalOptions, EvalOutcome, PairFailure, Protocol, Summary, TrackerDriver,
};

/// Everything that determines a tracker's results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub label: String,
    pub driver: String,
    pub manifest: String,
    pub protocol: Protocol,
    pub views: Vec<View>,
    pub repr: ScoreMode,
    pub min_run_len: usize,
    pub with_vos: bool,
    pub with_pixels: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTest {
    pub metric: Metric,
    /// Paired FPV vs TPV test over per-pair scores.
    pub test: Option<TTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeEntry {
    pub attribute: Attribute,
    pub breakdown: Option<AttributeBreakdown>,
    /// Why there is no breakdown.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerReport {
    pub config: RunConfig,
    pub scores: Vec<SequenceScore>,
    pub weighted: Summary,
    pub unweighted: Summary,
    pub t_tests: Vec<MetricTest>,
    pub attributes: Vec<AttributeEntry>,
    pub center_distance: Vec<BinBreakdown>,
    pub failures: Vec<PairFailure>,
    pub dropped_runs: usize,
}

impl TrackerReport {
    pub fn label(&self) -> &str {
        &self.config.label
    }

    pub fn summary(&self, weighted: bool) -> &Summary {
        if weighted {
            &self.weighted
        } else {
            &self.unweighted
        }
    }

    /// Metrics that carry information for this run.
    pub fn metrics(&self) -> Vec<Metric> {
        if self.config.with_vos {
            Metric::ALL.to_vec()
        } else {
            Metric::TRACKING.to_vec()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub thresholds: AttributeConfig,
    /// Conventions behind choices the metric definitions leave open.
    pub conventions: BTreeMap<String, String>,
}

impl ReportMetadata {
    pub fn new(thresholds: AttributeConfig) -> Self {
        let conventions = [
            ("sequence_weight", "number of scored (non-absent, t > 0) annotations"),
            ("delta", "weighted FPV mean minus weighted TPV mean"),
            (
                "iv_distance",
                "euclidean norm of mean RGB difference, channels in [0, 1]",
            ),
            ("mb_scale", "laplacian variance on 8-bit grayscale"),
            ("fm_size", "sqrt(w * h) of the previous box, center displacement"),
            (
                "hoi_off_rule",
                "two consecutive annotations with detected objects, none overlapping and none interacting",
            ),
            (
                "barycenter",
                "mask barycenter in pixel-index coordinates, box center otherwise",
            ),
            ("t_test", "paired two-tailed, unweighted per-pair scores"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            thresholds,
            conventions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub trackers: Vec<TrackerReport>,
}

fn t_tests(scores: &[SequenceScore], metrics: &[Metric]) -> Vec<MetricTest> {
    let pairs = paired_scores(scores);
    metrics
        .iter()
        .map(|&metric| {
            let a: Vec<f64> = pairs.iter().map(|(f, _)| f.get(metric)).collect();
            let b: Vec<f64> = pairs.iter().map(|(_, t)| t.get(metric)).collect();
            match paired_t_test(&a, &b) {
                Ok(test) => MetricTest {
                    metric,
                    test: Some(test),
                    note: None,
                },
                Err(e) => MetricTest {
                    metric,
                    test: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Attributes for every manifest pair referenced by the outcome.
pub fn attribute_index(
    manifest: &DatasetManifest,
    outcome: &EvalOutcome,
    cfg: &AttributeConfig,
    with_pixels: bool,
) -> AttributeIndex {
    let wanted: std::collections::BTreeSet<&str> = outcome.results.iter().map(|r| r.parent_id.as_str()).collect();
    manifest
        .pairs
        .par_iter()
        .filter(|p| wanted.contains(p.id.as_str()))
        .map(|p| (p.id.clone(), compute_attributes(p, cfg, with_pixels)))
        .collect()
}

/// Evaluate one tracker on a manifest and wrap the result in a report
/// with default attribute thresholds. The outcome is returned alongside
/// so callers can inspect excluded units.
pub fn evaluate_report(
    manifest: &DatasetManifest,
    manifest_name: &str,
    driver: &dyn TrackerDriver,
    label: &str,
    repr: ScoreMode,
    opts: &EvalOptions,
    with_pixels: bool,
) -> Result<(EvalReport, EvalOutcome)> {
    let outcome = evaluate_dataset(manifest, driver, opts)?;
    let thresholds = AttributeConfig::default();
    let index = attribute_index(manifest, &outcome, &thresholds, with_pixels);
    let config = RunConfig {
        label: label.to_string(),
        driver: driver.describe(),
        manifest: manifest_name.to_string(),
        protocol: opts.protocol,
        views: opts.views.clone(),
        repr,
        min_run_len: opts.min_run_len,
        with_vos: opts.with_vos,
        with_pixels,
    };
    let tracker = build_tracker_report(config, &outcome, &index)?;
    let report = EvalReport::new(ReportMetadata::new(thresholds), vec![tracker])?;
    Ok((report, outcome))
}

/// Assemble the report section of one tracker run.
pub fn build_tracker_report(config: RunConfig, outcome: &EvalOutcome, index: &AttributeIndex) -> Result<TrackerReport> {
    let scores: Vec<SequenceScore> = outcome
        .results
        .iter()
        .flat_map(|r| r.views.iter().map(|v| v.score.clone()))
        .collect();
    let metrics = if config.with_vos {
        Metric::ALL.to_vec()
    } else {
        Metric::TRACKING.to_vec()
    };
    let attributes = Attribute::ALL
        .into_iter()
        .map(
            |attribute| match attribute_breakdown(&outcome.results, index, attribute) {
                Ok(b) => Ok(AttributeEntry {
                    attribute,
                    breakdown: Some(b),
                    note: None,
                }),
                Err(e @ (Error::AttributeUnavailable { .. } | Error::Empty(_))) => Ok(AttributeEntry {
                    attribute,
                    breakdown: None,
                    note: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackerReport {
        t_tests: t_tests(&scores, &metrics),
        center_distance: center_distance_breakdown(&outcome.results, index, &config.views)?,
        weighted: outcome.weighted.clone(),
        unweighted: outcome.unweighted.clone(),
        scores,
        attributes,
        failures: outcome.failures.clone(),
        dropped_runs: outcome.dropped_runs,
        config,
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn summaries_match(stored: &Summary, recomputed: &Summary) -> bool {
    stored.weighted == recomputed.weighted
        && stored.means.len() == recomputed.means.len()
        && stored.deltas.len() == recomputed.deltas.len()
        && stored
            .means
            .iter()
            .zip(&recomputed.means)
            .all(|(a, b)| a.view == b.view && a.metric == b.metric && a.pairs == b.pairs && close(a.mean, b.mean))
        && stored.deltas.iter().zip(&recomputed.deltas).all(|(a, b)| {
            a.metric == b.metric
                && a.pairs == b.pairs
                && close(a.delta, b.delta)
                && close(a.fpv_mean, b.fpv_mean)
                && close(a.tpv_mean, b.tpv_mean)
        })
}

impl EvalReport {
    pub fn new(metadata: ReportMetadata, trackers: Vec<TrackerReport>) -> Result<Self> {
        let report = Self { metadata, trackers };
        report.check_labels()?;
        Ok(report)
    }

    fn check_labels(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.trackers {
            if !seen.insert(t.label()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate tracker label {:?}",
                    t.label()
                )));
            }
        }
        Ok(())
    }

    pub fn tracker(&self, label: &str) -> Option<&TrackerReport> {
        self.trackers.iter().find(|t| t.label() == label)
    }

    /// Check that every aggregate follows from the per-sequence scores.
    pub fn verify(&self) -> Result<()> {
        self.check_labels()?;
        let mut problems = Vec::new();
        for tr in &self.trackers {
            for weighted in [true, false] {
                let recomputed = Summary::from_scores(&tr.scores, &tr.config.views, weighted);
                if !summaries_match(tr.summary(weighted), &recomputed) {
                    problems.push(format!(
                        "{}: {} summary does not match its scores",
                        tr.label(),
                        if weighted { "weighted" } else { "unweighted" }
                    ));
                }
            }
            let metrics: Vec<Metric> = tr.t_tests.iter().map(|t| t.metric).collect();
            for (stored, fresh) in tr.t_tests.iter().zip(t_tests(&tr.scores, &metrics)) {
                let same = match (&stored.test, &fresh.test) {
                    (Some(a), Some(b)) => a.n == b.n && close(a.t, b.t) && close(a.p, b.p),
                    (None, None) => true,
                    _ => false,
                };
                if !same {
                    problems.push(format!(
                        "{}: t-test for {} does not match its scores",
                        tr.label(),
                        stored.metric
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "inconsistent report: {}",
                problems.join("; ")
            )))
        }
    }

    /// Hex digest of the run configurations and attribute thresholds.
    pub fn config_hash(&self) -> String {
        let configs: Vec<&RunConfig> = self.trackers.iter().map(|t| &t.config).collect();
        let doc = serde_json::json!({"configs": configs, "thresholds": self.metadata.thresholds});
        let digest = Sha256::digest(doc.to_string().as_bytes());
        format!("{digest:x}")[..16].to_string()
    }

    /// Combine reports of different trackers evaluated with the same
    /// attribute thresholds.
    pub fn merge(reports: Vec<EvalReport>) -> Result<EvalReport> {
        let mut iter = reports.into_iter();
        let mut merged = iter.next().ok_or(Error::Empty("reports to merge"))?;
        for r in iter {
            if r.metadata.thresholds != merged.metadata.thresholds {
                return Err(Error::InvalidArgument(
                    "reports use different attribute thresholds".into(),
                ));
            }
            merged.trackers.extend(r.trackers);
        }
        merged.check_labels()?;
        Ok(merged)
    }
}

/// Load and verify a `report.json`.
pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: EvalReport = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    report.verify()?;
    Ok(report)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Metrics plotted for a report: those every tracker has on both views.
fn plotted_metrics(report: &EvalReport) -> Vec<Metric> {
    Metric::ALL
        .into_iter()
        .filter(|m| {
            !report.trackers.is_empty()
                && report
                    .trackers
                    .iter()
                    .all(|t| t.metrics().contains(m) && t.weighted.delta(*m).is_some())
        })
        .collect()
}

/// Write the full run directory `<root>/<config hash>/` and return it.
pub fn write_run(report: &EvalReport, root: &Path) -> Result<PathBuf> {
    let dir = root.join(report.config_hash());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_file(
        &dir.join("report.json"),
        &(serde_json::to_string_pretty(report)? + "\n"),
    )?;
    write_file(&dir.join("scores.csv"), &scores_csv(report)?)?;
    for metric in plotted_metrics(report) {
        let points = bias_points(report, metric, true);
        write_file(&dir.join(format!("bias_{}.csv", metric.name())), &bias_csv(&points)?)?;
        write_file(
            &dir.join(format!("bias_{}.svg", metric.name())),
            &bias_plot_svg(&points, metric),
        )?;
    }
    write_file(&dir.join("attributes.csv"), &attributes_csv(report)?)?;
    write_file(&dir.join("center_distance.csv"), &center_distance_csv(report)?)?;
    write_file(&dir.join("center_distance.svg"), &center_distance_svg(report))?;
    write_file(&dir.join("tables.md"), &tables_md(report))?;
    write_file(&dir.join("tables.csv"), &tables_csv(report)?)?;
    Ok(dir)
}

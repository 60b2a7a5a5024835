use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{extract_short_term, run_sope, RunProtocol, TrackerDriver, DEFAULT_MIN_RUN_LEN};
use crate::error::{Error, Result};
use crate::metrics::{delta_sigma, overlap_series, weighted_mean, DeltaScore, Metric, OverlapSeries, SequenceScore};
use crate::model::{DatasetManifest, SequencePair, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Whole sequences, including target disappearances.
    Long,
    /// One re-initialized sub-sequence per visibility run.
    Short,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Long => "long",
            Protocol::Short => "short",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "long" | "long_term" => Ok(Protocol::Long),
            "short" | "short_term" => Ok(Protocol::Short),
            other => Err(format!("unknown protocol {other:?} (expected long or short)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub protocol: Protocol,
    pub views: Vec<View>,
    pub jobs: usize,
    pub min_run_len: usize,
    /// Also compute mask-based J and F (rasterizes every frame).
    pub with_vos: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            protocol: Protocol::Long,
            views: View::BOTH.to_vec(),
            jobs: 1,
            min_run_len: DEFAULT_MIN_RUN_LEN,
            with_vos: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewResult {
    pub score: SequenceScore,
    pub series: OverlapSeries,
}

/// Scores of one evaluated (sub-)pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair_id: String,
    /// Id of the manifest pair this unit came from.
    pub parent_id: String,
    /// Frame index of this unit's frame 0 within the parent pair.
    pub frame_offset: u64,
    pub protocol: RunProtocol,
    pub views: Vec<ViewResult>,
}

impl PairResult {
    pub fn view(&self, view: View) -> Option<&ViewResult> {
        self.views.iter().find(|v| v.score.view == view)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub pair_id: String,
    pub view: Option<View>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewMean {
    pub view: View,
    pub metric: Metric,
    pub mean: f64,
    pub pairs: usize,
}

/// Aggregate means per view and metric, plus FPV − TPV deltas when both
/// views were evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub weighted: bool,
    pub means: Vec<ViewMean>,
    pub deltas: Vec<DeltaScore>,
}

impl Summary {
    pub fn compute(results: &[PairResult], views: &[View], weighted: bool) -> Summary {
        let scores: Vec<SequenceScore> = results
            .iter()
            .flat_map(|r| r.views.iter().map(|v| v.score.clone()))
            .collect();
        Summary::from_scores(&scores, views, weighted)
    }

    /// Aggregate per-sequence scores. FPV and TPV scores of a pair are
    /// matched by pair id.
    pub fn from_scores(scores: &[SequenceScore], views: &[View], weighted: bool) -> Summary {
        let weight_of = |s: &SequenceScore| if weighted { s.weight as f64 } else { 1.0 };
        let mut means = Vec::new();
        for &view in views {
            for metric in Metric::ALL {
                let values: Vec<(f64, f64)> = scores
                    .iter()
                    .filter(|s| s.view == view)
                    .map(|s| (s.get(metric), weight_of(s)))
                    .collect();
                if let Ok(mean) = weighted_mean(&values) {
                    means.push(ViewMean {
                        view,
                        metric,
                        mean,
                        pairs: values.len(),
                    });
                }
            }
        }
        let mut deltas = Vec::new();
        if views.contains(&View::Fpv) && views.contains(&View::Tpv) {
            let pairs = paired_scores(scores);
            for metric in Metric::ALL {
                let triples: Vec<(f64, f64, f64)> = pairs
                    .iter()
                    .map(|(f, t)| (f.get(metric), t.get(metric), weight_of(f)))
                    .collect();
                if let Ok(values) = delta_sigma(&triples) {
                    deltas.push(DeltaScore::new(metric, values, triples.len()));
                }
            }
        }
        Summary {
            weighted,
            means,
            deltas,
        }
    }

    pub fn mean(&self, view: View, metric: Metric) -> Option<f64> {
        self.means
            .iter()
            .find(|m| m.view == view && m.metric == metric)
            .map(|m| m.mean)
    }

    pub fn delta(&self, metric: Metric) -> Option<&DeltaScore> {
        self.deltas.iter().find(|d| d.metric == metric)
    }
}

/// (FPV, TPV) score pairs in order of first appearance of the pair id.
pub fn paired_scores(scores: &[SequenceScore]) -> Vec<(&SequenceScore, &SequenceScore)> {
    let mut order: Vec<&str> = Vec::new();
    let mut fpv = std::collections::HashMap::new();
    let mut tpv = std::collections::HashMap::new();
    for s in scores {
        if !fpv.contains_key(s.pair_id.as_str()) && !tpv.contains_key(s.pair_id.as_str()) {
            order.push(&s.pair_id);
        }
        match s.view {
            View::Fpv => fpv.insert(s.pair_id.as_str(), s),
            View::Tpv => tpv.insert(s.pair_id.as_str(), s),
        };
    }
    order
        .into_iter()
        .filter_map(|id| Some((*fpv.get(id)?, *tpv.get(id)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub options: EvalOptions,
    pub driver: String,
    pub results: Vec<PairResult>,
    /// Units excluded from aggregation, with the reason.
    pub failures: Vec<PairFailure>,
    /// Short-term runs below the minimum length.
    pub dropped_runs: usize,
    pub weighted: Summary,
    pub unweighted: Summary,
}

struct Unit {
    pair: SequencePair,
    parent_id: String,
    protocol: RunProtocol,
}

fn evaluate_unit(unit: &Unit, driver: &dyn TrackerDriver, opts: &EvalOptions) -> Result<PairResult, PairFailure> {
    let mut views = Vec::with_capacity(opts.views.len());
    for &view in &opts.views {
        let failure = |error: String| PairFailure {
            pair_id: unit.pair.id.clone(),
            view: Some(view),
            error,
        };
        let record = run_sope(&unit.pair, driver, view, unit.protocol).map_err(|f| failure(f.error.to_string()))?;
        let seq = unit.pair.view(view);
        let series = overlap_series(
            &record.predictions,
            &seq.annotations,
            driver.output_repr(),
            (seq.height, seq.width),
            opts.with_vos,
        )
        .map_err(|e| failure(e.to_string()))?;
        let score = SequenceScore::from_series(&unit.pair.id, view, &series).map_err(|e| failure(e.to_string()))?;
        views.push(ViewResult { score, series });
    }
    Ok(PairResult {
        pair_id: unit.pair.id.clone(),
        parent_id: unit.parent_id.clone(),
        frame_offset: unit.pair.fpv.frame_offset,
        protocol: unit.protocol,
        views,
    })
}

/// Run every pair (or every short-term sub-pair) through the driver on the
/// requested views, score it and aggregate with annotation-length weights.
///
/// Per-pair failures are recorded and excluded from aggregation. Results
/// are independent of `jobs`.
pub fn evaluate_dataset(
    manifest: &DatasetManifest,
    driver: &dyn TrackerDriver,
    opts: &EvalOptions,
) -> Result<EvalOutcome> {
    if opts.views.is_empty() {
        return Err(Error::InvalidArgument("no views selected".into()));
    }
    let mut failures = Vec::new();
    let mut dropped_runs = 0;
    let mut units = Vec::new();
    for pair in &manifest.pairs {
        match opts.protocol {
            Protocol::Long => units.push(Unit {
                pair: pair.clone(),
                parent_id: pair.id.clone(),
                protocol: RunProtocol::LongTerm,
            }),
            Protocol::Short => match extract_short_term(pair, opts.min_run_len.max(1)) {
                Ok(split) => {
                    dropped_runs += split.dropped;
                    units.extend(split.pairs.into_iter().enumerate().map(|(run, sub)| Unit {
                        pair: sub,
                        parent_id: pair.id.clone(),
                        protocol: RunProtocol::ShortTerm { run },
                    }));
                }
                Err(e) => failures.push(PairFailure {
                    pair_id: pair.id.clone(),
                    view: None,
                    error: e.to_string(),
                }),
            },
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<PairResult, PairFailure>> =
        pool.install(|| units.par_iter().map(|u| evaluate_unit(u, driver, opts)).collect());

    let mut results = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(f) => failures.push(f),
        }
    }
    let weighted = Summary::compute(&results, &opts.views, true);
    let unweighted = Summary::compute(&results, &opts.views, false);
    Ok(EvalOutcome {
        options: opts.clone(),
        driver: driver.describe(),
        results,
        failures,
        dropped_runs,
        weighted,
        unweighted,
    })
}

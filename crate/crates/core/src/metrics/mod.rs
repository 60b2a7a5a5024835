//! Per-sequence scoring functions and their aggregation.
//!
//! All curve metrics integrate their step functions exactly instead of
//! sampling thresholds:
//! - AUC is the mean overlap (area under the success curve).
//! - NPS integrates the normalized-precision curve over `[0, 0.5]`.
//! - GSR integrates the normalized length of the leading successful prefix
//!   over failure thresholds in `[0, 0.5]`.

mod aggregate;
mod curves;
mod overlap;
mod ttest;
mod vos;

pub use aggregate::{delta_sigma, weighted_mean, DeltaScore, DeltaValues, Metric, SequenceScore};
pub use curves::{auc, gsr, nps, success_curve, uniform_thresholds, GSR_MAX_THRESHOLD, NPS_MAX_DISTANCE};
pub use overlap::{normalized_center_distance, overlap_series, FrameScore, OverlapSeries, ScoreMode};
pub use ttest::{paired_t_test, TTest};
pub use vos::{boundary_f, boundary_tolerance, frame_boundary_f, jf, region_j};

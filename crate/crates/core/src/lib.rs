//! Evaluation toolkit for single-object trackers on synchronized
//! first-person (FPV) and third-person (TPV) video pairs.
//!
//! Every tracker runs independently on both views of a pair under a
//! one-pass protocol (initialized once on the first frame, never reset).
//! Per-sequence scores are aggregated with annotation-length weights, and
//! viewpoint bias is reported as the weighted signed FPV − TPV difference.
//!
//! Module map:
//! - [`model`]: manifest, annotation/prediction tracks, pair validation
//! - [`geometry`]: RLE masks, IoU, box/mask conversions, boundaries
//! - [`metrics`]: AUC, NPS, GSR, J/F, weighted aggregation, paired t-test
//! - [`sope`]: tracker drivers, online runner, short-term extraction
//! - [`attributes`]: per-frame appearance/motion attributes
//! - [`reports`]: bias plots, tables and the persisted run report
//! - [`synth`]: synthetic pairs and scripted trackers with known scores

pub mod attributes;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod reports;
pub mod sope;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{BBox, BinaryMask};
pub use model::{AnnotationTrack, DatasetManifest, SequencePair, TargetState, View, ViewSequence};

//! Synchronized one-pass evaluation: each view of a pair is tracked
//! independently, initialized once from the first annotation and never
//! reset, with frames revealed strictly one at a time.

mod driver;
mod evaluate;
mod runner;
mod short_term;
mod subprocess;

pub use driver::{InitRequest, ReplayDriver, TrackerDriver, TrackerSession};
pub use evaluate::{
    evaluate_dataset, paired_scores, EvalOptions, EvalOutcome, PairFailure, PairResult, Protocol, Summary, ViewMean,
    ViewResult,
};
pub use runner::{is_causal, run_sope, RunFailure, RunProtocol, RunRecord, TranscriptEvent};
pub use short_term::{extract_short_term, resolve_pair, sub_pair, ShortTermSplit, DEFAULT_MIN_RUN_LEN};
pub use subprocess::{SubprocessDriver, DEFAULT_FRAME_TIMEOUT};

use std::time::Duration;

use crate::error::{Error, Result};
use crate::metrics::ScoreMode;
use crate::synth::{ScriptedDriver, ScriptedTracker};

/// Build a driver from `replay:DIR`, `cmd:COMMAND` or `scripted:KIND`.
pub fn driver_from_spec(spec: &str, repr: ScoreMode, timeout: Duration) -> Result<Box<dyn TrackerDriver>> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("driver {spec:?} is not KIND:ARG")))?;
    match kind {
        "replay" => Ok(Box::new(ReplayDriver::new(arg, repr))),
        "cmd" => Ok(Box::new(SubprocessDriver::new(arg, repr).with_timeout(timeout))),
        "scripted" => {
            let tracker: ScriptedTracker = arg.parse().map_err(Error::InvalidArgument)?;
            Ok(Box::new(ScriptedDriver::new(tracker, repr)))
        }
        other => Err(Error::InvalidArgument(format!("unknown driver kind {other:?}"))),
    }
}

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{InitRequest, TrackerDriver};
use crate::error::Error;
use crate::metrics::ScoreMode;
use crate::model::{PredictionTrack, SequencePair, TargetState, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RunProtocol {
    LongTerm,
    /// Index of the visibility run within its parent pair.
    ShortTerm {
        run: usize,
    },
}

/// Harness-side record of the exchange with a tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event", content = "t")]
pub enum TranscriptEvent {
    Init,
    Sent(u64),
    Received(u64),
    End,
}

/// True when every frame is answered before the next one is revealed.
pub fn is_causal(transcript: &[TranscriptEvent]) -> bool {
    let mut pending: Option<u64> = None;
    let mut last_sent: Option<u64> = None;
    for ev in transcript {
        match *ev {
            TranscriptEvent::Init | TranscriptEvent::End => {
                if pending.is_some() {
                    return false;
                }
            }
            TranscriptEvent::Sent(t) => {
                if pending.is_some() || last_sent.is_some_and(|p| t <= p) {
                    return false;
                }
                pending = Some(t);
                last_sent = Some(t);
            }
            TranscriptEvent::Received(t) => {
                if pending != Some(t) {
                    return false;
                }
                pending = None;
            }
        }
    }
    pending.is_none()
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub pair_id: String,
    pub view: View,
    /// Predictions at scored timestamps (annotated, `t > 0`).
    pub predictions: PredictionTrack,
    pub wall_time: Duration,
    pub protocol: RunProtocol,
    pub transcript: Vec<TranscriptEvent>,
}

/// A run that stopped early; `partial` holds what was collected.
#[derive(Debug)]
pub struct RunFailure {
    pub partial: RunRecord,
    pub error: Error,
}

/// Ground truth converted to the representation the tracker consumes.
fn init_state(state: &TargetState, repr: ScoreMode, height: u32, width: u32) -> Option<TargetState> {
    match repr {
        ScoreMode::Box => state.to_box().map(TargetState::Box),
        ScoreMode::Mask => state.to_mask(height, width).map(TargetState::Mask),
    }
}

/// Run one tracker over one view: initialize on frame 0 with ground truth,
/// then reveal frames `1..T` in order, one at a time.
pub fn run_sope(
    pair: &SequencePair,
    driver: &dyn TrackerDriver,
    view: View,
    protocol: RunProtocol,
) -> Result<RunRecord, Box<RunFailure>> {
    let seq = pair.view(view);
    let started = Instant::now();
    let mut record = RunRecord {
        pair_id: pair.id.clone(),
        view,
        predictions: PredictionTrack::new(),
        wall_time: Duration::ZERO,
        protocol,
        transcript: Vec::new(),
    };
    let fail = |mut record: RunRecord, error: Error| {
        record.wall_time = started.elapsed();
        Box::new(RunFailure { partial: record, error })
    };

    let Some(init) = seq
        .annotations
        .get(0)
        .filter(|s| s.is_present())
        .and_then(|s| init_state(s, driver.output_repr(), seq.height, seq.width))
    else {
        return Err(fail(
            record,
            Error::InvalidArgument(format!("{}: no initial annotation in {view}", pair.id)),
        ));
    };

    let mut session = match driver.open(pair, view) {
        Ok(s) => s,
        Err(e) => return Err(fail(record, e)),
    };
    let req = InitRequest {
        seq: &pair.id,
        view,
        frame: seq.frame_path(0),
        state: init,
    };
    record.transcript.push(TranscriptEvent::Init);
    if let Err(e) = session.init(&req) {
        return Err(fail(record, e));
    }

    for t in 1..seq.frame_count() {
        record.transcript.push(TranscriptEvent::Sent(t));
        let state = match session.track(t, &seq.frame_path(t)) {
            Ok(s) => s,
            Err(e) => return Err(fail(record, e)),
        };
        record.transcript.push(TranscriptEvent::Received(t));
        if seq.annotations.is_annotated(t) {
            record.predictions.insert(t, state);
        }
    }

    record.transcript.push(TranscriptEvent::End);
    if let Err(e) = session.finish() {
        return Err(fail(record, e));
    }
    record.wall_time = started.elapsed();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TranscriptEvent::*;

    #[test]
    fn causality_checker() {
        assert!(is_causal(&[Init, Sent(1), Received(1), Sent(2), Received(2), End]));
        assert!(!is_causal(&[Init, Sent(1), Sent(2), Received(1), Received(2), End]));
        assert!(!is_causal(&[Init, Sent(2), Received(2), Sent(1), Received(1)]));
        assert!(!is_causal(&[Init, Sent(1), Received(2)]));
        assert!(!is_causal(&[Init, Sent(1)]));
    }
}

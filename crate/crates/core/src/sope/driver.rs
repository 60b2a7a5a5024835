use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::ScoreMode;
use crate::model::{read_state_file, PredictionTrack, SequencePair, TargetState, View};

/// What a tracker receives on initialization.
#[derive(Debug, Clone)]
pub struct InitRequest<'a> {
    pub seq: &'a str,
    pub view: View,
    pub frame: PathBuf,
    /// Ground truth at frame 0, already in the driver's representation.
    pub state: TargetState,
}

/// One live tracker instance bound to a single view of a single pair.
pub trait TrackerSession: Send {
    fn init(&mut self, req: &InitRequest<'_>) -> Result<()>;

    /// Process frame `t` and return the predicted state for it.
    fn track(&mut self, t: u64, frame: &Path) -> Result<TargetState>;

    fn finish(self: Box<Self>) -> Result<()>;
}

/// Creates tracker sessions. Shared across evaluation workers.
pub trait TrackerDriver: Send + Sync {
    fn output_repr(&self) -> ScoreMode;

    fn open(&self, pair: &SequencePair, view: View) -> Result<Box<dyn TrackerSession>>;

    fn describe(&self) -> String;
}

/// Replays prediction files recorded earlier, laid out as
/// `<dir>/<pair id>/<view>.jsonl`.
#[derive(Debug, Clone)]
pub struct ReplayDriver {
    dir: PathBuf,
    repr: ScoreMode,
}

impl ReplayDriver {
    pub fn new(dir: impl Into<PathBuf>, repr: ScoreMode) -> Self {
        Self { dir: dir.into(), repr }
    }

    pub fn prediction_path(&self, pair_id: &str, view: View) -> PathBuf {
        self.dir.join(pair_id).join(format!("{view}.jsonl"))
    }
}

struct ReplaySession {
    predictions: PredictionTrack,
}

impl TrackerSession for ReplaySession {
    fn init(&mut self, _req: &InitRequest<'_>) -> Result<()> {
        Ok(())
    }

    fn track(&mut self, t: u64, _frame: &Path) -> Result<TargetState> {
        Ok(self.predictions.get(t).clone())
    }

    fn finish(self: Box<Self>) -> Result<()> {
        Ok(())
    }
}

impl TrackerDriver for ReplayDriver {
    fn output_repr(&self) -> ScoreMode {
        self.repr
    }

    fn open(&self, pair: &SequencePair, view: View) -> Result<Box<dyn TrackerSession>> {
        let path = self.prediction_path(&pair.id, view);
        if !path.exists() {
            return Err(Error::Driver(format!("no prediction file {}", path.display())));
        }
        let predictions = PredictionTrack::from_entries(read_state_file(&path)?);
        Ok(Box::new(ReplaySession { predictions }))
    }

    fn describe(&self) -> String {
        format!("replay:{}", self.dir.display())
    }
}

//! Dataset manifest, annotation and prediction tracks, and the
//! synchronization constraints every FPV/TPV pair has to satisfy.

mod io;
mod manifest;
mod state;
mod track;

pub use io::{read_state_file, write_state_file};
pub use manifest::{
    load_manifest, save_manifest, validate_pair, DatasetManifest, SequencePair, Split, ViewSequence, Violation,
};
pub use state::{TargetState, View};
pub use track::{visibility_runs, AnnotationTrack, PredictionTrack};

//! Synthetic synchronized pairs with known geometry, and scripted trackers
//! whose scores follow in closed form. Used to check the whole pipeline
//! end to end, including the subprocess protocol.

mod expected;
mod generate;
mod scripted;

pub use expected::{expected_scores, ExpectedScore};
pub use generate::{generate_pair, generate_suite, write_suite, AnnotationRepr, SuiteSpec, SynthSpec, ViewPath};
pub use scripted::{serve_scripted, ScriptedDriver, ScriptedPredictor, ScriptedTracker};

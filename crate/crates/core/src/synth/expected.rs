use serde::Serialize;

use super::ScriptedTracker;
use crate::error::{Error, Result};
use crate::metrics::{ScoreMode, GSR_MAX_THRESHOLD, NPS_MAX_DISTANCE};
use crate::model::{SequencePair, View};

/// Scores a scripted tracker must obtain on one view, derived without
/// running the evaluation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedScore {
    pub view: View,
    pub auc: f64,
    pub nps: f64,
    pub gsr: f64,
    pub weight: usize,
}

/// Closed-form AUC, NPS and GSR for both views of `pair`.
pub fn expected_scores(pair: &SequencePair, tracker: &ScriptedTracker, repr: ScoreMode) -> Result<Vec<ExpectedScore>> {
    if let ScriptedTracker::EchoInit = tracker {
        return Err(Error::NoClosedForm("echo_init depends on the trajectory".into()));
    }
    if repr == ScoreMode::Mask && !matches!(tracker, ScriptedTracker::Perfect | ScriptedTracker::LoseAfter { .. }) {
        return Err(Error::NoClosedForm(format!(
            "{tracker} is only closed-form under box scoring"
        )));
    }
    View::BOTH
        .iter()
        .map(|&view| {
            let boxes: Vec<_> = pair
                .view(view)
                .annotations
                .present()
                .filter(|(t, _)| *t > 0)
                .map(|(_, s)| s.to_box().expect("present state has a box"))
                .collect();
            if boxes.is_empty() {
                return Err(Error::Empty("scored annotations"));
            }
            let pairs: Vec<(f64, f64)> = boxes
                .iter()
                .enumerate()
                .map(|(i, b)| match tracker {
                    ScriptedTracker::Perfect => (1.0, 0.0),
                    ScriptedTracker::LoseAfter { k } if i < *k => (1.0, 0.0),
                    ScriptedTracker::LoseAfter { .. } => (0.0, f64::INFINITY),
                    ScriptedTracker::FixedOffset { dx, dy } => {
                        let inter = (b.w - dx.abs()).max(0.0) * (b.h - dy.abs()).max(0.0);
                        let o = inter / (2.0 * b.w * b.h - inter);
                        (o, (dx / b.w).hypot(dy / b.h))
                    }
                    ScriptedTracker::ViewBiased { fpv, tpv } => {
                        let s = if view == View::Fpv { fpv } else { tpv };
                        let o = s[i % s.len()];
                        (o, (1.0 - o) / 2.0)
                    }
                    ScriptedTracker::EchoInit => unreachable!(),
                })
                .collect();
            let n = pairs.len() as f64;
            let auc = 100.0 * pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let nps =
                100.0 * pairs.iter().map(|p| (NPS_MAX_DISTANCE - p.1).max(0.0)).sum::<f64>() / (NPS_MAX_DISTANCE * n);
            let mut running = f64::INFINITY;
            let gsr_sum: f64 = pairs
                .iter()
                .map(|p| {
                    running = running.min(p.0);
                    running.clamp(0.0, GSR_MAX_THRESHOLD)
                })
                .sum();
            let gsr = 100.0 * gsr_sum / (GSR_MAX_THRESHOLD * n);
            Ok(ExpectedScore {
                view,
                auc,
                nps,
                gsr,
                weight: pairs.len(),
            })
        })
        .collect()
}

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask};
use crate::metrics::ScoreMode;
use crate::model::{AnnotationTrack, SequencePair, TargetState, View};
use crate::sope::{InitRequest, TrackerDriver, TrackerSession};

/// Trackers whose output is a fixed function of the ground truth.
///
/// Behaviour is keyed on the scored index `i` of the annotation at or
/// before each frame (0 for the first present annotation after `t = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptedTracker {
    Perfect,
    /// Ground-truth box shifted by a constant offset.
    FixedOffset {
        dx: f64,
        dy: f64,
    },
    /// Ground truth for the first `k` scored annotations, absent afterwards.
    LoseAfter {
        k: usize,
    },
    /// Box `(x, y, w * o, h)` with `o` cycling through the view's schedule,
    /// so the overlap is exactly `o` and the normalized distance `(1 - o) / 2`.
    ViewBiased {
        fpv: Vec<f64>,
        tpv: Vec<f64>,
    },
    /// Repeats the initial state forever.
    EchoInit,
}

impl ScriptedTracker {
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ScriptedTracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",");
        match self {
            ScriptedTracker::Perfect => write!(f, "perfect"),
            ScriptedTracker::FixedOffset { dx, dy } => write!(f, "fixed_offset:{dx},{dy}"),
            ScriptedTracker::LoseAfter { k } => write!(f, "lose_after:{k}"),
            ScriptedTracker::ViewBiased { fpv, tpv } => write!(f, "view_biased:{}/{}", join(fpv), join(tpv)),
            ScriptedTracker::EchoInit => write!(f, "echo_init"),
        }
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad number {x:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.iter().any(|o| !(0.0..=1.0).contains(o)) {
        return Err("view_biased overlaps must lie in [0, 1]".into());
    }
    Ok(v)
}

impl FromStr for ScriptedTracker {
    type Err = String;

    /// `perfect`, `echo_init`, `lose_after:K`, `fixed_offset:DX,DY`,
    /// `view_biased:O1,O2,../P1,P2,..` (FPV schedule / TPV schedule).
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("perfect", None) => Ok(ScriptedTracker::Perfect),
            ("echo_init", None) => Ok(ScriptedTracker::EchoInit),
            ("lose_after", Some(k)) => k
                .parse()
                .map(|k| ScriptedTracker::LoseAfter { k })
                .map_err(|e| format!("bad lose_after count {k:?}: {e}")),
            ("fixed_offset", Some(a)) => match parse_offsets(a)?.as_slice() {
                [dx, dy] => Ok(ScriptedTracker::FixedOffset { dx: *dx, dy: *dy }),
                _ => Err("fixed_offset takes DX,DY".into()),
            },
            ("view_biased", Some(a)) => {
                let (f, t) = a.split_once('/').ok_or("view_biased takes FPV/TPV schedules")?;
                Ok(ScriptedTracker::ViewBiased {
                    fpv: parse_list(f)?,
                    tpv: parse_list(t)?,
                })
            }
            _ => Err(format!("unknown scripted tracker {s:?}")),
        }
    }
}

fn parse_offsets(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad number {x:?}: {e}")))
        .collect()
}

/// Per-(pair, view) state of a scripted tracker.
#[derive(Debug, Clone)]
pub struct ScriptedPredictor {
    tracker: ScriptedTracker,
    view: View,
    track: AnnotationTrack,
    height: u32,
    width: u32,
    repr: ScoreMode,
    scored_index: BTreeMap<u64, usize>,
    init: Option<TargetState>,
}

impl ScriptedPredictor {
    pub fn new(tracker: ScriptedTracker, pair: &SequencePair, view: View, repr: ScoreMode) -> Result<Self> {
        if let ScriptedTracker::ViewBiased { fpv, tpv } = &tracker {
            if fpv.is_empty() || tpv.is_empty() {
                return Err(Error::InvalidArgument("view_biased schedules must be non-empty".into()));
            }
        }
        let seq = pair.view(view);
        let scored_index = seq
            .annotations
            .present_timestamps()
            .into_iter()
            .filter(|&t| t > 0)
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        Ok(Self {
            tracker,
            view,
            track: seq.annotations.clone(),
            height: seq.height,
            width: seq.width,
            repr,
            scored_index,
            init: None,
        })
    }

    pub fn init(&mut self, state: TargetState) {
        self.init = Some(state);
    }

    fn in_repr(&self, state: TargetState) -> TargetState {
        match (self.repr, state) {
            (_, TargetState::Absent) => TargetState::Absent,
            (ScoreMode::Box, s) => s.to_box().map(TargetState::Box).unwrap_or(TargetState::Absent),
            (ScoreMode::Mask, s) => s
                .to_mask(self.height, self.width)
                .map(TargetState::Mask)
                .unwrap_or(TargetState::Absent),
        }
    }

    /// Prediction for frame `t`.
    pub fn predict(&self, t: u64) -> TargetState {
        if let ScriptedTracker::EchoInit = self.tracker {
            return self.init.clone().unwrap_or(TargetState::Absent);
        }
        let g = t - t % self.track.step();
        let gt = match self.track.get(g) {
            Some(s) if s.is_present() => s.clone(),
            _ => return TargetState::Absent,
        };
        let i = self.scored_index.get(&g).copied();
        let out = match &self.tracker {
            ScriptedTracker::Perfect => gt,
            ScriptedTracker::LoseAfter { k } => match i {
                Some(i) if i >= *k => TargetState::Absent,
                _ => gt,
            },
            ScriptedTracker::FixedOffset { dx, dy } => {
                let b = gt.to_box().expect("present state has a box");
                TargetState::Box(BBox::new(b.x + dx, b.y + dy, b.w, b.h))
            }
            ScriptedTracker::ViewBiased { fpv, tpv } => {
                let schedule = if self.view == View::Fpv { fpv } else { tpv };
                let o = i.map(|i| schedule[i % schedule.len()]).unwrap_or(1.0);
                let b = gt.to_box().expect("present state has a box");
                TargetState::Box(BBox::new(b.x, b.y, b.w * o, b.h))
            }
            ScriptedTracker::EchoInit => unreachable!(),
        };
        self.in_repr(out)
    }
}

/// In-process driver running a scripted tracker.
#[derive(Debug, Clone)]
pub struct ScriptedDriver {
    tracker: ScriptedTracker,
    repr: ScoreMode,
}

impl ScriptedDriver {
    pub fn new(tracker: ScriptedTracker, repr: ScoreMode) -> Self {
        Self { tracker, repr }
    }

    pub fn tracker(&self) -> &ScriptedTracker {
        &self.tracker
    }
}

struct ScriptedSession(ScriptedPredictor);

impl TrackerSession for ScriptedSession {
    fn init(&mut self, req: &InitRequest<'_>) -> Result<()> {
        self.0.init(req.state.clone());
        Ok(())
    }

    fn track(&mut self, t: u64, _frame: &Path) -> Result<TargetState> {
        Ok(self.0.predict(t))
    }

    fn finish(self: Box<Self>) -> Result<()> {
        Ok(())
    }
}

impl TrackerDriver for ScriptedDriver {
    fn output_repr(&self) -> ScoreMode {
        self.repr
    }

    fn open(&self, pair: &SequencePair, view: View) -> Result<Box<dyn TrackerSession>> {
        Ok(Box::new(ScriptedSession(ScriptedPredictor::new(
            self.tracker.clone(),
            pair,
            view,
            self.repr,
        )?)))
    }

    fn describe(&self) -> String {
        format!("scripted:{}", self.tracker)
    }
}

#[derive(Deserialize)]
struct IncomingRequest {
    cmd: String,
    #[serde(default)]
    t: Option<u64>,
    #[serde(default, rename = "box")]
    bbox: Option<BBox>,
    #[serde(default)]
    rle: Option<BinaryMask>,
}

#[derive(Serialize)]
struct Reply {
    t: u64,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    bbox: Option<BBox>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rle: Option<BinaryMask>,
    #[serde(skip_serializing_if = "Option::is_none")]
    absent: Option<bool>,
}

/// Speak the tracker side of the line protocol for one (pair, view) run.
/// Returns after `end`; any malformed request is an error.
pub fn serve_scripted(mut predictor: ScriptedPredictor, input: impl BufRead, mut output: impl Write) -> Result<()> {
    let mut initialized = false;
    for line in input.lines() {
        let line = line.map_err(|e| Error::Protocol(format!("reading request failed: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let req: IncomingRequest =
            serde_json::from_str(&line).map_err(|e| Error::Protocol(format!("bad request {line:?}: {e}")))?;
        let reply = match req.cmd.as_str() {
            "init" => {
                let state = match (req.bbox, req.rle) {
                    (Some(b), None) => TargetState::Box(b),
                    (None, Some(m)) => TargetState::Mask(m),
                    _ => return Err(Error::Protocol("init needs exactly one of box or rle".into())),
                };
                predictor.init(state);
                initialized = true;
                serde_json::json!({"status": "ok"}).to_string()
            }
            "track" => {
                if !initialized {
                    return Err(Error::Protocol("track before init".into()));
                }
                let t = req.t.ok_or_else(|| Error::Protocol("track without t".into()))?;
                let mut reply = Reply {
                    t,
                    bbox: None,
                    rle: None,
                    absent: None,
                };
                match predictor.predict(t) {
                    TargetState::Box(b) => reply.bbox = Some(b),
                    TargetState::Mask(m) => reply.rle = Some(m),
                    TargetState::Absent => reply.absent = Some(true),
                }
                serde_json::to_string(&reply)?
            }
            "end" => return Ok(()),
            other => return Err(Error::Protocol(format!("unknown command {other:?}"))),
        };
        writeln!(output, "{reply}")
            .and_then(|_| output.flush())
            .map_err(|e| Error::Protocol(format!("writing reply failed: {e}")))?;
    }
    Err(Error::Protocol("input closed before end".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_iou;
    use crate::synth::generate::tests::simple_spec;
    use crate::synth::generate_pair;

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "perfect",
            "echo_init",
            "lose_after:3",
            "fixed_offset:2,-1.5",
            "view_biased:0.8,0.6/0.4",
        ] {
            let t: ScriptedTracker = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        for bad in [
            "nope",
            "lose_after",
            "lose_after:x",
            "view_biased:0.5",
            "view_biased:1.5/0.1",
            "fixed_offset:1",
        ] {
            assert!(bad.parse::<ScriptedTracker>().is_err(), "{bad}");
        }
    }

    #[test]
    fn view_biased_overlap_is_exact() {
        let pair = generate_pair(&simple_spec(), 0, None).unwrap();
        let tracker: ScriptedTracker = "view_biased:0.9,0.7/0.3".parse().unwrap();
        let p = ScriptedPredictor::new(tracker, &pair, View::Fpv, ScoreMode::Box).unwrap();
        let gt = pair.fpv.annotations.get(10).unwrap().to_box().unwrap();
        let pred = p.predict(10).to_box().unwrap();
        assert!((box_iou(&pred, &gt) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn lose_after_goes_absent() {
        let pair = generate_pair(&simple_spec(), 0, None).unwrap();
        let p = ScriptedPredictor::new(ScriptedTracker::LoseAfter { k: 2 }, &pair, View::Tpv, ScoreMode::Mask).unwrap();
        assert!(p.predict(5).is_mask());
        assert!(p.predict(12).is_present());
        assert_eq!(p.predict(15), TargetState::Absent);
    }

    #[test]
    fn serve_session() {
        let pair = generate_pair(&simple_spec(), 0, None).unwrap();
        let p = ScriptedPredictor::new(ScriptedTracker::EchoInit, &pair, View::Fpv, ScoreMode::Box).unwrap();
        let input = concat!(
            r#"{"cmd":"init","seq":"s","frame":"f","repr":"box","box":[1,2,3,4]}"#,
            "\n",
            r#"{"cmd":"track","t":1,"frame":"f"}"#,
            "\n",
            r#"{"cmd":"end"}"#,
            "\n"
        );
        let mut out = Vec::new();
        serve_scripted(p.clone(), input.as_bytes(), &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"status\":\"ok\"}\n{\"t\":1,\"box\":[1.0,2.0,3.0,4.0]}\n"
        );
        assert!(serve_scripted(p.clone(), &b"{\"cmd\":\"track\",\"t\":1}\n"[..], Vec::new()).is_err());
        assert!(serve_scripted(p, &b""[..], Vec::new()).is_err());
    }
}

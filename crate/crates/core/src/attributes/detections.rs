//! Precomputed distractor candidates and hand-object detections, one JSON
//! object per line:
//!
//! ```text
//! {"t":0,"target_emb":[...]}
//! {"t":5,"candidates":[{"box":[x,y,w,h],"emb":[...]}],"hoi":[{"box":[x,y,w,h],"state":true}]}
//! ```
//!
//! Lines sharing a timestamp are merged. A timestamp without a `hoi` list
//! means the detector reported nothing there.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AttributeConfig;
use crate::error::{Error, Result};
use crate::geometry::{box_iou, BBox};
use crate::model::{AnnotationTrack, SequencePair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub emb: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandObject {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub state: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameDetections {
    pub candidates: Vec<Candidate>,
    pub hoi: Vec<HandObject>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalDetections {
    pub target_emb: Option<Vec<f32>>,
    pub frames: BTreeMap<u64, FrameDetections>,
}

impl ExternalDetections {
    pub fn at(&self, t: u64) -> Option<&FrameDetections> {
        self.frames.get(&t)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    t: u64,
    #[serde(default)]
    candidates: Vec<Candidate>,
    #[serde(default)]
    hoi: Vec<HandObject>,
    #[serde(default)]
    target_emb: Option<Vec<f32>>,
}

fn check_unit(v: &[f32], tol: f64) -> std::result::Result<(), String> {
    let norm = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol {
        return Err(format!("embedding norm {norm:.6} is not 1"));
    }
    Ok(())
}

pub fn read_detections(path: &Path, tolerance: f64) -> Result<ExternalDetections> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = ExternalDetections::default();
    let mut dim: Option<usize> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Line = serde_json::from_str(&line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let mut check = |v: &[f32]| -> Result<()> {
            check_unit(v, tolerance).map_err(|m| Error::parse(path, lineno, m))?;
            match dim {
                Some(d) if d != v.len() => Err(Error::parse(
                    path,
                    lineno,
                    format!("embedding has {} dimensions, expected {d}", v.len()),
                )),
                _ => {
                    dim = Some(v.len());
                    Ok(())
                }
            }
        };
        if let Some(e) = &rec.target_emb {
            check(e)?;
            if out.target_emb.replace(e.clone()).is_some() {
                return Err(Error::parse(path, lineno, "second target embedding"));
            }
        }
        for c in &rec.candidates {
            check(&c.emb)?;
        }
        if rec
            .candidates
            .iter()
            .map(|c| c.bbox)
            .chain(rec.hoi.iter().map(|h| h.bbox))
            .any(|b| !b.is_finite() || b.w < 0.0 || b.h < 0.0)
        {
            return Err(Error::parse(path, lineno, "invalid detection box"));
        }
        if rec.candidates.is_empty() && rec.hoi.is_empty() {
            continue;
        }
        let frame = out.frames.entry(rec.t).or_default();
        frame.candidates.extend(rec.candidates);
        frame.hoi.extend(rec.hoi);
    }
    Ok(out)
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// DIS at each present annotation: some candidate looks like the target
/// but does not overlap it.
pub fn distractor_attr(
    track: &AnnotationTrack,
    dets: &ExternalDetections,
    cfg: &AttributeConfig,
) -> Result<BTreeMap<u64, bool>> {
    let target = dets.target_emb.as_ref().ok_or_else(|| Error::AttributeUnavailable {
        attribute: "DIS".into(),
        reason: "detections file has no target embedding".into(),
    })?;
    Ok(track
        .present()
        .filter_map(|(t, s)| Some((t, s.to_box()?)))
        .map(|(t, gt)| {
            let hit = dets.at(t).is_some_and(|f| {
                f.candidates
                    .iter()
                    .any(|c| cosine(&c.emb, target) > cfg.dis_cosine && box_iou(&c.bbox, &gt) < cfg.dis_iou)
            });
            (t, hit)
        })
        .collect())
}

/// HOI from FPV hand-object detections, for the timestamps of both views.
///
/// Turns on at the second of two consecutive annotations with an
/// interacting object overlapping the target; turns off at the second of two
/// consecutive annotations where objects are detected but none overlaps the
/// target and none interacts. Absent targets break consecutiveness.
pub fn hoi_attr(pair: &SequencePair, dets: &ExternalDetections, cfg: &AttributeConfig) -> Result<BTreeMap<u64, bool>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Evidence {
        On,
        Off,
        None,
    }
    let track = &pair.fpv.annotations;
    let mut labels = BTreeMap::new();
    let mut active = false;
    let mut prev = Evidence::None;
    for (t, state) in track.entries() {
        let Some(gt) = state.to_box().filter(|_| state.is_present()) else {
            prev = Evidence::None;
            continue;
        };
        let objects = dets.at(*t).map(|f| f.hoi.as_slice()).unwrap_or(&[]);
        let evidence = if objects.iter().any(|o| o.state && box_iou(&o.bbox, &gt) > cfg.hoi_iou) {
            Evidence::On
        } else if !objects.is_empty() && objects.iter().all(|o| !o.state && box_iou(&o.bbox, &gt) < cfg.hoi_iou) {
            Evidence::Off
        } else {
            Evidence::None
        };
        if !active && evidence == Evidence::On && prev == Evidence::On {
            active = true;
        } else if active && evidence == Evidence::Off && prev == Evidence::Off {
            active = false;
        }
        labels.insert(*t, active);
        prev = evidence;
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TargetState, View, ViewSequence};

    const GT: BBox = BBox {
        x: 10.0,
        y: 10.0,
        w: 20.0,
        h: 20.0,
    };

    fn pair(present: &[bool]) -> SequencePair {
        let listed: Vec<_> = present
            .iter()
            .enumerate()
            .filter(|(_, p)| **p)
            .map(|(t, _)| (t as u64, TargetState::Box(GT)))
            .collect();
        let seq = |view| ViewSequence {
            view,
            frames: String::new(),
            width: 100,
            height: 100,
            annotations: AnnotationTrack::new(present.len() as u64, 1.0, 1.0, listed.clone()).unwrap(),
            frame_offset: 0,
            detections: None,
        };
        SequencePair {
            id: "p".into(),
            fpv: seq(View::Fpv),
            tpv: seq(View::Tpv),
        }
    }

    /// `i` interacting on target, `o` detected object away from the target
    /// and idle, `l` interacting but low overlap, `.` nothing detected.
    fn hoi_dets(script: &str) -> ExternalDetections {
        let far = BBox::new(60.0, 60.0, 20.0, 20.0);
        let frames = script
            .chars()
            .enumerate()
            .filter_map(|(t, c)| {
                let hoi = match c {
                    'i' => vec![HandObject { bbox: GT, state: true }],
                    'o' => vec![HandObject {
                        bbox: far,
                        state: false,
                    }],
                    'l' => vec![HandObject { bbox: far, state: true }],
                    _ => return None,
                };
                Some((
                    t as u64,
                    FrameDetections {
                        candidates: vec![],
                        hoi,
                    },
                ))
            })
            .collect();
        ExternalDetections {
            target_emb: None,
            frames,
        }
    }

    fn trace(script: &str, present: &[bool]) -> String {
        let labels = hoi_attr(&pair(present), &hoi_dets(script), &AttributeConfig::default()).unwrap();
        (0..script.len() as u64)
            .map(|t| match labels.get(&t) {
                Some(true) => '1',
                Some(false) => '0',
                None => '-',
            })
            .collect()
    }

    #[test]
    fn hoi_state_machine_traces() {
        let all = [true; 10];
        // Single interaction never switches on.
        assert_eq!(trace("..i.......", &all), "0000000000");
        // Two consecutive interactions, then silence: stays on.
        assert_eq!(trace("..ii......", &all), "0001111111");
        // On for four frames, then two idle low-overlap frames.
        assert_eq!(trace("iiiioo....", &all), "0111100000");
        // A single off frame between interactions keeps it on.
        assert_eq!(trace("iio.o.l.o.", &all), "0111111111");
        // Absent target breaks consecutiveness.
        let gap = [true, true, false, true, true, true, true, true, true, true];
        assert_eq!(trace(".i.i......", &gap), "00-0000000");
    }

    #[test]
    fn distractors() {
        let p = pair(&[true, true, true, true]);
        let e = |a: f32| vec![a, (1.0 - a * a).sqrt()];
        let target = e(1.0);
        let shifted = |dx: f64| BBox::new(GT.x + dx, GT.y, GT.w, GT.h);
        let mut dets = ExternalDetections {
            target_emb: Some(target.clone()),
            frames: BTreeMap::new(),
        };
        // Identical embedding, heavy overlap: not a distractor.
        dets.frames.insert(
            1,
            FrameDetections {
                candidates: vec![Candidate {
                    bbox: GT,
                    emb: target.clone(),
                }],
                hoi: vec![],
            },
        );
        // cos 0.6, IoU 8/32 = 0.25.
        dets.frames.insert(
            2,
            FrameDetections {
                candidates: vec![Candidate {
                    bbox: shifted(12.0),
                    emb: e(0.6),
                }],
                hoi: vec![],
            },
        );
        // cos 0.4, far away.
        dets.frames.insert(
            3,
            FrameDetections {
                candidates: vec![Candidate {
                    bbox: shifted(50.0),
                    emb: e(0.4),
                }],
                hoi: vec![],
            },
        );
        let labels = distractor_attr(&p.fpv.annotations, &dets, &AttributeConfig::default()).unwrap();
        assert_eq!(labels, BTreeMap::from([(0, false), (1, false), (2, true), (3, false)]));
        dets.target_emb = None;
        assert!(distractor_attr(&p.fpv.annotations, &dets, &AttributeConfig::default()).is_err());
    }

    #[test]
    fn parse_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        std::fs::write(
            &path,
            concat!(
                "{\"t\":0,\"target_emb\":[0.6,0.8]}\n",
                "{\"t\":1,\"candidates\":[{\"box\":[1,2,3,4],\"emb\":[1,0]}]}\n",
                "{\"t\":1,\"hoi\":[{\"box\":[1,2,3,4],\"state\":true}]}\n",
                "\n",
                "{\"t\":2,\"candidates\":[]}\n",
            ),
        )
        .unwrap();
        let d = read_detections(&path, 1e-3).unwrap();
        assert_eq!(d.target_emb, Some(vec![0.6, 0.8]));
        assert_eq!(d.frames.len(), 1);
        assert_eq!(d.frames[&1].candidates.len(), 1);
        assert_eq!(d.frames[&1].hoi.len(), 1);

        for (bad, line) in [
            ("{\"t\":1,\"candidates\":[{\"box\":[1,2,3,4],\"emb\":[1,1]}]}\n", 1),
            (
                "{\"t\":0,\"target_emb\":[1,0]}\n{\"t\":1,\"candidates\":[{\"box\":[1,2,3,4],\"emb\":[1,0,0]}]}\n",
                2,
            ),
            ("{\"t\":1,\"bogus\":1}\n", 1),
        ] {
            std::fs::write(&path, bad).unwrap();
            match read_detections(&path, 1e-3) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line),
                other => panic!("{other:?}"),
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use super::vos::{boundary_tolerance, frame_boundary_f};
use crate::error::{Error, Result};
use crate::geometry::{box_iou, mask_iou, BBox, BinaryMask};
use crate::model::{AnnotationTrack, PredictionTrack, TargetState};

/// Representation a tracker is scored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    Box,
    Mask,
}

impl std::str::FromStr for ScoreMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "box" => Ok(ScoreMode::Box),
            "mask" => Ok(ScoreMode::Mask),
            other => Err(format!("unknown representation {other:?} (expected box or mask)")),
        }
    }
}

/// Scores of one annotated frame with a visible target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub t: u64,
    /// IoU in the scoring representation.
    pub overlap: f64,
    /// Center distance normalized by the ground-truth box size; infinite for
    /// a missing prediction, `None` for a degenerate ground-truth box.
    #[serde(with = "center_error_serde")]
    pub center_error: Option<f64>,
    /// Mask IoU (boxes filled into masks).
    pub region: f64,
    /// Boundary F-measure.
    pub boundary: f64,
}

/// JSON has no infinity, so infinite distances are written as `"inf"`.
mod center_error_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(d) if d.is_infinite() => Repr::Text("inf".into()).serialize(s),
            Some(d) => Repr::Num(*d).serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(v)) => Ok(Some(v)),
            Some(Repr::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!("bad distance {t:?}"))),
        }
    }
}

/// Per-frame comparison of a prediction track against ground truth.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlapSeries {
    /// One entry per scored timestamp (visible target, `t > 0`).
    pub frames: Vec<FrameScore>,
    /// Scored-grid timestamps whose ground truth is absent.
    pub gt_absent_count: usize,
    /// Of those, how many still had a prediction.
    pub pred_on_absent_count: usize,
    /// Frames left out of NPS because the ground-truth box is degenerate.
    pub degenerate_gt_count: usize,
}

impl OverlapSeries {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn overlaps(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.overlap).collect()
    }

    pub fn center_errors(&self) -> Vec<f64> {
        self.frames.iter().filter_map(|f| f.center_error).collect()
    }
}

/// `sqrt(((cx_p − cx_g) / w_g)² + ((cy_p − cy_g) / h_g)²)`; `None` when
/// the ground-truth box is degenerate, infinite without a prediction.
pub fn normalized_center_distance(pred: Option<&BBox>, gt: &BBox) -> Option<f64> {
    if gt.is_degenerate() {
        return None;
    }
    let Some(p) = pred else {
        return Some(f64::INFINITY);
    };
    let (pcx, pcy) = p.center();
    let (gcx, gcy) = gt.center();
    Some(((pcx - gcx) / gt.w).hypot((pcy - gcy) / gt.h))
}

fn usable_box(state: &TargetState) -> Option<BBox> {
    state.to_box().filter(BBox::is_finite)
}

fn usable_mask(state: &TargetState, height: u32, width: u32) -> Option<BinaryMask> {
    match state {
        TargetState::Box(b) if !b.is_finite() => None,
        other => other.to_mask(height, width),
    }
}

/// Compare predictions with ground truth at every scored timestamp.
///
/// `frame_size` is `(height, width)`, used to rasterize boxes for mask
/// IoU and J/F. With `with_vos == false` the region/boundary fields are
/// left at 0 (cheaper when only AUC/NPS/GSR are needed).
pub fn overlap_series(
    pred: &PredictionTrack,
    gt: &AnnotationTrack,
    mode: ScoreMode,
    frame_size: (u32, u32),
    with_vos: bool,
) -> Result<OverlapSeries> {
    if let Some((t, _)) = pred.iter().find(|(t, _)| *t >= gt.frame_count()) {
        return Err(Error::InvalidArgument(format!(
            "prediction at t={t} beyond the {}-frame sequence",
            gt.frame_count()
        )));
    }
    let (height, width) = frame_size;
    let tol = boundary_tolerance(height, width);
    let mut series = OverlapSeries::default();
    for (t, gt_state) in gt.entries().iter().filter(|(t, _)| *t > 0) {
        let p = pred.get(*t);
        if !gt_state.is_present() {
            series.gt_absent_count += 1;
            if p.is_present() {
                series.pred_on_absent_count += 1;
            }
            continue;
        }
        let gt_box = gt_state.to_box().expect("present state has a box");
        let pred_box = usable_box(p);
        let center_error = normalized_center_distance(pred_box.as_ref(), &gt_box);
        if center_error.is_none() {
            series.degenerate_gt_count += 1;
        }

        let need_masks = with_vos || mode == ScoreMode::Mask;
        let masks = if need_masks {
            let g = gt_state.to_mask(height, width).expect("present state has a mask");
            let pm = usable_mask(p, height, width);
            Some((g, pm))
        } else {
            None
        };

        let overlap = match mode {
            ScoreMode::Box => pred_box.map_or(0.0, |pb| box_iou(&pb, &gt_box)),
            ScoreMode::Mask => {
                let (g, pm) = masks.as_ref().unwrap();
                match pm {
                    Some(m) => mask_iou(m, g)?,
                    None => 0.0,
                }
            }
        };

        let (region, boundary) = match (&masks, with_vos) {
            (Some((g, pm)), true) => {
                let region = match pm {
                    Some(m) => mask_iou(m, g)?,
                    None => 0.0,
                };
                (region, frame_boundary_f(pm.as_ref(), g, tol)?)
            }
            _ => (0.0, 0.0),
        };

        series.frames.push(FrameScore {
            t: *t,
            overlap,
            center_error,
            region,
            boundary,
        });
    }
    Ok(series)
}

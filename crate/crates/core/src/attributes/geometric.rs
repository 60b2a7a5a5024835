use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Attribute, AttributeConfig, FrameAttributeSet};
use crate::geometry::{barycenter, box_iou, center_distance_bin, BBox, CenterDistanceBin};
use crate::model::{AnnotationTrack, SequencePair, TargetState, ViewSequence};

/// How target positions for center-distance binning were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarycenterSource {
    /// Mask barycenter on every frame.
    Mask,
    /// Box center (in pixel-index coordinates) on every frame.
    Box,
    Mixed,
}

fn present_box(track: &AnnotationTrack, t: u64) -> Option<BBox> {
    track.get(t).filter(|s| s.is_present()).and_then(TargetState::to_box)
}

fn outside(ratio: f64, cfg: &AttributeConfig) -> bool {
    !(cfg.ratio_low..=cfg.ratio_high).contains(&ratio)
}

/// SV, ARC, FM and the LR/MR/HR resolution bin.
pub fn box_attributes(track: &AnnotationTrack, cfg: &AttributeConfig, set: &mut FrameAttributeSet) {
    let first = present_box(track, 0).filter(|b| !b.is_degenerate());
    if first.is_none() {
        for a in [Attribute::SV, Attribute::ARC] {
            set.unavailable.insert(a, "first box has zero area".into());
        }
    }
    let step = track.step();
    for (t, state) in track.present() {
        let Some(b) = state.to_box() else { continue };
        let area = b.area();
        let bin = if area < cfg.lr_area {
            Attribute::LR
        } else if area > cfg.hr_area {
            Attribute::HR
        } else {
            Attribute::MR
        };
        set.mark(t, bin, true);
        if let Some(f) = first {
            set.mark(t, Attribute::SV, outside(area / f.area(), cfg));
            set.mark(t, Attribute::ARC, outside((b.w / b.h) / (f.w / f.h), cfg));
        }
        if let Some(prev) = t.checked_sub(step).and_then(|p| present_box(track, p)) {
            let (cx, cy) = b.center();
            let (px, py) = prev.center();
            set.mark(t, Attribute::FM, (cx - px).hypot(cy - py) > (prev.w * prev.h).sqrt());
        }
    }
}

/// Static/moving label for each TPV timestamp whose previous annotation is
/// in the same visibility run; `true` means moving.
pub fn motion_state(pair: &SequencePair, cfg: &AttributeConfig) -> BTreeMap<u64, bool> {
    let track = &pair.tpv.annotations;
    let step = track.step();
    track
        .present()
        .filter_map(|(t, s)| {
            let prev = present_box(track, t.checked_sub(step)?)?;
            let cur = s.to_box()?;
            Some((t, box_iou(&prev, &cur) <= cfg.static_iou))
        })
        .collect()
}

/// Center-distance bin of every present annotation. Masks use their
/// barycenter; boxes use their center in pixel-index coordinates.
pub fn center_bins(seq: &ViewSequence) -> (BTreeMap<u64, CenterDistanceBin>, BarycenterSource) {
    let mut masks = 0usize;
    let mut boxes = 0usize;
    let bins = seq
        .annotations
        .present()
        .filter_map(|(t, state)| {
            let point = match state {
                TargetState::Mask(m) => {
                    masks += 1;
                    barycenter(m).ok()?
                }
                _ => {
                    boxes += 1;
                    let b = state.to_box()?;
                    (b.x + b.w / 2.0 - 0.5, b.y + b.h / 2.0 - 0.5)
                }
            };
            Some((t, center_distance_bin(point, seq.width, seq.height)))
        })
        .collect();
    let source = match (masks, boxes) {
        (_, 0) if masks > 0 => BarycenterSource::Mask,
        (0, _) => BarycenterSource::Box,
        _ => BarycenterSource::Mixed,
    };
    (bins, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::View;

    fn track(boxes: &[Option<BBox>]) -> AnnotationTrack {
        let listed = boxes
            .iter()
            .enumerate()
            .filter_map(|(t, b)| b.map(|b| (t as u64, TargetState::Box(b))))
            .collect();
        AnnotationTrack::new(boxes.len() as u64, 1.0, 1.0, listed).unwrap()
    }

    fn labels(boxes: &[Option<BBox>]) -> FrameAttributeSet {
        let tr = track(boxes);
        let mut set = FrameAttributeSet::new(View::Fpv, 0, tr.timestamps());
        box_attributes(&tr, &AttributeConfig::default(), &mut set);
        set
    }

    #[test]
    fn resolution_boundaries() {
        let sq = |s: f64| Some(BBox::new(0.0, 0.0, s, s));
        let set = labels(&[sq(31.0), sq(32.0), sq(33.0), sq(96.0), sq(97.0)]);
        let bins: Vec<Attribute> = (0..5)
            .map(|t| {
                let s = set.get(t);
                let hits: Vec<_> = [Attribute::LR, Attribute::MR, Attribute::HR]
                    .into_iter()
                    .filter(|a| s.contains(*a))
                    .collect();
                assert_eq!(hits.len(), 1);
                hits[0]
            })
            .collect();
        assert_eq!(
            bins,
            vec![
                Attribute::LR,
                Attribute::MR,
                Attribute::MR,
                Attribute::MR,
                Attribute::HR
            ]
        );
    }

    #[test]
    fn constant_box_has_no_changes() {
        let b = Some(BBox::new(10.0, 10.0, 40.0, 30.0));
        let set = labels(&[b; 6]);
        for t in 0..6 {
            let s = set.get(t);
            assert!(!s.contains(Attribute::SV) && !s.contains(Attribute::ARC) && !s.contains(Attribute::FM));
            assert!(s.contains(Attribute::MR));
        }
    }

    #[test]
    fn scale_aspect_and_fast_motion() {
        let set = labels(&[
            Some(BBox::new(0.0, 0.0, 10.0, 10.0)),
            Some(BBox::new(0.0, 0.0, 25.0, 10.0)),
            Some(BBox::new(40.0, 0.0, 10.0, 10.0)),
            None,
            Some(BBox::new(90.0, 90.0, 10.0, 10.0)),
        ]);
        assert!(set.get(1).contains(Attribute::SV));
        assert!(set.get(1).contains(Attribute::ARC));
        assert!(!set.get(2).contains(Attribute::SV));
        assert!(set.get(2).contains(Attribute::FM));
        assert!(set.get(3).is_empty());
        assert!(!set.get(4).contains(Attribute::FM));
        assert!(!set.get(0).contains(Attribute::FM));
    }

    #[test]
    fn degenerate_first_box_reported() {
        let set = labels(&[Some(BBox::new(0.0, 0.0, 0.0, 5.0)), Some(BBox::new(0.0, 0.0, 5.0, 5.0))]);
        assert!(!set.is_available(Attribute::SV) && !set.is_available(Attribute::ARC));
        assert!(set.is_available(Attribute::FM));
    }

    #[test]
    fn motion_labels_follow_iou() {
        let b = |x: f64| Some(BBox::new(x, 0.0, 10.0, 10.0));
        let tpv = track(&[b(0.0), b(2.0), b(6.0), b(30.0), None, b(30.0)]);
        let fpv = track(&[b(0.0), b(0.0), b(0.0), b(0.0), None, b(0.0)]);
        let mk = |annotations: AnnotationTrack, view| ViewSequence {
            view,
            frames: String::new(),
            width: 100,
            height: 100,
            annotations,
            frame_offset: 0,
            detections: None,
        };
        let pair = SequencePair {
            id: "p".into(),
            fpv: mk(fpv, View::Fpv),
            tpv: mk(tpv, View::Tpv),
        };
        // IoU(0,2) = 80/120 > 0.5; IoU(2,6) = 60/140 < 0.5.
        let m = motion_state(&pair, &AttributeConfig::default());
        assert_eq!(m, BTreeMap::from([(1, false), (2, true), (3, true)]));
    }
}

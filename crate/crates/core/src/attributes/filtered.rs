use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Attribute, PairAttributes};
use crate::error::{Error, Result};
use crate::geometry::CenterDistanceBin;
use crate::metrics::{weighted_mean, FrameScore, Metric, SequenceScore};
use crate::model::View;
use crate::sope::PairResult;

/// Attributes of every evaluated pair, keyed by (parent) pair id.
pub type AttributeIndex = BTreeMap<String, PairAttributes>;

fn attributes_for<'a>(index: &'a AttributeIndex, result: &PairResult) -> Result<&'a PairAttributes> {
    index
        .get(&result.parent_id)
        .ok_or_else(|| Error::InvalidArgument(format!("no attributes for pair {:?}", result.parent_id)))
}

/// Offset from a (sub-)pair's local timestamps to its parent's.
fn parent_shift(result: &PairResult, attrs: &PairAttributes) -> u64 {
    result.frame_offset.saturating_sub(attrs.fpv.frame_offset)
}

/// Per-sequence scores restricted to frames accepted by `keep`, which
/// receives the parent's attributes and the parent-local timestamp.
/// Sequences with no accepted frame are left out; each score's weight is
/// its number of accepted frames.
pub fn filtered_scores(
    results: &[PairResult],
    index: &AttributeIndex,
    view: View,
    keep: impl Fn(&PairAttributes, u64) -> bool,
) -> Result<Vec<SequenceScore>> {
    let mut out = Vec::new();
    for r in results {
        let Some(vr) = r.view(view) else { continue };
        let attrs = attributes_for(index, r)?;
        let shift = parent_shift(r, attrs);
        let frames: Vec<FrameScore> = vr
            .series
            .frames
            .iter()
            .filter(|f| keep(attrs, f.t + shift))
            .cloned()
            .collect();
        if !frames.is_empty() {
            out.push(SequenceScore::from_frames(&r.pair_id, view, &frames)?);
        }
    }
    Ok(out)
}

/// Per-sequence scores over the frames labelled with `attribute`.
pub fn attribute_filtered_scores(
    results: &[PairResult],
    index: &AttributeIndex,
    attribute: Attribute,
    view: View,
) -> Result<Vec<SequenceScore>> {
    for r in results.iter().filter(|r| r.view(view).is_some()) {
        let set = attributes_for(index, r)?.view(view);
        if let Some(reason) = set.unavailable.get(&attribute) {
            return Err(Error::AttributeUnavailable {
                attribute: attribute.to_string(),
                reason: format!("{} ({view}): {reason}", r.parent_id),
            });
        }
    }
    filtered_scores(results, index, view, |a, t| a.view(view).get(t).contains(attribute))
}

fn weighted_means(scores: &[SequenceScore]) -> Result<BTreeMap<Metric, f64>> {
    Metric::ALL
        .into_iter()
        .map(|m| {
            let values: Vec<(f64, f64)> = scores.iter().map(|s| (s.get(m), s.weight as f64)).collect();
            Ok((m, weighted_mean(&values)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewBreakdown {
    pub view: View,
    /// Means weighted by each sequence's number of flagged frames.
    pub means: BTreeMap<Metric, f64>,
    pub sequences: usize,
    pub frames: usize,
}

impl ViewBreakdown {
    fn from_scores(view: View, scores: &[SequenceScore]) -> Result<Option<Self>> {
        if scores.is_empty() {
            return Ok(None);
        }
        Ok(Some(Self {
            view,
            means: weighted_means(scores)?,
            sequences: scores.len(),
            frames: scores.iter().map(|s| s.weight).sum(),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeBreakdown {
    pub attribute: Attribute,
    pub fpv: Option<ViewBreakdown>,
    pub tpv: Option<ViewBreakdown>,
    /// FPV mean minus TPV mean, when both views have flagged frames.
    pub deltas: BTreeMap<Metric, f64>,
}

impl AttributeBreakdown {
    pub fn view(&self, view: View) -> Option<&ViewBreakdown> {
        match view {
            View::Fpv => self.fpv.as_ref(),
            View::Tpv => self.tpv.as_ref(),
        }
    }
}

/// Attribute-restricted means on both views and their difference.
pub fn attribute_breakdown(
    results: &[PairResult],
    index: &AttributeIndex,
    attribute: Attribute,
) -> Result<AttributeBreakdown> {
    let fpv = ViewBreakdown::from_scores(
        View::Fpv,
        &attribute_filtered_scores(results, index, attribute, View::Fpv)?,
    )?;
    let tpv = ViewBreakdown::from_scores(
        View::Tpv,
        &attribute_filtered_scores(results, index, attribute, View::Tpv)?,
    )?;
    if fpv.is_none() && tpv.is_none() {
        return Err(Error::Empty("no frame carries the attribute"));
    }
    let deltas = match (&fpv, &tpv) {
        (Some(f), Some(t)) => f.means.iter().map(|(m, v)| (*m, v - t.means[m])).collect(),
        _ => BTreeMap::new(),
    };
    Ok(AttributeBreakdown {
        attribute,
        fpv,
        tpv,
        deltas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinBreakdown {
    pub bin: CenterDistanceBin,
    pub view: View,
    /// Frame-weighted AUC; `None` when no scored frame falls in the bin.
    pub auc: Option<f64>,
    pub frames: usize,
    pub sequences: usize,
    /// Share of the view's scored frames in this bin.
    pub population: f64,
}

/// AUC per center-distance bin and view.
pub fn center_distance_breakdown(
    results: &[PairResult],
    index: &AttributeIndex,
    views: &[View],
) -> Result<Vec<BinBreakdown>> {
    let mut out = Vec::new();
    for &view in views {
        let total: usize = results
            .iter()
            .filter_map(|r| r.view(view))
            .map(|v| v.series.frames.len())
            .sum();
        for bin in CenterDistanceBin::ALL {
            let scores = filtered_scores(results, index, view, |a, t| a.view(view).bins.get(&t) == Some(&bin))?;
            let frames: usize = scores.iter().map(|s| s.weight).sum();
            let auc = if scores.is_empty() {
                None
            } else {
                Some(weighted_mean(
                    &scores.iter().map(|s| (s.auc, s.weight as f64)).collect::<Vec<_>>(),
                )?)
            };
            out.push(BinBreakdown {
                bin,
                view,
                auc,
                frames,
                sequences: scores.len(),
                population: if total == 0 { 0.0 } else { frames as f64 / total as f64 },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::FrameAttributeSet;
    use crate::metrics::OverlapSeries;
    use crate::sope::{RunProtocol, ViewResult};

    fn frame(t: u64, overlap: f64) -> FrameScore {
        FrameScore {
            t,
            overlap,
            center_error: Some(0.0),
            region: overlap,
            boundary: overlap,
        }
    }

    fn result(id: &str, fpv: &[f64], tpv: &[f64]) -> PairResult {
        let vr = |view, o: &[f64]| {
            let frames: Vec<_> = o.iter().enumerate().map(|(i, &o)| frame(i as u64 + 1, o)).collect();
            let series = OverlapSeries {
                frames,
                gt_absent_count: 0,
                pred_on_absent_count: 0,
                degenerate_gt_count: 0,
            };
            ViewResult {
                score: SequenceScore::from_series(id, view, &series).unwrap(),
                series,
            }
        };
        PairResult {
            pair_id: id.into(),
            parent_id: id.into(),
            frame_offset: 0,
            protocol: RunProtocol::LongTerm,
            views: vec![vr(View::Fpv, fpv), vr(View::Tpv, tpv)],
        }
    }

    fn attrs(id: &str, n: u64, flagged: &[u64]) -> PairAttributes {
        let set = |view| {
            let mut s = FrameAttributeSet::new(view, 0, 0..=n);
            for &t in flagged {
                s.mark(t, Attribute::FM, true);
            }
            s
        };
        PairAttributes {
            pair_id: id.into(),
            fpv: set(View::Fpv),
            tpv: set(View::Tpv),
        }
    }

    #[test]
    fn all_flagged_equals_unrestricted() {
        let results = vec![
            result("a", &[0.2, 0.9, 0.4], &[1.0, 0.5, 0.5]),
            result("b", &[0.7], &[0.1]),
        ];
        let index = AttributeIndex::from([
            ("a".into(), attrs("a", 3, &[1, 2, 3])),
            ("b".into(), attrs("b", 1, &[1])),
        ]);
        let scores = attribute_filtered_scores(&results, &index, Attribute::FM, View::Fpv).unwrap();
        assert_eq!(scores[0], results[0].views[0].score);
        assert_eq!(scores[1], results[1].views[0].score);
    }

    #[test]
    fn subset_matches_hand_computation() {
        let results = vec![
            result("a", &[0.2, 0.9, 0.4], &[1.0, 0.5, 0.5]),
            result("b", &[0.7, 0.1], &[0.1, 0.3]),
        ];
        let index = AttributeIndex::from([("a".into(), attrs("a", 3, &[1, 3])), ("b".into(), attrs("b", 2, &[2]))]);
        let b = attribute_breakdown(&results, &index, Attribute::FM).unwrap();
        // FPV: a over {0.2, 0.4} -> 30 with weight 2, b over {0.1} -> 10 with weight 1.
        let fpv = b.fpv.as_ref().unwrap();
        assert!((fpv.means[&Metric::Auc] - (30.0 * 2.0 + 10.0) / 3.0).abs() < 1e-12);
        assert_eq!((fpv.sequences, fpv.frames), (2, 3));
        let tpv = b.tpv.as_ref().unwrap();
        assert!((tpv.means[&Metric::Auc] - (75.0 * 2.0 + 30.0) / 3.0).abs() < 1e-12);
        assert!((b.deltas[&Metric::Auc] - (70.0 / 3.0 - 60.0)).abs() < 1e-12);
    }

    #[test]
    fn no_flagged_frames_is_an_error() {
        let results = vec![result("a", &[0.2], &[1.0])];
        let index = AttributeIndex::from([("a".into(), attrs("a", 1, &[]))]);
        assert!(matches!(
            attribute_breakdown(&results, &index, Attribute::FM),
            Err(Error::Empty(_))
        ));
        let mut unavailable = attrs("a", 1, &[1]);
        unavailable
            .tpv
            .unavailable
            .insert(Attribute::DIS, "no detections".into());
        let index = AttributeIndex::from([("a".into(), unavailable)]);
        assert!(matches!(
            attribute_breakdown(&results, &index, Attribute::DIS),
            Err(Error::AttributeUnavailable { .. })
        ));
    }

    #[test]
    fn sub_pairs_map_to_parent_timestamps() {
        let mut r = result("a@4", &[0.5], &[0.5]);
        r.parent_id = "a".into();
        r.frame_offset = 4;
        let index = AttributeIndex::from([("a".into(), attrs("a", 8, &[5]))]);
        assert_eq!(
            attribute_filtered_scores(&[r.clone()], &index, Attribute::FM, View::Fpv)
                .unwrap()
                .len(),
            1
        );
        let index = AttributeIndex::from([("a".into(), attrs("a", 8, &[1]))]);
        assert!(attribute_filtered_scores(&[r], &index, Attribute::FM, View::Fpv)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bins_split_frames() {
        let results = vec![result("a", &[0.2, 0.8, 0.6], &[0.5, 0.5, 0.5])];
        let mut a = attrs("a", 3, &[]);
        for set in [&mut a.fpv, &mut a.tpv] {
            set.bins = BTreeMap::from([
                (0, CenterDistanceBin::Near),
                (1, CenterDistanceBin::Near),
                (2, CenterDistanceBin::Far),
                (3, CenterDistanceBin::Far),
            ]);
        }
        let index = AttributeIndex::from([("a".into(), a)]);
        let out = center_distance_breakdown(&results, &index, &[View::Fpv, View::Tpv]).unwrap();
        let get = |view, bin| out.iter().find(|b| b.view == view && b.bin == bin).unwrap();
        assert!((get(View::Fpv, CenterDistanceBin::Near).auc.unwrap() - 20.0).abs() < 1e-12);
        assert!((get(View::Fpv, CenterDistanceBin::Far).auc.unwrap() - 70.0).abs() < 1e-12);
        assert_eq!(get(View::Fpv, CenterDistanceBin::Mid).auc, None);
        assert!((get(View::Tpv, CenterDistanceBin::Far).population - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(
            get(View::Tpv, CenterDistanceBin::Near).auc,
            get(View::Tpv, CenterDistanceBin::Far).auc
        );
    }
}

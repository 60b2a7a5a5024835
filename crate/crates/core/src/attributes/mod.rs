//! Per-frame visual attributes: scale and aspect changes, illumination,
//! distractors, blur, fast motion, resolution, static/moving target and
//! hand-object interaction. Labels are kept per annotated timestamp and
//! used to restrict scoring to frames carrying an attribute.

mod detections;
mod filtered;
mod geometric;
mod pixel;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use detections::{
    distractor_attr, hoi_attr, read_detections, Candidate, ExternalDetections, FrameDetections, HandObject,
};
pub use filtered::{
    attribute_breakdown, attribute_filtered_scores, center_distance_breakdown, filtered_scores, AttributeBreakdown,
    AttributeIndex, BinBreakdown, ViewBreakdown,
};
pub use geometric::{box_attributes, center_bins, motion_state, BarycenterSource};
pub use pixel::{laplacian_variance, mean_rgb, pixel_attributes, GrayImage, PixelLabels};

use crate::geometry::CenterDistanceBin;
use crate::model::{SequencePair, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attribute {
    SV,
    ARC,
    IV,
    DIS,
    MB,
    FM,
    LR,
    MR,
    HR,
    STA,
    MOV,
    HOI,
}

impl Attribute {
    pub const ALL: [Attribute; 12] = [
        Attribute::SV,
        Attribute::ARC,
        Attribute::IV,
        Attribute::DIS,
        Attribute::MB,
        Attribute::FM,
        Attribute::LR,
        Attribute::MR,
        Attribute::HR,
        Attribute::STA,
        Attribute::MOV,
        Attribute::HOI,
    ];

    pub fn bit(self) -> u16 {
        1 << (self as u16)
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::SV => "SV",
            Attribute::ARC => "ARC",
            Attribute::IV => "IV",
            Attribute::DIS => "DIS",
            Attribute::MB => "MB",
            Attribute::FM => "FM",
            Attribute::LR => "LR",
            Attribute::MR => "MR",
            Attribute::HR => "HR",
            Attribute::STA => "STA",
            Attribute::MOV => "MOV",
            Attribute::HOI => "HOI",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Attribute::SV => "scale variation",
            Attribute::ARC => "aspect ratio change",
            Attribute::IV => "illumination variation",
            Attribute::DIS => "distractors",
            Attribute::MB => "motion blur",
            Attribute::FM => "fast motion",
            Attribute::LR => "low resolution",
            Attribute::MR => "medium resolution",
            Attribute::HR => "high resolution",
            Attribute::STA => "static target",
            Attribute::MOV => "moving target",
            Attribute::HOI => "hand-object interaction",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown attribute {s:?}"))
    }
}

/// Bitset over [`Attribute`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeSet(u16);

impl AttributeSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn contains(self, a: Attribute) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn insert(&mut self, a: Attribute) {
        self.0 |= a.bit();
    }

    pub fn remove(&mut self, a: Attribute) {
        self.0 &= !a.bit();
    }

    pub fn set(&mut self, a: Attribute, on: bool) {
        if on {
            self.insert(a)
        } else {
            self.remove(a)
        }
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = Attribute> {
        Attribute::ALL.into_iter().filter(move |a| self.contains(*a))
    }
}

impl FromIterator<Attribute> for AttributeSet {
    fn from_iter<I: IntoIterator<Item = Attribute>>(iter: I) -> Self {
        let mut s = AttributeSet::empty();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

/// Labels for the annotated timestamps of one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAttributeSet {
    pub view: View,
    pub frame_offset: u64,
    /// Every annotated timestamp; absent-target timestamps carry no bits.
    pub labels: BTreeMap<u64, AttributeSet>,
    /// Attributes that could not be computed for this view, with the reason.
    pub unavailable: BTreeMap<Attribute, String>,
    /// Timestamps where an otherwise available attribute is undefined.
    pub undefined: BTreeMap<Attribute, Vec<u64>>,
    /// Center-distance bin of each present annotation.
    pub bins: BTreeMap<u64, CenterDistanceBin>,
    pub barycenter: BarycenterSource,
}

impl FrameAttributeSet {
    pub fn new(view: View, frame_offset: u64, timestamps: impl IntoIterator<Item = u64>) -> Self {
        Self {
            view,
            frame_offset,
            labels: timestamps.into_iter().map(|t| (t, AttributeSet::empty())).collect(),
            unavailable: BTreeMap::new(),
            undefined: BTreeMap::new(),
            bins: BTreeMap::new(),
            barycenter: BarycenterSource::Box,
        }
    }

    pub fn get(&self, t: u64) -> AttributeSet {
        self.labels.get(&t).copied().unwrap_or_default()
    }

    pub fn is_available(&self, a: Attribute) -> bool {
        !self.unavailable.contains_key(&a)
    }

    pub(crate) fn mark(&mut self, t: u64, a: Attribute, on: bool) {
        if let Some(s) = self.labels.get_mut(&t) {
            s.set(a, on);
        }
    }

    pub(crate) fn merge(&mut self, a: Attribute, labels: std::result::Result<&BTreeMap<u64, bool>, String>) {
        match labels {
            Ok(map) => {
                for (&t, &on) in map {
                    self.mark(t, a, on);
                }
            }
            Err(reason) => {
                self.unavailable.insert(a, reason);
            }
        }
    }

    /// Number of annotated timestamps carrying `a`.
    pub fn count(&self, a: Attribute) -> usize {
        self.labels.values().filter(|s| s.contains(a)).count()
    }
}

/// Thresholds of every attribute rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeConfig {
    /// SV and ARC fire outside `[ratio_low, ratio_high]`.
    pub ratio_low: f64,
    pub ratio_high: f64,
    /// Euclidean distance of mean RGB in `[0, 1]`.
    pub iv_threshold: f64,
    /// Laplacian variance on 8-bit grayscale below which MB is set.
    pub mb_threshold: f64,
    /// LR below this area, HR above `hr_area`.
    pub lr_area: f64,
    pub hr_area: f64,
    /// STA when consecutive TPV boxes overlap more than this.
    pub static_iou: f64,
    pub dis_cosine: f64,
    pub dis_iou: f64,
    pub hoi_iou: f64,
    pub embedding_tolerance: f64,
}

impl Default for AttributeConfig {
    fn default() -> Self {
        Self {
            ratio_low: 0.5,
            ratio_high: 2.0,
            iv_threshold: 0.15,
            mb_threshold: 100.0,
            lr_area: 32.0 * 32.0,
            hr_area: 96.0 * 96.0,
            static_iou: 0.5,
            dis_cosine: 0.5,
            dis_iou: 0.5,
            hoi_iou: 0.5,
            embedding_tolerance: 1e-3,
        }
    }
}

/// Attributes of both views of a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAttributes {
    pub pair_id: String,
    pub fpv: FrameAttributeSet,
    pub tpv: FrameAttributeSet,
}

impl PairAttributes {
    pub fn view(&self, view: View) -> &FrameAttributeSet {
        match view {
            View::Fpv => &self.fpv,
            View::Tpv => &self.tpv,
        }
    }
}

fn read_view_detections(
    pair: &SequencePair,
    view: View,
    cfg: &AttributeConfig,
) -> std::result::Result<ExternalDetections, String> {
    let path = pair.view(view).detections.as_ref().ok_or("no detections file")?;
    read_detections(path, cfg.embedding_tolerance).map_err(|e| e.to_string())
}

/// Compute every attribute for a pair. Pixel attributes are skipped (and
/// reported unavailable) unless `with_pixels`; detection-based ones need
/// the views' detections files.
pub fn compute_attributes(pair: &SequencePair, cfg: &AttributeConfig, with_pixels: bool) -> PairAttributes {
    let mut out = View::BOTH.map(|view| {
        let seq = pair.view(view);
        let mut set = FrameAttributeSet::new(view, seq.frame_offset, seq.annotations.timestamps());
        let (bins, source) = center_bins(seq);
        set.bins = bins;
        set.barycenter = source;
        box_attributes(&seq.annotations, cfg, &mut set);
        if with_pixels {
            let labels = pixel_attributes(seq, cfg).map_err(|e| e.to_string());
            set.merge(Attribute::IV, labels.as_ref().map(|l| &l.iv).map_err(Clone::clone));
            set.merge(Attribute::MB, labels.as_ref().map(|l| &l.mb).map_err(Clone::clone));
            if let Ok(l) = &labels {
                if !l.mb_undefined.is_empty() {
                    set.undefined.insert(Attribute::MB, l.mb_undefined.clone());
                }
            }
        } else {
            for a in [Attribute::IV, Attribute::MB] {
                set.unavailable.insert(a, "pixel attributes not requested".into());
            }
        }
        let dis = read_view_detections(pair, view, cfg)
            .and_then(|d| distractor_attr(&seq.annotations, &d, cfg).map_err(|e| e.to_string()));
        set.merge(Attribute::DIS, dis.as_ref().map_err(Clone::clone));
        set
    });
    let motion = motion_state(pair, cfg);
    for set in out.iter_mut() {
        for (t, moving) in &motion {
            set.mark(*t, Attribute::STA, !moving);
            set.mark(*t, Attribute::MOV, *moving);
        }
    }
    let hoi =
        read_view_detections(pair, View::Fpv, cfg).and_then(|d| hoi_attr(pair, &d, cfg).map_err(|e| e.to_string()));
    for set in out.iter_mut() {
        set.merge(Attribute::HOI, hoi.as_ref().map_err(Clone::clone));
    }
    let [fpv, tpv] = out;
    PairAttributes {
        pair_id: pair.id.clone(),
        fpv,
        tpv,
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{box_fill_mask, mask_to_box, BBox, BinaryMask};

/// Camera viewpoint of one half of a synchronized pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Fpv,
    Tpv,
}

impl View {
    pub const BOTH: [View; 2] = [View::Fpv, View::Tpv];

    pub fn as_str(self) -> &'static str {
        match self {
            View::Fpv => "fpv",
            View::Tpv => "tpv",
        }
    }

    pub fn other(self) -> View {
        match self {
            View::Fpv => View::Tpv,
            View::Tpv => View::Fpv,
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fpv" => Ok(View::Fpv),
            "tpv" => Ok(View::Tpv),
            other => Err(format!("unknown view {other:?} (expected fpv or tpv)")),
        }
    }
}

/// Target state at one timestamp: a box, a mask, or nothing visible.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetState {
    Box(BBox),
    Mask(BinaryMask),
    Absent,
}

impl TargetState {
    /// A mask with no positive pixels counts as absent.
    pub fn is_present(&self) -> bool {
        match self {
            TargetState::Box(_) => true,
            TargetState::Mask(m) => !m.is_empty(),
            TargetState::Absent => false,
        }
    }

    pub fn to_box(&self) -> Option<BBox> {
        match self {
            TargetState::Box(b) => Some(*b),
            TargetState::Mask(m) => mask_to_box(m).ok(),
            TargetState::Absent => None,
        }
    }

    /// Mask view of the state; boxes are filled into a `height x width` raster.
    pub fn to_mask(&self, height: u32, width: u32) -> Option<BinaryMask> {
        match self {
            TargetState::Box(b) => Some(box_fill_mask(b, height, width)),
            TargetState::Mask(m) => Some(m.clone()),
            TargetState::Absent => None,
        }
    }

    pub fn is_mask(&self) -> bool {
        matches!(self, TargetState::Mask(_))
    }
}

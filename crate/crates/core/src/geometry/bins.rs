use std::fmt;

use serde::{Deserialize, Serialize};

/// Distance of a target from the frame center, in quarters of the frame width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CenterDistanceBin {
    /// Within 25% of the frame width.
    Near = 0,
    /// 25% to 50%.
    Mid = 1,
    /// 50% to 75%.
    Far = 2,
    /// Beyond 75%.
    Edge = 3,
}

impl CenterDistanceBin {
    pub const ALL: [CenterDistanceBin; 4] = [Self::Near, Self::Mid, Self::Far, Self::Edge];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Near => "0-25%",
            Self::Mid => "25-50%",
            Self::Far => "50-75%",
            Self::Edge => "75-100%",
        }
    }
}

impl From<CenterDistanceBin> for u8 {
    fn from(b: CenterDistanceBin) -> u8 {
        b as u8
    }
}

impl TryFrom<u8> for CenterDistanceBin {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        Self::ALL
            .get(v as usize)
            .copied()
            .ok_or_else(|| format!("center-distance bin out of range: {v}"))
    }
}

impl fmt::Display for CenterDistanceBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bin a point by its Euclidean distance from the frame center.
///
/// Thresholds sit at 0.25, 0.50 and 0.75 of the frame width; a distance
/// exactly on a threshold falls in the lower bin.
pub fn center_distance_bin(point: (f64, f64), frame_w: u32, frame_h: u32) -> CenterDistanceBin {
    let (cx, cy) = (frame_w as f64 / 2.0, frame_h as f64 / 2.0);
    let dist = (point.0 - cx).hypot(point.1 - cy);
    let w = frame_w as f64;
    if dist <= 0.25 * w {
        CenterDistanceBin::Near
    } else if dist <= 0.50 * w {
        CenterDistanceBin::Mid
    } else if dist <= 0.75 * w {
        CenterDistanceBin::Far
    } else {
        CenterDistanceBin::Edge
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_center_is_near() {
        assert_eq!(center_distance_bin((360.0, 360.0), 720, 720), CenterDistanceBin::Near);
    }

    #[test]
    fn sixty_percent_is_far() {
        let w = 1000u32;
        assert_eq!(
            center_distance_bin((500.0 + 600.0, 300.0), w, 600),
            CenterDistanceBin::Far
        );
    }

    #[test]
    fn tie_goes_to_lower_bin() {
        // distance 360 == 0.5 * 720
        assert_eq!(center_distance_bin((720.0, 360.0), 720, 720), CenterDistanceBin::Mid);
        assert_eq!(center_distance_bin((540.0, 360.0), 720, 720), CenterDistanceBin::Near);
    }

    #[test]
    fn far_corner_is_edge() {
        // wide frame: corner distance exceeds 0.75 * w only for tall frames
        assert_eq!(center_distance_bin((0.0, 0.0), 100, 300), CenterDistanceBin::Edge);
    }
}

use serde::{Deserialize, Serialize};

use super::BBox;
use crate::error::{Error, Result};

/// Binary raster stored as COCO-style run lengths.
///
/// Runs are column-major and alternate background/foreground, starting
/// with a (possibly empty) background run. The stored form is canonical:
/// no empty runs after the first, so two masks are equal iff their
/// pixels are equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RleRecord", into = "RleRecord")]
pub struct BinaryMask {
    height: u32,
    width: u32,
    counts: Vec<u32>,
}

/// Wire form: `{"size": [h, w], "counts": "<space separated run lengths>"}`.
///
/// A JSON integer array is also accepted for `counts` on input.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RleRecord {
    size: [u32; 2],
    counts: RleCounts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RleCounts {
    Text(String),
    List(Vec<u32>),
}

impl TryFrom<RleRecord> for BinaryMask {
    type Error = Error;

    fn try_from(r: RleRecord) -> Result<Self> {
        let counts = match r.counts {
            RleCounts::Text(s) => parse_counts(&s)?,
            RleCounts::List(v) => v,
        };
        BinaryMask::from_counts(r.size[0], r.size[1], counts)
    }
}

impl From<BinaryMask> for RleRecord {
    fn from(m: BinaryMask) -> Self {
        RleRecord {
            size: [m.height, m.width],
            counts: RleCounts::Text(m.counts_string()),
        }
    }
}

fn parse_counts(s: &str) -> Result<Vec<u32>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|_| Error::Rle(format!("bad run length {tok:?}")))
        })
        .collect()
}

/// Accumulates (value, length) runs into canonical counts.
struct RunBuilder {
    counts: Vec<u32>,
}

impl RunBuilder {
    fn new() -> Self {
        Self { counts: Vec::new() }
    }

    fn push(&mut self, value: bool, len: u32) {
        if len == 0 {
            return;
        }
        if self.counts.is_empty() && value {
            self.counts.push(0);
        }
        let last_value = self.counts.len().is_multiple_of(2);
        if !self.counts.is_empty() && last_value == value {
            *self.counts.last_mut().unwrap() += len;
        } else {
            self.counts.push(len);
        }
    }

    fn finish(self) -> Vec<u32> {
        self.counts
    }
}

impl BinaryMask {
    /// Build from raw run lengths, which must sum to `height * width`.
    pub fn from_counts(height: u32, width: u32, counts: Vec<u32>) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        let expected = height as u64 * width as u64;
        if total != expected {
            return Err(Error::Rle(format!(
                "run lengths sum to {total}, expected {height}x{width} = {expected}"
            )));
        }
        let mut b = RunBuilder::new();
        for (i, &c) in counts.iter().enumerate() {
            b.push(i % 2 == 1, c);
        }
        Ok(Self {
            height,
            width,
            counts: b.finish(),
        })
    }

    /// Parse space or comma separated run lengths.
    pub fn from_counts_str(height: u32, width: u32, counts: &str) -> Result<Self> {
        Self::from_counts(height, width, parse_counts(counts)?)
    }

    /// Build from a row-major raster.
    pub fn from_raster(height: u32, width: u32, data: &[bool]) -> Result<Self> {
        if data.len() as u64 != height as u64 * width as u64 {
            return Err(Error::Rle(format!(
                "raster has {} pixels, expected {height}x{width}",
                data.len()
            )));
        }
        let mut b = RunBuilder::new();
        for x in 0..width as usize {
            for y in 0..height as usize {
                b.push(data[y * width as usize + x], 1);
            }
        }
        Ok(Self {
            height,
            width,
            counts: b.finish(),
        })
    }

    pub fn empty(height: u32, width: u32) -> Self {
        let mut b = RunBuilder::new();
        b.push(false, height * width);
        Self {
            height,
            width,
            counts: b.finish(),
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn counts_string(&self) -> String {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        parts.join(" ")
    }

    /// Row-major raster.
    pub fn to_raster(&self) -> Vec<bool> {
        let (h, w) = (self.height as usize, self.width as usize);
        let mut out = vec![false; h * w];
        for (start, len) in self.foreground_runs() {
            for pos in start..start + len {
                let (x, y) = ((pos / h as u64) as usize, (pos % h as u64) as usize);
                out[y * w + x] = true;
            }
        }
        out
    }

    /// Foreground runs as `(start, len)` in column-major pixel order.
    pub fn foreground_runs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let mut pos = 0u64;
        self.counts.iter().enumerate().filter_map(move |(i, &c)| {
            let start = pos;
            pos += c as u64;
            (i % 2 == 1).then_some((start, c as u64))
        })
    }

    /// Number of positive pixels.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        if x >= self.width || y >= self.height {
            return false;
        }
        let pos = x as u64 * self.height as u64 + y as u64;
        self.foreground_runs()
            .any(|(start, len)| pos >= start && pos < start + len)
    }

    /// Per-column foreground segments `(column, first_row, last_row)`.
    fn column_segments(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        let h = self.height as u64;
        self.foreground_runs().flat_map(move |(start, len)| {
            let end = start + len;
            let first_col = start / h;
            let last_col = (end - 1) / h;
            (first_col..=last_col).map(move |c| {
                let r0 = if c == first_col { start % h } else { 0 };
                let r1 = if c == last_col { (end - 1) % h } else { h - 1 };
                (c, r0, r1)
            })
        })
    }

    fn check_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::DimensionMismatch(
                self.height,
                self.width,
                other.height,
                other.width,
            ));
        }
        Ok(())
    }
}

/// Number of pixels positive in both masks, by merging sorted runs.
fn intersection_area(a: &BinaryMask, b: &BinaryMask) -> u64 {
    let ra: Vec<(u64, u64)> = a.foreground_runs().map(|(s, l)| (s, s + l)).collect();
    let rb: Vec<(u64, u64)> = b.foreground_runs().map(|(s, l)| (s, s + l)).collect();
    let (mut i, mut j, mut inter) = (0, 0, 0u64);
    while i < ra.len() && j < rb.len() {
        let lo = ra[i].0.max(rb[j].0);
        let hi = ra[i].1.min(rb[j].1);
        if hi > lo {
            inter += hi - lo;
        }
        if ra[i].1 < rb[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    inter
}

/// |a ∧ b| / |a ∨ b|, or 0 when both masks are empty.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.check_same_dims(b)?;
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union == 0 {
        return Ok(0.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Tightest axis-aligned box around the positive pixels.
pub fn mask_to_box(m: &BinaryMask) -> Result<BBox> {
    let mut bounds: Option<(u64, u64, u64, u64)> = None;
    for (c, r0, r1) in m.column_segments() {
        bounds = Some(match bounds {
            None => (c, r0, c, r1),
            Some((x0, y0, x1, y1)) => (x0.min(c), y0.min(r0), x1.max(c), y1.max(r1)),
        });
    }
    let (x0, y0, x1, y1) = bounds.ok_or(Error::EmptyMask)?;
    Ok(BBox::new(
        x0 as f64,
        y0 as f64,
        (x1 - x0 + 1) as f64,
        (y1 - y0 + 1) as f64,
    ))
}

/// Pixel index range `[lo, hi)` whose centers fall inside `[start, start + len)`.
fn covered_range(start: f64, len: f64, limit: u32) -> (u32, u32) {
    if !(start.is_finite() && len.is_finite()) || len <= 0.0 {
        return (0, 0);
    }
    let clamp = |v: f64| v.clamp(0.0, limit as f64) as u32;
    let lo = clamp((start - 0.5).ceil());
    let hi = clamp((start + len - 0.5).ceil());
    (lo, hi.max(lo))
}

/// Rasterize a box: every pixel whose center lies inside it is positive.
pub fn box_fill_mask(b: &BBox, height: u32, width: u32) -> BinaryMask {
    let (c0, c1) = covered_range(b.x, b.w, width);
    let (r0, r1) = covered_range(b.y, b.h, height);
    let mut runs = RunBuilder::new();
    for c in 0..width {
        if c >= c0 && c < c1 && r1 > r0 {
            runs.push(false, r0);
            runs.push(true, r1 - r0);
            runs.push(false, height - r1);
        } else {
            runs.push(false, height);
        }
    }
    BinaryMask {
        height,
        width,
        counts: runs.finish(),
    }
}

/// Mean coordinate `(x, y)` of the positive pixels, in pixel-index units.
pub fn barycenter(m: &BinaryMask) -> Result<(f64, f64)> {
    let (mut n, mut sx, mut sy) = (0u64, 0f64, 0f64);
    for (c, r0, r1) in m.column_segments() {
        let k = r1 - r0 + 1;
        n += k;
        sx += (c * k) as f64;
        sy += (r0 + r1) as f64 * k as f64 / 2.0;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((sx / n as f64, sy / n as f64))
}

/// Positive pixels with at least one negative or out-of-frame 4-neighbor.
pub fn boundary_pixels(m: &BinaryMask) -> BinaryMask {
    let (h, w) = (m.height as usize, m.width as usize);
    let raster = m.to_raster();
    let at = |x: isize, y: isize| {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && raster[y as usize * w + x as usize]
    };
    let mut out = vec![false; h * w];
    for y in 0..h {
        for x in 0..w {
            if !raster[y * w + x] {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            out[y * w + x] = !(at(xi - 1, yi) && at(xi + 1, yi) && at(xi, yi - 1) && at(xi, yi + 1));
        }
    }
    BinaryMask::from_raster(m.height, m.width, &out).expect("raster matches mask dimensions")
}

//! Region (J) and boundary (F) measures for segmentation output.
//!
//! Boundaries are 4-connected contours; two contours match within a
//! tolerance of `round(0.008 * diagonal)` pixels using a square
//! structuring element.

use crate::error::{Error, Result};
use crate::geometry::{mask_iou, mask_to_box, BinaryMask};

/// Boundary matching tolerance in pixels for a frame of the given size.
pub fn boundary_tolerance(height: u32, width: u32) -> u32 {
    (0.008 * (height as f64).hypot(width as f64)).round() as u32
}

/// Row-major crop of a mask.
struct Grid {
    w: usize,
    h: usize,
    data: Vec<bool>,
}

impl Grid {
    fn crop(m: &BinaryMask, x0: usize, y0: usize, w: usize, h: usize) -> Grid {
        let mut data = vec![false; w * h];
        let mh = m.height() as u64;
        for (start, len) in m.foreground_runs() {
            for pos in start..start + len {
                let (x, y) = ((pos / mh) as usize, (pos % mh) as usize);
                if x >= x0 && x < x0 + w && y >= y0 && y < y0 + h {
                    data[(y - y0) * w + (x - x0)] = true;
                }
            }
        }
        Grid { w, h, data }
    }

    fn at(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.w
            && (y as usize) < self.h
            && self.data[y as usize * self.w + x as usize]
    }

    fn boundary(&self) -> Grid {
        let mut data = vec![false; self.w * self.h];
        for y in 0..self.h {
            for x in 0..self.w {
                if !self.data[y * self.w + x] {
                    continue;
                }
                let (xi, yi) = (x as isize, y as isize);
                data[y * self.w + x] =
                    !(self.at(xi - 1, yi) && self.at(xi + 1, yi) && self.at(xi, yi - 1) && self.at(xi, yi + 1));
            }
        }
        Grid {
            w: self.w,
            h: self.h,
            data,
        }
    }

    fn count(&self) -> usize {
        self.data.iter().filter(|&&p| p).count()
    }

    /// Pixels of `self` lying within Chebyshev distance `radius` of a pixel of `other`.
    fn matched_within(&self, other: &Grid, radius: usize) -> usize {
        let (w, h) = (self.w, self.h);
        let mut sums = vec![0u32; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += other.data[y * w + x] as u32;
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        let mut hits = 0;
        for y in 0..h {
            for x in 0..w {
                if !self.data[y * w + x] {
                    continue;
                }
                let (xa, ya) = (x.saturating_sub(radius), y.saturating_sub(radius));
                let (xb, yb) = ((x + radius + 1).min(w), (y + radius + 1).min(h));
                let total = sums[yb * (w + 1) + xb] + sums[ya * (w + 1) + xa]
                    - sums[ya * (w + 1) + xb]
                    - sums[yb * (w + 1) + xa];
                hits += (total > 0) as usize;
            }
        }
        hits
    }
}

/// Boundary F-measure of one frame. A missing prediction is an empty mask.
///
/// Both contours empty scores 1; exactly one empty scores 0.
pub fn frame_boundary_f(pred: Option<&BinaryMask>, gt: &BinaryMask, tol: u32) -> Result<f64> {
    if let Some(p) = pred {
        if p.height() != gt.height() || p.width() != gt.width() {
            return Err(Error::DimensionMismatch(p.height(), p.width(), gt.height(), gt.width()));
        }
    }
    let boxes: Vec<_> = pred
        .into_iter()
        .chain(std::iter::once(gt))
        .filter_map(|m| mask_to_box(m).ok())
        .collect();
    if boxes.is_empty() {
        return Ok(1.0);
    }
    let margin = tol as f64 + 1.0;
    let x0 = boxes.iter().map(|b| b.x).fold(f64::INFINITY, f64::min) - margin;
    let y0 = boxes.iter().map(|b| b.y).fold(f64::INFINITY, f64::min) - margin;
    let x1 = boxes.iter().map(|b| b.right()).fold(0.0, f64::max) + margin;
    let y1 = boxes.iter().map(|b| b.bottom()).fold(0.0, f64::max) + margin;
    let clamp = |v: f64, hi: u32| v.clamp(0.0, hi as f64) as usize;
    let (cx0, cy0) = (clamp(x0, gt.width()), clamp(y0, gt.height()));
    let (cx1, cy1) = (clamp(x1, gt.width()), clamp(y1, gt.height()));
    let (w, h) = (cx1 - cx0, cy1 - cy0);

    let gt_b = Grid::crop(gt, cx0, cy0, w, h).boundary();
    let pred_b = match pred {
        Some(p) => Grid::crop(p, cx0, cy0, w, h).boundary(),
        None => Grid {
            w,
            h,
            data: vec![false; w * h],
        },
    };
    let (n_pred, n_gt) = (pred_b.count(), gt_b.count());
    match (n_pred, n_gt) {
        (0, 0) => return Ok(1.0),
        (0, _) | (_, 0) => return Ok(0.0),
        _ => {}
    }
    let radius = tol as usize;
    let precision = pred_b.matched_within(&gt_b, radius) as f64 / n_pred as f64;
    let recall = gt_b.matched_within(&pred_b, radius) as f64 / n_gt as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Mean mask IoU over frames, scaled to `[0, 100]`.
pub fn region_j(preds: &[Option<BinaryMask>], gts: &[BinaryMask]) -> Result<f64> {
    if preds.len() != gts.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} ground-truth masks",
            preds.len(),
            gts.len()
        )));
    }
    if gts.is_empty() {
        return Err(Error::Empty("mask series"));
    }
    let mut total = 0.0;
    for (p, g) in preds.iter().zip(gts) {
        total += match p {
            Some(p) => mask_iou(p, g)?,
            None => 0.0,
        };
    }
    Ok(100.0 * total / gts.len() as f64)
}

/// Mean boundary F-measure over frames, scaled to `[0, 100]`.
pub fn boundary_f(preds: &[Option<BinaryMask>], gts: &[BinaryMask], tol: u32) -> Result<f64> {
    if preds.len() != gts.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} ground-truth masks",
            preds.len(),
            gts.len()
        )));
    }
    if gts.is_empty() {
        return Err(Error::Empty("mask series"));
    }
    let mut total = 0.0;
    for (p, g) in preds.iter().zip(gts) {
        total += frame_boundary_f(p.as_ref(), g, tol)?;
    }
    Ok(100.0 * total / gts.len() as f64)
}

pub fn jf(j: f64, f: f64) -> f64 {
    (j + f) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{box_fill_mask, BBox};

    fn square(x: f64, y: f64, side: f64, dim: u32) -> BinaryMask {
        box_fill_mask(&BBox::new(x, y, side, side), dim, dim)
    }

    #[test]
    fn tolerance_for_common_sizes() {
        assert_eq!(boundary_tolerance(100, 100), 1);
        assert_eq!(boundary_tolerance(720, 720), 8);
        assert_eq!(boundary_tolerance(480, 854), 8);
    }

    #[test]
    fn identical_masks_score_full() {
        let m = square(30.0, 30.0, 20.0, 100);
        let preds = vec![Some(m.clone()); 3];
        let gts = vec![m; 3];
        let j = region_j(&preds, &gts).unwrap();
        let f = boundary_f(&preds, &gts, 1).unwrap();
        assert_eq!((j, f, jf(j, f)), (100.0, 100.0, 100.0));
    }

    #[test]
    fn disjoint_masks_score_zero() {
        let preds = vec![Some(square(0.0, 0.0, 10.0, 100))];
        let gts = vec![square(60.0, 60.0, 10.0, 100)];
        assert_eq!(region_j(&preds, &gts).unwrap(), 0.0);
        assert_eq!(boundary_f(&preds, &gts, 1).unwrap(), 0.0);
    }

    #[test]
    fn one_pixel_shift() {
        let tol = boundary_tolerance(100, 100);
        assert_eq!(tol, 1);
        let preds = vec![Some(square(41.0, 40.0, 20.0, 100))];
        let gts = vec![square(40.0, 40.0, 20.0, 100)];
        let j = region_j(&preds, &gts).unwrap();
        assert!((j - 380.0 / 420.0 * 100.0).abs() < 1e-9);
        assert_eq!(boundary_f(&preds, &gts, tol).unwrap(), 100.0);
        // without tolerance the shifted vertical edges no longer match
        assert!(boundary_f(&preds, &gts, 0).unwrap() < 100.0);
    }

    #[test]
    fn missing_prediction_and_empty_cases() {
        let g = square(10.0, 10.0, 5.0, 32);
        assert_eq!(frame_boundary_f(None, &g, 1).unwrap(), 0.0);
        let empty = BinaryMask::empty(32, 32);
        assert_eq!(frame_boundary_f(Some(&empty), &empty, 1).unwrap(), 1.0);
        assert_eq!(frame_boundary_f(Some(&g), &empty, 1).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = square(1.0, 1.0, 3.0, 16);
        let b = square(1.0, 1.0, 3.0, 17);
        assert!(frame_boundary_f(Some(&a), &b, 1).is_err());
        assert!(region_j(&[Some(a)], &[b]).is_err());
    }

    #[test]
    fn cropping_matches_full_frame_reference() {
        // reference: full-frame boundaries and brute-force neighborhood search
        let p = square(3.0, 50.0, 9.0, 64);
        let g = square(5.0, 52.0, 11.0, 64);
        let pb = crate::geometry::boundary_pixels(&p);
        let gb = crate::geometry::boundary_pixels(&g);
        let near = |a: &BinaryMask, b: &BinaryMask, r: i64| {
            let mut hits = 0;
            for y in 0..64i64 {
                for x in 0..64i64 {
                    if !a.get(x as u32, y as u32) {
                        continue;
                    }
                    let found = (-r..=r).any(|dy| {
                        (-r..=r).any(|dx| {
                            let (nx, ny) = (x + dx, y + dy);
                            nx >= 0 && ny >= 0 && b.get(nx as u32, ny as u32)
                        })
                    });
                    hits += found as u64;
                }
            }
            hits as f64
        };
        let prec = near(&pb, &gb, 2) / pb.area() as f64;
        let rec = near(&gb, &pb, 2) / gb.area() as f64;
        let expected = 2.0 * prec * rec / (prec + rec);
        let got = frame_boundary_f(Some(&p), &g, 2).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

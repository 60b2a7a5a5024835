use std::collections::BTreeMap;
use std::path::Path;

use image::RgbImage;

use super::AttributeConfig;
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::model::ViewSequence;

/// 8-bit-scale grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    fn from_rgb_crop(img: &RgbImage, (x0, y0, x1, y1): (u32, u32, u32, u32)) -> Self {
        let mut data = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
        for y in y0..y1 {
            for x in x0..x1 {
                let [r, g, b] = img.get_pixel(x, y).0;
                data.push(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64);
            }
        }
        Self {
            width: (x1 - x0) as usize,
            height: (y1 - y0) as usize,
            data,
        }
    }
}

/// Population variance of the 4-neighbour Laplacian over the valid region.
/// `None` for images smaller than 3x3.
pub fn laplacian_variance(img: &GrayImage) -> Option<f64> {
    let (w, h) = (img.width, img.height);
    if w < 3 || h < 3 {
        return None;
    }
    let px = |x: usize, y: usize| img.data[y * w + x];
    let mut values = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            values.push(px(x, y - 1) + px(x - 1, y) + px(x + 1, y) + px(x, y + 1) - 4.0 * px(x, y));
        }
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

/// Mean RGB of a crop, channels scaled to `[0, 1]`.
pub fn mean_rgb(img: &RgbImage, (x0, y0, x1, y1): (u32, u32, u32, u32)) -> [f64; 3] {
    let mut sum = [0.0; 3];
    for y in y0..y1 {
        for x in x0..x1 {
            for (s, c) in sum.iter_mut().zip(img.get_pixel(x, y).0) {
                *s += c as f64;
            }
        }
    }
    let n = ((x1 - x0) * (y1 - y0)) as f64 * 255.0;
    sum.map(|s| s / n)
}

fn crop_rect(b: &BBox, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
    let x0 = b.x.floor().clamp(0.0, width as f64) as u32;
    let y0 = b.y.floor().clamp(0.0, height as f64) as u32;
    let x1 = b.right().ceil().clamp(0.0, width as f64) as u32;
    let y1 = b.bottom().ceil().clamp(0.0, height as f64) as u32;
    (x1 > x0 && y1 > y0).then_some((x0, y0, x1, y1))
}

fn load_frame(path: &Path, seq: &ViewSequence) -> Result<RgbImage> {
    let img = image::open(path)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .to_rgb8();
    if img.dimensions() != (seq.width, seq.height) {
        return Err(Error::DimensionMismatch(
            img.height(),
            img.width(),
            seq.height,
            seq.width,
        ));
    }
    Ok(img)
}

/// IV and MB labels of one view.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PixelLabels {
    pub iv: BTreeMap<u64, bool>,
    pub mb: BTreeMap<u64, bool>,
    /// Timestamps whose crop is too small for the blur measure.
    pub mb_undefined: Vec<u64>,
}

/// Illumination variation against the first frame and motion blur, from
/// the ground-truth crop of every present annotation.
pub fn pixel_attributes(seq: &ViewSequence, cfg: &AttributeConfig) -> Result<PixelLabels> {
    let mut out = PixelLabels::default();
    let mut reference: Option<[f64; 3]> = None;
    for (t, state) in seq.annotations.present() {
        let Some(rect) = state.to_box().and_then(|b| crop_rect(&b, seq.width, seq.height)) else {
            out.mb_undefined.push(t);
            continue;
        };
        let img = load_frame(&seq.frame_path(t), seq)?;
        let mean = mean_rgb(&img, rect);
        let first = *reference.get_or_insert(mean);
        let dist = mean.iter().zip(first).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        out.iv.insert(t, dist > cfg.iv_threshold);
        match laplacian_variance(&GrayImage::from_rgb_crop(&img, rect)) {
            Some(v) => {
                out.mb.insert(t, v < cfg.mb_threshold);
            }
            None => out.mb_undefined.push(t),
        }
    }
    Ok(out)
}

use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{box_fill_mask, BBox};
use crate::model::{
    save_manifest, AnnotationTrack, DatasetManifest, SequencePair, Split, TargetState, View, ViewSequence,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationRepr {
    #[default]
    Box,
    Mask,
}

/// Linear box trajectory in one view. Coordinates are rounded to whole
/// pixels at every frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewPath {
    pub width: u32,
    pub height: u32,
    pub start: BBox,
    /// Pixels per frame.
    #[serde(default)]
    pub velocity: [f64; 2],
    /// Width/height change in pixels per frame.
    #[serde(default)]
    pub growth: [f64; 2],
    #[serde(default = "default_background")]
    pub background: [u8; 3],
    #[serde(default = "default_color")]
    pub color: [u8; 3],
}

fn default_background() -> [u8; 3] {
    [40, 40, 40]
}

fn default_color() -> [u8; 3] {
    [220, 60, 60]
}

fn default_fps() -> f64 {
    5.0
}

fn default_rate() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_id")]
    pub id: String,
    /// Frames per view (`T`).
    pub frames: u64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default = "default_rate")]
    pub annotation_rate: f64,
    pub fpv: ViewPath,
    pub tpv: ViewPath,
    /// Annotation-grid steps where the target is absent in both views.
    #[serde(default)]
    pub gaps: Vec<u64>,
    #[serde(default)]
    pub repr: AnnotationRepr,
    /// Write PNG frames (flat background, filled target rectangle).
    #[serde(default)]
    pub render: bool,
    #[serde(default = "default_true")]
    pub clamp: bool,
    /// Uniform start-position jitter in pixels, drawn from the seed.
    #[serde(default)]
    pub jitter: f64,
}

fn default_id() -> String {
    "synth".into()
}

/// A family of pairs drawn from one template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub seed: u64,
    pub count: usize,
    pub template: SynthSpec,
    /// Inclusive range of annotation-grid lengths; the template's `frames`
    /// is used when omitted.
    #[serde(default)]
    pub steps: Option<[u64; 2]>,
    /// Upper bound on the number of absence gaps per pair.
    #[serde(default)]
    pub max_gaps: usize,
}

impl SynthSpec {
    fn step(&self) -> Result<u64> {
        let ratio = self.fps / self.annotation_rate;
        if ratio.is_nan() || ratio < 1.0 || (ratio - ratio.round()).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "fps / annotation rate = {ratio} is not a whole number of frames"
            )));
        }
        Ok(ratio.round() as u64)
    }
}

fn box_at(path: &ViewPath, start: BBox, t: u64, clamp: bool) -> Result<BBox> {
    let tf = t as f64;
    let raw = BBox::new(
        (start.x + path.velocity[0] * tf).round(),
        (start.y + path.velocity[1] * tf).round(),
        (start.w + path.growth[0] * tf).round().max(0.0),
        (start.h + path.growth[1] * tf).round().max(0.0),
    );
    let clamped = raw.clamp_to(path.width, path.height);
    if clamped != raw && !clamp {
        return Err(Error::InvalidArgument(format!(
            "trajectory leaves the {}x{} frame at t={t}: {:?}",
            path.width,
            path.height,
            raw.to_array()
        )));
    }
    if clamped.is_degenerate() {
        return Err(Error::InvalidArgument(format!("target has no visible area at t={t}")));
    }
    Ok(clamped)
}

fn render_frames(path: &ViewPath, boxes: &[Option<BBox>], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (t, b) in boxes.iter().enumerate() {
        let mut img = RgbImage::from_pixel(path.width, path.height, Rgb(path.background));
        if let Some(b) = b {
            for y in b.y as u32..(b.y + b.h) as u32 {
                for x in b.x as u32..(b.x + b.w) as u32 {
                    img.put_pixel(x, y, Rgb(path.color));
                }
            }
        }
        let file = dir.join(format!("{t:06}.png"));
        img.save(&file).map_err(|e| Error::Image {
            path: file.clone(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

/// Build a synchronized pair from a spec. With `frames_root`, rendered
/// frames go to `<frames_root>/<id>/<view>/%06d.png`.
pub fn generate_pair(spec: &SynthSpec, seed: u64, frames_root: Option<&Path>) -> Result<SequencePair> {
    let step = spec.step()?;
    if spec.frames == 0 {
        return Err(Error::InvalidArgument(
            "synthetic sequence needs at least one frame".into(),
        ));
    }
    if spec.gaps.contains(&0) {
        return Err(Error::InvalidArgument("the first annotation cannot be a gap".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut build = |view: View, path: &ViewPath| -> Result<ViewSequence> {
        let mut start = path.start;
        if spec.jitter > 0.0 {
            start.x += rng.random_range(-spec.jitter..=spec.jitter);
            start.y += rng.random_range(-spec.jitter..=spec.jitter);
        }
        let visible = |t: u64| !spec.gaps.contains(&(t / step));
        let boxes: Vec<Option<BBox>> = (0..spec.frames)
            .map(|t| {
                if visible(t) {
                    box_at(path, start, t, spec.clamp).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_>>()?;
        let listed = (0..spec.frames)
            .step_by(step as usize)
            .filter_map(|t| boxes[t as usize].map(|b| (t, b)))
            .map(|(t, b)| {
                let state = match spec.repr {
                    AnnotationRepr::Box => TargetState::Box(b),
                    AnnotationRepr::Mask => TargetState::Mask(box_fill_mask(&b, path.height, path.width)),
                };
                (t, state)
            })
            .collect();
        let frames = match frames_root {
            Some(root) => {
                let dir: PathBuf = root.join(&spec.id).join(view.as_str());
                if spec.render {
                    render_frames(path, &boxes, &dir)?;
                }
                dir.join("%06d.png").to_string_lossy().into_owned()
            }
            None => format!("synthetic/{}/{}/%06d.png", spec.id, view),
        };
        Ok(ViewSequence {
            view,
            frames,
            width: path.width,
            height: path.height,
            annotations: AnnotationTrack::new(spec.frames, spec.fps, spec.annotation_rate, listed)?,
            frame_offset: 0,
            detections: None,
        })
    };
    let fpv = build(View::Fpv, &spec.fpv)?;
    let tpv = build(View::Tpv, &spec.tpv)?;
    Ok(SequencePair {
        id: spec.id.clone(),
        fpv,
        tpv,
    })
}

/// Per-pair specs of a suite: lengths and gaps drawn from the seed.
fn suite_specs(suite: &SuiteSpec) -> Result<Vec<(SynthSpec, u64)>> {
    let step = suite.template.step()?;
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let mut out = Vec::with_capacity(suite.count);
    for i in 0..suite.count {
        let mut spec = suite.template.clone();
        spec.id = format!("{}-{i:03}", suite.template.id);
        if let Some([lo, hi]) = suite.steps {
            let n = rng.random_range(lo.max(1)..=hi.max(lo.max(1)));
            spec.frames = (n - 1) * step + 1;
        }
        let n_steps = (spec.frames - 1) / step + 1;
        if suite.max_gaps > 0 && n_steps > 3 {
            let gaps = rng.random_range(0..=suite.max_gaps);
            let mut steps = Vec::new();
            for _ in 0..gaps {
                let start = rng.random_range(1..n_steps);
                let len = rng.random_range(1..=3u64).min(n_steps - start);
                steps.extend(start..start + len);
            }
            steps.sort_unstable();
            steps.dedup();
            spec.gaps = steps;
        }
        out.push((spec, rng.random()));
    }
    Ok(out)
}

/// Generate a suite in memory (frames rendered under `frames_root` if set).
pub fn generate_suite(suite: &SuiteSpec, frames_root: Option<&Path>) -> Result<DatasetManifest> {
    let pairs = suite_specs(suite)?
        .iter()
        .map(|(spec, seed)| generate_pair(spec, *seed, frames_root))
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetManifest {
        split: Split::Test,
        pairs,
    })
}

/// Generate a suite on disk: frames under `<dir>/frames`, plus a manifest
/// and annotation files. Returns the manifest path.
pub fn write_suite(suite: &SuiteSpec, dir: &Path) -> Result<PathBuf> {
    let manifest = generate_suite(suite, Some(&dir.join("frames")))?;
    save_manifest(&manifest, dir)
}

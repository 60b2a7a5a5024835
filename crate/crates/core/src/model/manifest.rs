use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_state_file, write_state_file, AnnotationTrack, TargetState, View};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One view of a synchronized pair: where its frames live and its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSequence {
    pub view: View,
    /// Directory, or printf-style template such as `frames/%06d.jpg`.
    pub frames: String,
    pub width: u32,
    pub height: u32,
    pub annotations: AnnotationTrack,
    /// Added to local frame indices when resolving frame files (non-zero for
    /// short-term sub-sequences).
    pub frame_offset: u64,
    /// Precomputed distractor / hand-object detections, when available.
    pub detections: Option<PathBuf>,
}

impl ViewSequence {
    pub fn frame_count(&self) -> u64 {
        self.annotations.frame_count()
    }

    /// Path of the image for local frame `t`.
    pub fn frame_path(&self, t: u64) -> PathBuf {
        let index = t + self.frame_offset;
        if self.frames.contains('%') {
            return PathBuf::from(format_frame_template(&self.frames, index));
        }
        let dir = Path::new(&self.frames);
        for ext in ["jpg", "png", "jpeg"] {
            let candidate = dir.join(format!("{index:06}.{ext}"));
            if candidate.exists() {
                return candidate;
            }
        }
        dir.join(format!("{index:06}.jpg"))
    }
}

/// Expand `%d`, `%Nd`, `%0Nd` and `%%` in a frame template.
fn format_frame_template(template: &str, index: u64) -> String {
    let mut out = String::with_capacity(template.len() + 8);
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        if chars.peek() == Some(&'%') {
            chars.next();
            out.push('%');
            continue;
        }
        let mut spec = String::new();
        while let Some(&d) = chars.peek() {
            if d.is_ascii_digit() {
                spec.push(d);
                chars.next();
            } else {
                break;
            }
        }
        if chars.peek() == Some(&'d') {
            chars.next();
            let zero = spec.starts_with('0');
            let width: usize = spec.parse().unwrap_or(0);
            if zero {
                out.push_str(&format!("{index:0width$}"));
            } else {
                out.push_str(&format!("{index:width$}"));
            }
        } else {
            out.push('%');
            out.push_str(&spec);
        }
    }
    out
}

/// A synchronized FPV/TPV pair of the same activity.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub id: String,
    pub fpv: ViewSequence,
    pub tpv: ViewSequence,
}

impl SequencePair {
    pub fn view(&self, view: View) -> &ViewSequence {
        match view {
            View::Fpv => &self.fpv,
            View::Tpv => &self.tpv,
        }
    }

    /// Shared aggregation weight (identical across views for valid pairs).
    pub fn weight(&self) -> usize {
        self.fpv.annotations.weight()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub split: Split,
    pub pairs: Vec<SequencePair>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SequencePair> {
        self.pairs.iter().find(|p| p.id == id)
    }
}

/// A broken synchronization constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    LengthMismatch { fpv: u64, tpv: u64 },
    GridMismatch { fpv: u64, tpv: u64 },
    AnnotationSetsDiffer { only_fpv: Vec<u64>, only_tpv: Vec<u64> },
    InitialAnnotationMissing { view: View },
    GeometryOutOfBounds { view: View, t: u64, reason: String },
    DuplicateId,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch { fpv, tpv } => {
                write!(f, "length mismatch (fpv {fpv} frames, tpv {tpv} frames)")
            }
            Violation::GridMismatch { fpv, tpv } => {
                write!(f, "annotation grid mismatch (fpv every {fpv} frames, tpv every {tpv})")
            }
            Violation::AnnotationSetsDiffer { only_fpv, only_tpv } => write!(
                f,
                "annotation sets differ (only in fpv: {only_fpv:?}, only in tpv: {only_tpv:?})"
            ),
            Violation::InitialAnnotationMissing { view } => {
                write!(f, "initial annotation missing in {view}")
            }
            Violation::GeometryOutOfBounds { view, t, reason } => {
                write!(f, "geometry out of bounds in {view} at t={t}: {reason}")
            }
            Violation::DuplicateId => f.write_str("duplicate pair id"),
        }
    }
}

fn geometry_violation(seq: &ViewSequence, state: &TargetState) -> Option<String> {
    match state {
        TargetState::Box(b) => {
            if !b.is_finite() {
                Some("non-finite box".into())
            } else if b.w < 0.0 || b.h < 0.0 {
                Some(format!("negative size {}x{}", b.w, b.h))
            } else if b.right() < 0.0 || b.bottom() < 0.0 || b.x > seq.width as f64 || b.y > seq.height as f64 {
                Some(format!(
                    "box {:?} outside {}x{} frame",
                    b.to_array(),
                    seq.width,
                    seq.height
                ))
            } else {
                None
            }
        }
        TargetState::Mask(m) if m.height() != seq.height || m.width() != seq.width => Some(format!(
            "mask is {}x{}, frame is {}x{}",
            m.height(),
            m.width(),
            seq.height,
            seq.width
        )),
        _ => None,
    }
}

/// Check the synchronization constraints; an empty result means valid.
pub fn validate_pair(pair: &SequencePair) -> Vec<Violation> {
    let mut out = Vec::new();
    let (fa, ta) = (&pair.fpv.annotations, &pair.tpv.annotations);
    if fa.frame_count() != ta.frame_count() {
        out.push(Violation::LengthMismatch {
            fpv: fa.frame_count(),
            tpv: ta.frame_count(),
        });
    }
    if fa.step() != ta.step() {
        out.push(Violation::GridMismatch {
            fpv: fa.step(),
            tpv: ta.step(),
        });
    }
    let fset: HashSet<u64> = fa.present_timestamps().into_iter().collect();
    let tset: HashSet<u64> = ta.present_timestamps().into_iter().collect();
    if fset != tset {
        let mut only_fpv: Vec<u64> = fset.difference(&tset).copied().collect();
        let mut only_tpv: Vec<u64> = tset.difference(&fset).copied().collect();
        only_fpv.sort_unstable();
        only_tpv.sort_unstable();
        out.push(Violation::AnnotationSetsDiffer { only_fpv, only_tpv });
    }
    for seq in [&pair.fpv, &pair.tpv] {
        if !seq.annotations.get(0).is_some_and(TargetState::is_present) {
            out.push(Violation::InitialAnnotationMissing { view: seq.view });
        }
    }
    for seq in [&pair.fpv, &pair.tpv] {
        for (t, state) in seq.annotations.entries() {
            if let Some(reason) = geometry_violation(seq, state) {
                out.push(Violation::GeometryOutOfBounds {
                    view: seq.view,
                    t: *t,
                    reason,
                });
            }
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    split: Split,
    pairs: Vec<PairEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PairEntry {
    id: String,
    fpv: ViewEntry,
    tpv: ViewEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct ViewEntry {
    frames: String,
    width: u32,
    height: u32,
    fps: f64,
    annotations: PathBuf,
    #[serde(default = "default_annotation_rate")]
    annotation_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_count: Option<u64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    frame_offset: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detections: Option<PathBuf>,
}

fn default_annotation_rate() -> f64 {
    1.0
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Number of frames available on disk for a locator, if any exist.
fn count_frames(frames: &str) -> Option<u64> {
    if frames.contains('%') {
        let n = (0u64..)
            .take_while(|&i| Path::new(&format_frame_template(frames, i)).exists())
            .count() as u64;
        return (n > 0).then_some(n);
    }
    let entries = std::fs::read_dir(frames).ok()?;
    let n = entries
        .filter_map(|e| e.ok())
        .filter(|e| {
            e.path()
                .extension()
                .and_then(|x| x.to_str())
                .is_some_and(|x| matches!(x.to_ascii_lowercase().as_str(), "jpg" | "jpeg" | "png"))
        })
        .count() as u64;
    (n > 0).then_some(n)
}

fn build_view(base: &Path, view: View, entry: &ViewEntry) -> Result<ViewSequence> {
    let ann_path = resolve(base, &entry.annotations);
    let listed = read_state_file(&ann_path)?;
    let frames = if Path::new(&entry.frames).is_absolute() {
        entry.frames.clone()
    } else {
        base.join(&entry.frames).to_string_lossy().into_owned()
    };
    let frame_count = entry
        .frame_count
        .or_else(|| count_frames(&frames).map(|n| n.saturating_sub(entry.frame_offset)))
        .or_else(|| listed.last().map(|(t, _)| t + 1))
        .unwrap_or(0);
    let annotations = AnnotationTrack::new(frame_count, entry.fps, entry.annotation_rate, listed)
        .map_err(|e| Error::parse(&ann_path, 0, e.to_string()))?;
    Ok(ViewSequence {
        view,
        frames,
        width: entry.width,
        height: entry.height,
        annotations,
        frame_offset: entry.frame_offset,
        detections: entry.detections.as_ref().map(|d| resolve(base, d)),
    })
}

/// Clamp partially out-of-frame boxes to the frame.
fn clamp_boxes(mut seq: ViewSequence) -> ViewSequence {
    let (w, h) = (seq.width, seq.height);
    seq.annotations = seq.annotations.map_states(|s| match s {
        TargetState::Box(b) => TargetState::Box(b.clamp_to(w, h)),
        other => other,
    });
    seq
}

/// Read a manifest and every annotation file it references, validating
/// each pair. Frame images are not touched.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ManifestFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));

    let mut seen = HashSet::new();
    for entry in &file.pairs {
        if !seen.insert(entry.id.as_str()) {
            return Err(Error::Constraint {
                pair: entry.id.clone(),
                violations: vec![Violation::DuplicateId],
            });
        }
    }

    let pairs = file
        .pairs
        .par_iter()
        .map(|entry| {
            let pair = SequencePair {
                id: entry.id.clone(),
                fpv: build_view(base, View::Fpv, &entry.fpv)?,
                tpv: build_view(base, View::Tpv, &entry.tpv)?,
            };
            let violations = validate_pair(&pair);
            if !violations.is_empty() {
                return Err(Error::Constraint {
                    pair: pair.id,
                    violations,
                });
            }
            Ok(SequencePair {
                id: pair.id,
                fpv: clamp_boxes(pair.fpv),
                tpv: clamp_boxes(pair.tpv),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetManifest {
        split: file.split,
        pairs,
    })
}

fn file_stem_for(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Write `manifest.json` plus one annotation file per view under `dir`.
/// Returns the manifest path.
/// `path` relative to `dir` when it lies inside it.
fn relative_to(dir: &Path, path: &Path) -> PathBuf {
    path.strip_prefix(dir)
        .map(Path::to_path_buf)
        .unwrap_or_else(|_| path.to_path_buf())
}

/// Write `manifest.json` and one annotation file per view under `dir`.
/// Frame and detection paths inside `dir` are stored relative to it.
pub fn save_manifest(manifest: &DatasetManifest, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut pairs = Vec::with_capacity(manifest.pairs.len());
    for (i, pair) in manifest.pairs.iter().enumerate() {
        let stem = format!("{i:05}_{}", file_stem_for(&pair.id));
        let entry_for = |seq: &ViewSequence| -> Result<ViewEntry> {
            let rel = PathBuf::from("annotations")
                .join(&stem)
                .join(format!("{}.jsonl", seq.view));
            write_state_file(&dir.join(&rel), seq.annotations.listed())?;
            Ok(ViewEntry {
                frames: relative_to(dir, Path::new(&seq.frames)).to_string_lossy().into_owned(),
                width: seq.width,
                height: seq.height,
                fps: seq.annotations.fps(),
                annotations: rel,
                annotation_rate: seq.annotations.annotation_rate(),
                frame_count: Some(seq.frame_count()),
                frame_offset: seq.frame_offset,
                detections: seq.detections.as_deref().map(|d| relative_to(dir, d)),
            })
        };
        let fpv = entry_for(&pair.fpv)?;
        let tpv = entry_for(&pair.tpv)?;
        pairs.push(PairEntry {
            id: pair.id.clone(),
            fpv,
            tpv,
        });
    }
    let file = ManifestFile {
        split: manifest.split,
        pairs,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BBox, BinaryMask};

    fn seq(view: View, frame_count: u64, listed: Vec<(u64, TargetState)>) -> ViewSequence {
        ViewSequence {
            view,
            frames: "frames/%06d.jpg".into(),
            width: 100,
            height: 80,
            annotations: AnnotationTrack::new(frame_count, 5.0, 1.0, listed).unwrap(),
            frame_offset: 0,
            detections: None,
        }
    }

    fn boxes(ts: &[u64]) -> Vec<(u64, TargetState)> {
        ts.iter()
            .map(|&t| (t, TargetState::Box(BBox::new(10.0, 10.0, 20.0, 20.0))))
            .collect()
    }

    #[test]
    fn frame_template_expansion() {
        assert_eq!(format_frame_template("a/%06d.jpg", 42), "a/000042.jpg");
        assert_eq!(format_frame_template("a/%d.png", 7), "a/7.png");
        assert_eq!(format_frame_template("100%%/%3d", 7), "100%/  7");
    }

    #[test]
    fn identical_tracks_are_valid() {
        let pair = SequencePair {
            id: "p".into(),
            fpv: seq(View::Fpv, 50, boxes(&[0, 5, 10])),
            tpv: seq(View::Tpv, 50, boxes(&[0, 5, 10])),
        };
        assert!(validate_pair(&pair).is_empty());
    }

    #[test]
    fn length_mismatch() {
        let pair = SequencePair {
            id: "p".into(),
            fpv: seq(View::Fpv, 100, boxes(&[0])),
            tpv: seq(View::Tpv, 99, boxes(&[0])),
        };
        let v = validate_pair(&pair);
        assert_eq!(v, vec![Violation::LengthMismatch { fpv: 100, tpv: 99 }]);
        assert!(v[0].to_string().starts_with("length mismatch"));
    }

    #[test]
    fn missing_initial_annotation() {
        let pair = SequencePair {
            id: "p".into(),
            fpv: seq(View::Fpv, 20, boxes(&[5])),
            tpv: seq(View::Tpv, 20, boxes(&[5])),
        };
        let v = validate_pair(&pair);
        assert_eq!(v.len(), 2);
        assert!(v
            .iter()
            .all(|x| x.to_string().starts_with("initial annotation missing")));
    }

    #[test]
    fn differing_annotation_sets() {
        let pair = SequencePair {
            id: "p".into(),
            fpv: seq(View::Fpv, 50, boxes(&[0, 5, 10])),
            tpv: seq(View::Tpv, 50, boxes(&[0, 5])),
        };
        let v = validate_pair(&pair);
        assert_eq!(
            v,
            vec![Violation::AnnotationSetsDiffer {
                only_fpv: vec![10],
                only_tpv: vec![]
            }]
        );
    }

    #[test]
    fn geometry_out_of_bounds() {
        let mut listed = boxes(&[0]);
        listed.push((5, TargetState::Box(BBox::new(500.0, 10.0, 5.0, 5.0))));
        let mut tpv_listed = boxes(&[0]);
        tpv_listed.push((5, TargetState::Mask(BinaryMask::empty(3, 3).clone())));
        // an empty mask is absent, so make the tpv mask non-empty but wrong-sized
        tpv_listed[1] = (5, TargetState::Mask(BinaryMask::from_counts(3, 3, vec![0, 9]).unwrap()));
        let pair = SequencePair {
            id: "p".into(),
            fpv: seq(View::Fpv, 20, listed),
            tpv: seq(View::Tpv, 20, tpv_listed),
        };
        let v = validate_pair(&pair);
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v.iter().all(|x| x.to_string().starts_with("geometry out of bounds")));
    }
}

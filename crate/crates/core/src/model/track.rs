use std::collections::BTreeMap;

use super::TargetState;
use crate::error::{Error, Result};

/// Ground-truth states sampled on the annotation grid of one video.
///
/// The grid holds every `fps / annotation_rate`-th frame of `[0, frame_count)`.
/// Grid timestamps missing from the source file are [`TargetState::Absent`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTrack {
    frame_count: u64,
    fps: f64,
    annotation_rate: f64,
    step: u64,
    entries: Vec<(u64, TargetState)>,
}

impl AnnotationTrack {
    /// Build a track from the explicitly listed (sorted) entries.
    pub fn new(frame_count: u64, fps: f64, annotation_rate: f64, listed: Vec<(u64, TargetState)>) -> Result<Self> {
        let step = grid_step(fps, annotation_rate)?;
        if frame_count == 0 {
            return Err(Error::InvalidArgument("track has no frames".into()));
        }
        let mut listed_map = BTreeMap::new();
        for (t, state) in listed {
            if t >= frame_count {
                return Err(Error::InvalidArgument(format!(
                    "annotation at t={t} outside [0, {}]",
                    frame_count - 1
                )));
            }
            if t % step != 0 {
                return Err(Error::InvalidArgument(format!(
                    "annotation at t={t} is off the annotation grid (every {step} frames)"
                )));
            }
            if listed_map.insert(t, state).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate annotation at t={t}")));
            }
        }
        let entries = (0..frame_count)
            .step_by(step as usize)
            .map(|t| (t, listed_map.remove(&t).unwrap_or(TargetState::Absent)))
            .collect();
        Ok(Self {
            frame_count,
            fps,
            annotation_rate,
            step,
            entries,
        })
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn annotation_rate(&self) -> f64 {
        self.annotation_rate
    }

    /// Frames between consecutive annotated timestamps.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// All grid timestamps with their states, in order.
    pub fn entries(&self) -> &[(u64, TargetState)] {
        &self.entries
    }

    pub fn timestamps(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }

    pub fn get(&self, t: u64) -> Option<&TargetState> {
        if !t.is_multiple_of(self.step) {
            return None;
        }
        self.entries.get((t / self.step) as usize).map(|(_, s)| s)
    }

    pub fn is_annotated(&self, t: u64) -> bool {
        t < self.frame_count && t.is_multiple_of(self.step)
    }

    pub fn present(&self) -> impl Iterator<Item = (u64, &TargetState)> + '_ {
        self.entries
            .iter()
            .filter(|(_, s)| s.is_present())
            .map(|(t, s)| (*t, s))
    }

    pub fn present_timestamps(&self) -> Vec<u64> {
        self.present().map(|(t, _)| t).collect()
    }

    /// Aggregation weight: non-absent annotations after the initialization frame.
    pub fn weight(&self) -> usize {
        self.present().filter(|&(t, _)| t > 0).count()
    }

    /// Explicitly listed (non-absent) entries, for serialization.
    pub fn listed(&self) -> impl Iterator<Item = (u64, &TargetState)> + '_ {
        self.present()
    }

    /// Replace every state in place, keeping the grid.
    pub fn map_states(mut self, f: impl Fn(TargetState) -> TargetState) -> Self {
        self.entries = self.entries.into_iter().map(|(t, s)| (t, f(s))).collect();
        self
    }

    /// The part of the track covering frames `[start, end]`, re-anchored so
    /// that `start` becomes frame 0. `start` must lie on the grid.
    pub fn sub_track(&self, start: u64, end: u64) -> Result<Self> {
        if !self.is_annotated(start) || end < start || end >= self.frame_count {
            return Err(Error::InvalidArgument(format!(
                "sub-track [{start}, {end}] not aligned with a {}-frame track",
                self.frame_count
            )));
        }
        let entries = self
            .entries
            .iter()
            .filter(|(t, _)| (start..=end).contains(t))
            .map(|(t, s)| (t - start, s.clone()))
            .collect();
        Ok(Self {
            frame_count: end - start + 1,
            fps: self.fps,
            annotation_rate: self.annotation_rate,
            step: self.step,
            entries,
        })
    }
}

fn grid_step(fps: f64, annotation_rate: f64) -> Result<u64> {
    if !(fps > 0.0 && annotation_rate > 0.0 && fps.is_finite() && annotation_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "fps ({fps}) and annotation rate ({annotation_rate}) must be positive"
        )));
    }
    let ratio = fps / annotation_rate;
    let step = ratio.round();
    if step < 1.0 || (ratio - step).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "fps / annotation rate = {ratio} is not a whole number of frames"
        )));
    }
    Ok(step as u64)
}

/// Tracker output, indexed by frame. Frames without an entry are absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionTrack {
    states: BTreeMap<u64, TargetState>,
}

impl PredictionTrack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u64, TargetState)>) -> Self {
        Self {
            states: entries.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, t: u64, state: TargetState) {
        self.states.insert(t, state);
    }

    pub fn get(&self, t: u64) -> &TargetState {
        self.states.get(&t).unwrap_or(&TargetState::Absent)
    }

    pub fn contains(&self, t: u64) -> bool {
        self.states.contains_key(&t)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &TargetState)> + '_ {
        self.states.iter().map(|(t, s)| (*t, s))
    }
}

/// Maximal runs `[first_ts, last_ts]` of adjacent grid timestamps where the
/// target is present.
pub fn visibility_runs(track: &AnnotationTrack) -> Vec<(u64, u64)> {
    let mut runs = Vec::new();
    let mut current: Option<(u64, u64)> = None;
    for (t, state) in track.entries() {
        if state.is_present() {
            current = Some(match current {
                Some((start, _)) => (start, *t),
                None => (*t, *t),
            });
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    runs.extend(current);
    runs
}

use crate::error::{Error, Result};
use crate::model::{visibility_runs, DatasetManifest, SequencePair, ViewSequence};

/// Shortest visibility run (in annotations) kept for short-term evaluation:
/// the initialization frame plus one scored frame.
pub const DEFAULT_MIN_RUN_LEN: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ShortTermSplit {
    pub pairs: Vec<SequencePair>,
    /// Runs shorter than the minimum length.
    pub dropped: usize,
}

fn sub_view(seq: &ViewSequence, start: u64, end: u64) -> Result<ViewSequence> {
    Ok(ViewSequence {
        annotations: seq.annotations.sub_track(start, end)?,
        frame_offset: seq.frame_offset + start,
        ..seq.clone()
    })
}

/// The sub-pair covering the visibility run `[start, end]` (grid timestamps).
///
/// The sub-pair starts at the run's first annotation, which becomes its
/// initialization frame. A run reaching the last annotation keeps the
/// trailing frames of the sequence. Its id is `<pair id>@<start>`.
pub fn sub_pair(pair: &SequencePair, run: (u64, u64)) -> Result<SequencePair> {
    let (start, end) = run;
    let track = &pair.fpv.annotations;
    let last_grid = track.timestamps().last().unwrap_or(0);
    let end = if end == last_grid { track.frame_count() - 1 } else { end };
    Ok(SequencePair {
        id: format!("{}@{start}", pair.id),
        fpv: sub_view(&pair.fpv, start, end)?,
        tpv: sub_view(&pair.tpv, start, end)?,
    })
}

/// Split a pair into one re-anchored sub-pair per visibility run.
///
/// Runs are identical in both views for a valid pair, so they are taken
/// from the FPV track.
pub fn extract_short_term(pair: &SequencePair, min_len: usize) -> Result<ShortTermSplit> {
    let step = pair.fpv.annotations.step();
    let mut out = ShortTermSplit {
        pairs: Vec::new(),
        dropped: 0,
    };
    for run in visibility_runs(&pair.fpv.annotations) {
        let len = ((run.1 - run.0) / step + 1) as usize;
        if len < min_len {
            out.dropped += 1;
            continue;
        }
        out.pairs.push(sub_pair(pair, run)?);
    }
    Ok(out)
}

/// Look up a pair or a short-term sub-pair (`<id>@<start>`) by id.
pub fn resolve_pair(manifest: &DatasetManifest, id: &str) -> Result<SequencePair> {
    if let Some(p) = manifest.get(id) {
        return Ok(p.clone());
    }
    let unknown = || Error::InvalidArgument(format!("unknown sequence id {id:?}"));
    let (base, start) = id.rsplit_once('@').ok_or_else(unknown)?;
    let start: u64 = start.parse().map_err(|_| unknown())?;
    let pair = manifest.get(base).ok_or_else(unknown)?;
    let run = visibility_runs(&pair.fpv.annotations)
        .into_iter()
        .find(|r| r.0 == start)
        .ok_or_else(unknown)?;
    sub_pair(pair, run)
}

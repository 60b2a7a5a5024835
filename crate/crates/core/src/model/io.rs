//! JSON Lines codec shared by annotation and prediction files.
//!
//! Each line is `{"t": <frame>}` plus at most one of `"box": [x, y, w, h]`
//! or `"rle": {"size": [h, w], "counts": "..."}`. A line with neither (or
//! with `"absent": true`) is an explicit absence.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TargetState;
use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask};

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct StateRecord {
    pub t: u64,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rle: Option<BinaryMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absent: Option<bool>,
}

impl StateRecord {
    pub fn from_state(t: u64, state: &TargetState) -> Self {
        let mut rec = StateRecord {
            t,
            bbox: None,
            rle: None,
            absent: None,
        };
        match state {
            TargetState::Box(b) => rec.bbox = Some(*b),
            TargetState::Mask(m) => rec.rle = Some(m.clone()),
            TargetState::Absent => rec.absent = Some(true),
        }
        rec
    }

    pub fn into_state(self) -> std::result::Result<(u64, TargetState), String> {
        match (self.bbox, self.rle, self.absent) {
            (Some(_), Some(_), _) => Err("both \"box\" and \"rle\" given".into()),
            (Some(_), _, Some(true)) | (_, Some(_), Some(true)) => Err("\"absent\" combined with geometry".into()),
            (Some(b), None, _) => Ok((self.t, TargetState::Box(b))),
            (None, Some(m), _) => Ok((self.t, TargetState::Mask(m))),
            (None, None, _) => Ok((self.t, TargetState::Absent)),
        }
    }
}

/// Read a state file; entries must be sorted by `t` without duplicates.
pub fn read_state_file(path: &Path) -> Result<Vec<(u64, TargetState)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out: Vec<(u64, TargetState)> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StateRecord = serde_json::from_str(&line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let (t, state) = rec.into_state().map_err(|msg| Error::parse(path, lineno, msg))?;
        if let Some(&(prev, _)) = out.last() {
            if t == prev {
                return Err(Error::parse(path, lineno, format!("duplicate t={t}")));
            }
            if t < prev {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("t={t} after t={prev}: file not sorted"),
                ));
            }
        }
        out.push((t, state));
    }
    Ok(out)
}

pub fn write_state_file<'a>(path: &Path, entries: impl IntoIterator<Item = (u64, &'a TargetState)>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (t, state) in entries {
        let line = serde_json::to_string(&StateRecord::from_state(t, state))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(lines: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(lines.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_all_variants() {
        let f = write(
            "{\"t\":0,\"box\":[1,2,3,4]}\n{\"t\":5}\n\n{\"t\":10,\"rle\":{\"size\":[2,2],\"counts\":\"1 2 1\"}}\n{\"t\":15,\"absent\":true}\n",
        );
        let got = read_state_file(f.path()).unwrap();
        assert_eq!(got.len(), 4);
        assert_eq!(got[0], (0, TargetState::Box(BBox::new(1.0, 2.0, 3.0, 4.0))));
        assert_eq!(got[1], (5, TargetState::Absent));
        assert!(got[2].1.is_mask());
        assert_eq!(got[3], (15, TargetState::Absent));
    }

    #[test]
    fn duplicate_t_is_error() {
        let f = write("{\"t\":0,\"box\":[1,2,3,4]}\n{\"t\":0}\n");
        let err = read_state_file(f.path()).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn unsorted_is_error() {
        let f = write("{\"t\":5}\n{\"t\":0}\n");
        assert!(read_state_file(f.path())
            .unwrap_err()
            .to_string()
            .contains("not sorted"));
    }

    #[test]
    fn both_geometries_is_error() {
        let f = write("{\"t\":0,\"box\":[1,2,3,4],\"rle\":{\"size\":[1,1],\"counts\":\"1\"}}\n");
        assert!(matches!(read_state_file(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_rle_reports_line() {
        let f = write("{\"t\":0,\"rle\":{\"size\":[2,2],\"counts\":\"1 1\"}}\n");
        let err = read_state_file(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(err.to_string().contains("run lengths sum"));
    }
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use vista_eval::geometry::BBox;
use vista_eval::synth::{AnnotationRepr, SuiteSpec, SynthSpec, ViewPath};

pub fn view_path(width: u32, height: u32, start: [f64; 4], velocity: [f64; 2]) -> ViewPath {
    ViewPath {
        width,
        height,
        start: BBox::new(start[0], start[1], start[2], start[3]),
        velocity,
        growth: [0.0, 0.0],
        background: [40, 40, 40],
        color: [220, 60, 60],
    }
}

pub fn template() -> SynthSpec {
    SynthSpec {
        id: "syn".into(),
        frames: 31,
        fps: 10.0,
        annotation_rate: 5.0,
        fpv: view_path(160, 120, [20.0, 20.0, 30.0, 24.0], [1.5, 0.5]),
        tpv: view_path(200, 150, [80.0, 60.0, 16.0, 20.0], [0.25, 0.0]),
        gaps: vec![],
        repr: AnnotationRepr::Box,
        render: false,
        clamp: true,
        jitter: 2.0,
    }
}

pub fn suite(count: usize, seed: u64) -> SuiteSpec {
    SuiteSpec {
        seed,
        count,
        template: template(),
        steps: Some([3, 40]),
        max_gaps: 2,
    }
}

pub fn write_script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    path
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vista-eval")
}

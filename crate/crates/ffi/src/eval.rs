use std::ffi::c_char;
use std::path::Path;
use std::time::Duration;

use vista_eval::metrics::{Metric, ScoreMode};
use vista_eval::model::{load_manifest, DatasetManifest, View};
use vista_eval::reports::{evaluate_report, read_report, write_run, EvalReport};
use vista_eval::sope::{driver_from_spec, EvalOptions, Protocol, DEFAULT_FRAME_TIMEOUT, DEFAULT_MIN_RUN_LEN};

use crate::error::{guard, Failure, VistaStatus};
use crate::metrics::VistaDelta;
use crate::{get, put, put_handle, put_string, text, VISTA_VIEW_FPV, VISTA_VIEW_TPV};

/// A validated dataset manifest.
pub struct VistaManifest {
    manifest: DatasetManifest,
    name: String,
}

/// An evaluation report with one or more trackers.
pub struct VistaReport(EvalReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VistaProtocol {
    Long = 0,
    Short = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VistaRepr {
    Box = 0,
    Mask = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VistaMetric {
    Auc = 0,
    Nps = 1,
    Gsr = 2,
    J = 3,
    F = 4,
    Jf = 5,
}

impl From<VistaMetric> for Metric {
    fn from(m: VistaMetric) -> Self {
        match m {
            VistaMetric::Auc => Metric::Auc,
            VistaMetric::Nps => Metric::Nps,
            VistaMetric::Gsr => Metric::Gsr,
            VistaMetric::J => Metric::J,
            VistaMetric::F => Metric::F,
            VistaMetric::Jf => Metric::Jf,
        }
    }
}

/// Options for [`vista_evaluate`]. Start from [`vista_eval_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VistaEvalOptions {
    /// `replay:DIR`, `cmd:COMMAND` or `scripted:KIND`. Required.
    pub driver: *const c_char,
    /// Tracker label; the driver string when null.
    pub label: *const c_char,
    pub protocol: VistaProtocol,
    pub repr: VistaRepr,
    /// Bitwise OR of `VISTA_VIEW_FPV` and `VISTA_VIEW_TPV`.
    pub views: u32,
    /// Worker threads; 0 is treated as 1.
    pub jobs: usize,
    pub min_run_len: usize,
    pub with_vos: bool,
    pub with_pixels: bool,
    /// Per-frame reply timeout for subprocess trackers.
    pub timeout_secs: f64,
}

#[no_mangle]
pub extern "C" fn vista_eval_options_default() -> VistaEvalOptions {
    VistaEvalOptions {
        driver: std::ptr::null(),
        label: std::ptr::null(),
        protocol: VistaProtocol::Long,
        repr: VistaRepr::Box,
        views: VISTA_VIEW_FPV | VISTA_VIEW_TPV,
        jobs: 1,
        min_run_len: DEFAULT_MIN_RUN_LEN,
        with_vos: true,
        with_pixels: false,
        timeout_secs: DEFAULT_FRAME_TIMEOUT.as_secs_f64(),
    }
}

/// Load and validate a manifest.
#[no_mangle]
pub unsafe extern "C" fn vista_manifest_load(path: *const c_char, out: *mut *mut VistaManifest) -> VistaStatus {
    guard(|| {
        let path = text(path, "path")?;
        let manifest = load_manifest(Path::new(path))?;
        put_handle(
            out,
            VistaManifest {
                manifest,
                name: path.to_string(),
            },
        )
    })
}

/// Number of pairs; 0 for a null manifest.
#[no_mangle]
pub unsafe extern "C" fn vista_manifest_pair_count(manifest: *const VistaManifest) -> usize {
    manifest.as_ref().map_or(0, |m| m.manifest.len())
}

#[no_mangle]
pub unsafe extern "C" fn vista_manifest_free(manifest: *mut VistaManifest) {
    if !manifest.is_null() {
        drop(Box::from_raw(manifest));
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::new(VistaStatus::InvalidArgument, msg)
}

/// Evaluate one tracker over the manifest.
#[no_mangle]
pub unsafe extern "C" fn vista_evaluate(
    manifest: *const VistaManifest,
    options: *const VistaEvalOptions,
    out: *mut *mut VistaReport,
) -> VistaStatus {
    guard(|| {
        let m = get(manifest, "manifest")?;
        let o = get(options, "options")?;
        let spec = text(o.driver, "options.driver")?;
        let label = if o.label.is_null() {
            spec
        } else {
            text(o.label, "options.label")?
        };
        if !(o.timeout_secs > 0.0 && o.timeout_secs.is_finite()) {
            return Err(invalid("timeout_secs must be positive"));
        }
        let mut views = Vec::new();
        if o.views & VISTA_VIEW_FPV != 0 {
            views.push(View::Fpv);
        }
        if o.views & VISTA_VIEW_TPV != 0 {
            views.push(View::Tpv);
        }
        if views.is_empty() || o.views & !(VISTA_VIEW_FPV | VISTA_VIEW_TPV) != 0 {
            return Err(invalid(format!("bad view mask {}", o.views)));
        }
        let repr = match o.repr {
            VistaRepr::Box => ScoreMode::Box,
            VistaRepr::Mask => ScoreMode::Mask,
        };
        let opts = EvalOptions {
            protocol: match o.protocol {
                VistaProtocol::Long => Protocol::Long,
                VistaProtocol::Short => Protocol::Short,
            },
            views,
            jobs: o.jobs,
            min_run_len: o.min_run_len,
            with_vos: o.with_vos,
        };
        let driver = driver_from_spec(spec, repr, Duration::from_secs_f64(o.timeout_secs))?;
        let (report, _) = evaluate_report(&m.manifest, &m.name, driver.as_ref(), label, repr, &opts, o.with_pixels)?;
        put_handle(out, VistaReport(report))
    })
}

/// Load a `report.json`, verifying its summaries against its scores.
#[no_mangle]
pub unsafe extern "C" fn vista_report_load(path: *const c_char, out: *mut *mut VistaReport) -> VistaStatus {
    guard(|| {
        let path = text(path, "path")?;
        put_handle(out, VistaReport(read_report(Path::new(path))?))
    })
}

/// Serialize the report as pretty-printed JSON.
#[no_mangle]
pub unsafe extern "C" fn vista_report_to_json(report: *const VistaReport, out: *mut *mut c_char) -> VistaStatus {
    guard(|| {
        let json = serde_json::to_string_pretty(&get(report, "report")?.0).map_err(vista_eval::Error::from)?;
        put_string(out, json)
    })
}

/// Write the run directory under `root`. When `out_dir` is not null it
/// receives the directory path.
#[no_mangle]
pub unsafe extern "C" fn vista_report_write(
    report: *const VistaReport,
    root: *const c_char,
    out_dir: *mut *mut c_char,
) -> VistaStatus {
    guard(|| {
        let dir = write_run(&get(report, "report")?.0, Path::new(text(root, "root")?))?;
        if out_dir.is_null() {
            Ok(())
        } else {
            put_string(out_dir, dir.display().to_string())
        }
    })
}

/// Number of trackers; 0 for a null report.
#[no_mangle]
pub unsafe extern "C" fn vista_report_tracker_count(report: *const VistaReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.trackers.len())
}

/// Viewpoint bias of one tracker for `metric`.
#[no_mangle]
pub unsafe extern "C" fn vista_report_delta(
    report: *const VistaReport,
    tracker: usize,
    metric: VistaMetric,
    weighted: bool,
    out: *mut VistaDelta,
) -> VistaStatus {
    guard(|| {
        let r = &get(report, "report")?.0;
        let t = r
            .trackers
            .get(tracker)
            .ok_or_else(|| invalid(format!("tracker index {tracker} out of range")))?;
        let metric = Metric::from(metric);
        let d = t.summary(weighted).delta(metric).ok_or_else(|| {
            Failure::new(
                VistaStatus::Unavailable,
                format!("{metric} not computed for {}", t.label()),
            )
        })?;
        put(
            out,
            VistaDelta {
                delta: d.delta,
                fpv_mean: d.fpv_mean,
                tpv_mean: d.tpv_mean,
            },
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn vista_report_free(report: *mut VistaReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

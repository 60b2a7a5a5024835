use std::ffi::{CStr, CString};
use std::ptr;

use vista_eval::synth::{generate_suite, write_suite, AnnotationRepr, SuiteSpec, SynthSpec, ViewPath};
use vista_eval::BBox;
use vista_eval_ffi::*;

fn suite_manifest(dir: &std::path::Path) -> CString {
    let view = |start: [f64; 4], velocity| ViewPath {
        width: 160,
        height: 120,
        start: BBox::new(start[0], start[1], start[2], start[3]),
        velocity,
        growth: [0.0, 0.0],
        background: [40, 40, 40],
        color: [220, 60, 60],
    };
    let suite = SuiteSpec {
        seed: 4,
        count: 5,
        template: SynthSpec {
            id: "ffi".into(),
            frames: 21,
            fps: 10.0,
            annotation_rate: 5.0,
            fpv: view([20.0, 20.0, 30.0, 24.0], [1.0, 0.5]),
            tpv: view([80.0, 60.0, 16.0, 20.0], [0.25, 0.0]),
            gaps: vec![],
            repr: AnnotationRepr::Box,
            render: false,
            clamp: true,
            jitter: 1.0,
        },
        steps: Some([3, 12]),
        max_gaps: 1,
    };
    assert_eq!(generate_suite(&suite, None).unwrap().len(), 5);
    let path = write_suite(&suite, dir).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    vista_string_free(s);
    out
}

#[test]
fn evaluate_write_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = suite_manifest(dir.path());
    let driver = CString::new("scripted:view_biased:0.9/0.5").unwrap();
    let label = CString::new("biased").unwrap();
    unsafe {
        let mut manifest = ptr::null_mut();
        assert_eq!(vista_manifest_load(path.as_ptr(), &mut manifest), VistaStatus::Ok);
        assert_eq!(vista_manifest_pair_count(manifest), 5);

        let mut opts = vista_eval_options_default();
        opts.driver = driver.as_ptr();
        opts.label = label.as_ptr();
        opts.jobs = 2;
        let mut report = ptr::null_mut();
        assert_eq!(vista_evaluate(manifest, &opts, &mut report), VistaStatus::Ok);
        assert_eq!(vista_report_tracker_count(report), 1);

        let mut d = VistaDelta {
            delta: 0.0,
            fpv_mean: 0.0,
            tpv_mean: 0.0,
        };
        assert_eq!(
            vista_report_delta(report, 0, VistaMetric::Auc, true, &mut d),
            VistaStatus::Ok
        );
        assert!((d.fpv_mean - 90.0).abs() < 1e-9 && (d.tpv_mean - 50.0).abs() < 1e-9);
        assert!((d.delta - 40.0).abs() < 1e-9);
        assert_eq!(
            vista_report_delta(report, 1, VistaMetric::Auc, true, &mut d),
            VistaStatus::InvalidArgument
        );

        let mut json = ptr::null_mut();
        assert_eq!(vista_report_to_json(report, &mut json), VistaStatus::Ok);
        let doc: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(doc["trackers"][0]["config"]["label"], "biased");

        let root = CString::new(dir.path().join("runs").to_str().unwrap()).unwrap();
        let mut out_dir = ptr::null_mut();
        assert_eq!(vista_report_write(report, root.as_ptr(), &mut out_dir), VistaStatus::Ok);
        let run_dir = std::path::PathBuf::from(take(out_dir));
        let report_path = CString::new(run_dir.join("report.json").to_str().unwrap()).unwrap();
        let mut loaded = ptr::null_mut();
        assert_eq!(vista_report_load(report_path.as_ptr(), &mut loaded), VistaStatus::Ok);
        assert_eq!(vista_report_tracker_count(loaded), 1);

        opts.views = 0;
        let mut none = ptr::null_mut();
        assert_eq!(vista_evaluate(manifest, &opts, &mut none), VistaStatus::InvalidArgument);
        opts.views = VISTA_VIEW_FPV;
        opts.driver = ptr::null();
        assert_eq!(vista_evaluate(manifest, &opts, &mut none), VistaStatus::NullPointer);
        let unknown = CString::new("nope:x").unwrap();
        opts.driver = unknown.as_ptr();
        assert_eq!(vista_evaluate(manifest, &opts, &mut none), VistaStatus::InvalidArgument);
        assert!(CStr::from_ptr(vista_last_error())
            .to_str()
            .unwrap()
            .contains("unknown driver"));
        assert!(none.is_null());

        vista_report_free(report);
        vista_report_free(loaded);
        vista_manifest_free(manifest);
    }
}

#[test]
fn manifest_errors_map_to_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = CString::new(dir.path().join("none.json").to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(vista_manifest_load(missing.as_ptr(), &mut m), VistaStatus::Io);
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\"pairs\": [").unwrap();
        let bad = CString::new(bad.to_str().unwrap()).unwrap();
        assert_eq!(vista_manifest_load(bad.as_ptr(), &mut m), VistaStatus::Parse);
    }
    assert!(m.is_null());
}

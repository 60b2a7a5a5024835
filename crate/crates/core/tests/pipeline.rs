mod common;

use std::process::Command;

use common::{bin, suite};
use vista_eval::attributes::AttributeConfig;
use vista_eval::metrics::{Metric, ScoreMode};
use vista_eval::model::View;
use vista_eval::reports::{
    attribute_index, build_tracker_report, read_report, write_run, EvalReport, ReportMetadata, RunConfig,
};
use vista_eval::sope::{evaluate_dataset, extract_short_term, EvalOptions, EvalOutcome, Protocol};
use vista_eval::synth::{expected_scores, generate_suite, ScriptedDriver, ScriptedTracker};

fn check_against_closed_form(tracker: &str, repr: ScoreMode, protocol: Protocol) {
    let manifest = generate_suite(&suite(8, 5), None).unwrap();
    let tracker: ScriptedTracker = tracker.parse().unwrap();
    let opts = EvalOptions {
        protocol,
        jobs: 4,
        with_vos: false,
        ..EvalOptions::default()
    };
    let out = evaluate_dataset(&manifest, &ScriptedDriver::new(tracker.clone(), repr), &opts).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    let units: Vec<_> = match protocol {
        Protocol::Long => manifest.pairs.clone(),
        Protocol::Short => manifest
            .pairs
            .iter()
            .flat_map(|p| extract_short_term(p, 2).unwrap().pairs)
            .collect(),
    };
    assert_eq!(units.len(), out.results.len());
    for (unit, result) in units.iter().zip(&out.results) {
        assert_eq!(unit.id, result.pair_id);
        for e in expected_scores(unit, &tracker, repr).unwrap() {
            let got = &result.view(e.view).unwrap().score;
            assert_eq!(got.weight, e.weight);
            for (metric, want) in [(Metric::Auc, e.auc), (Metric::Nps, e.nps), (Metric::Gsr, e.gsr)] {
                assert!(
                    (got.get(metric) - want).abs() < 1e-9,
                    "{tracker} {} {} {metric}: {} vs {want}",
                    unit.id,
                    e.view,
                    got.get(metric)
                );
            }
        }
    }
}

#[test]
fn scripted_trackers_match_closed_forms() {
    check_against_closed_form("perfect", ScoreMode::Box, Protocol::Long);
    check_against_closed_form("perfect", ScoreMode::Mask, Protocol::Long);
    check_against_closed_form("lose_after:4", ScoreMode::Box, Protocol::Long);
    check_against_closed_form("lose_after:2", ScoreMode::Mask, Protocol::Short);
    check_against_closed_form("view_biased:0.9,0.3,0.7/0.55,0.8", ScoreMode::Box, Protocol::Long);
    check_against_closed_form("view_biased:0.6/0.45", ScoreMode::Box, Protocol::Short);
    check_against_closed_form("fixed_offset:3,-2", ScoreMode::Box, Protocol::Long);
}

#[test]
fn echo_init_has_no_closed_form() {
    let manifest = generate_suite(&suite(1, 5), None).unwrap();
    assert!(expected_scores(&manifest.pairs[0], &ScriptedTracker::EchoInit, ScoreMode::Box).is_err());
}

fn outcome(tracker: &str, jobs: usize) -> (vista_eval::DatasetManifest, EvalOutcome) {
    let manifest = generate_suite(&suite(12, 9), None).unwrap();
    let driver = ScriptedDriver::new(tracker.parse().unwrap(), ScoreMode::Box);
    let opts = EvalOptions {
        jobs,
        ..EvalOptions::default()
    };
    let out = evaluate_dataset(&manifest, &driver, &opts).unwrap();
    (manifest, out)
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let (_, a) = outcome("view_biased:0.8,0.2/0.6", 1);
    let (_, b) = outcome("view_biased:0.8,0.2/0.6", 8);
    assert_eq!(a.results, b.results);
    assert_eq!(a.weighted, b.weighted);
    assert_eq!(a.unweighted, b.unweighted);
}

#[test]
fn weighting_favours_long_sequences() {
    // Losing the target after a fixed number of frames hurts long
    // sequences most, so the length-weighted mean is lower.
    let (_, out) = outcome("lose_after:5", 2);
    for view in View::BOTH {
        let w = out.weighted.mean(view, Metric::Auc).unwrap();
        let u = out.unweighted.mean(view, Metric::Auc).unwrap();
        assert!(w < u, "{view}: weighted {w} unweighted {u}");
    }
}

fn report_for(label: &str, tracker: &str) -> EvalReport {
    let (manifest, out) = outcome(tracker, 3);
    let cfg = AttributeConfig::default();
    let index = attribute_index(&manifest, &out, &cfg, false);
    let config = RunConfig {
        label: label.into(),
        driver: format!("scripted:{tracker}"),
        manifest: "memory".into(),
        protocol: Protocol::Long,
        views: View::BOTH.to_vec(),
        repr: ScoreMode::Box,
        min_run_len: 2,
        with_vos: true,
        with_pixels: false,
    };
    let tr = build_tracker_report(config, &out, &index).unwrap();
    EvalReport::new(ReportMetadata::new(cfg), vec![tr]).unwrap()
}

#[test]
fn run_directory_is_complete_consistent_and_deterministic() {
    let a = report_for("biased", "view_biased:0.9/0.5");
    let b = report_for("lost", "lose_after:3");
    let merged = EvalReport::merge(vec![a, b]).unwrap();
    let root = tempfile::tempdir().unwrap();
    let dir = write_run(&merged, root.path()).unwrap();
    for name in [
        "report.json",
        "scores.csv",
        "bias_auc.svg",
        "bias_auc.csv",
        "bias_nps.csv",
        "bias_gsr.csv",
        "attributes.csv",
        "center_distance.csv",
        "center_distance.svg",
        "tables.md",
        "tables.csv",
    ] {
        assert!(dir.join(name).exists(), "{name}");
    }
    let loaded = read_report(&dir.join("report.json")).unwrap();
    assert_eq!(loaded.config_hash(), merged.config_hash());

    let first: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    let again = write_run(&loaded, root.path()).unwrap();
    assert_eq!(again, dir);
    for (name, bytes) in first {
        assert!(std::fs::read(dir.join(&name)).unwrap() == bytes, "{name} changed");
    }

    let bias = std::fs::read_to_string(dir.join("bias_auc.csv")).unwrap();
    let rows: Vec<&str> = bias.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("biased,") && rows[2].starts_with("lost,"));
    let md = std::fs::read_to_string(dir.join("tables.md")).unwrap();
    let score_tables: Vec<&str> = md
        .split("## ")
        .filter(|s| s.starts_with("Scores weighted") || s.starts_with("Unweighted"))
        .collect();
    assert_eq!(score_tables.len(), 2);
    for table in score_tables {
        let rows: Vec<&str> = table
            .lines()
            .filter(|l| l.starts_with("| ") && !l.starts_with("| Tracker"))
            .collect();
        assert_eq!(rows.len(), 2, "{table}");
    }
}

#[test]
fn tampered_report_fails_verification() {
    let report = report_for("biased", "view_biased:0.9/0.5");
    let root = tempfile::tempdir().unwrap();
    let dir = write_run(&report, root.path()).unwrap();
    let path = dir.join("report.json");
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let auc = &mut doc["trackers"][0]["scores"][0]["auc"];
    *auc = serde_json::json!(auc.as_f64().unwrap() - 5.0);
    std::fs::write(&path, doc.to_string()).unwrap();
    let err = read_report(&path).unwrap_err();
    assert!(err.to_string().contains("does not match"), "{err}");
}

#[test]
fn table_numbers_recompute_from_scores() {
    let report = report_for("biased", "view_biased:0.9,0.1/0.5");
    let root = tempfile::tempdir().unwrap();
    let dir = write_run(&report, root.path()).unwrap();
    let scores = std::fs::read_to_string(dir.join("scores.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(scores.as_bytes());
    let mut sums = [(0.0, 0.0); 2];
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let w: f64 = rec[3].parse().unwrap();
        let auc: f64 = rec[4].parse().unwrap();
        let slot = if &rec[2] == "fpv" { 0 } else { 1 };
        sums[slot].0 += auc * w;
        sums[slot].1 += w;
    }
    let tables = std::fs::read_to_string(dir.join("tables.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(tables.as_bytes());
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "weighted");
    let fpv: f64 = row[2].parse().unwrap();
    let tpv: f64 = row[3].parse().unwrap();
    let delta: f64 = row[4].parse().unwrap();
    assert!((fpv - sums[0].0 / sums[0].1).abs() < 1e-5);
    assert!((tpv - sums[1].0 / sums[1].1).abs() < 1e-5);
    assert!((delta - (fpv - tpv)).abs() < 2e-6);
}

#[test]
fn cli_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("suite.json");
    let mut s = suite(3, 2);
    s.template.render = true;
    std::fs::write(&spec, serde_json::to_string(&s).unwrap()).unwrap();
    let data = dir.path().join("data");
    let out = Command::new(bin())
        .args([
            "synth",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            data.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = String::from_utf8(out.stdout).unwrap().trim().to_string();

    let runs = dir.path().join("runs");
    let mut report_paths = Vec::new();
    for (label, driver) in [
        ("scripted", "scripted:view_biased:0.7/0.9".to_string()),
        (
            "subprocess",
            format!(
                "cmd:'{}' mock-tracker --manifest '{}' --tracker lose_after:2",
                bin(),
                manifest
            ),
        ),
    ] {
        let out = Command::new(bin())
            .args([
                "run",
                "--manifest",
                &manifest,
                "--driver",
                &driver,
                "--label",
                label,
                "--pixels",
                "--jobs",
                "2",
            ])
            .args(["--out", runs.to_str().unwrap(), "--protocol", "short"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let run_dir = String::from_utf8(out.stdout).unwrap().trim().to_string();
        report_paths.push(format!("{run_dir}/report.json"));
    }
    let out = Command::new(bin())
        .args(["report", "merge", "--out", runs.to_str().unwrap()])
        .args(&report_paths)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let merged = String::from_utf8(out.stdout).unwrap().trim().to_string();
    let report = read_report(&std::path::Path::new(&merged).join("report.json")).unwrap();
    assert_eq!(report.trackers.len(), 2);
    let attrs = std::fs::read_to_string(std::path::Path::new(&merged).join("attributes.csv")).unwrap();
    assert!(attrs.lines().any(|l| l.starts_with("scripted,MB,fpv,")), "{attrs}");

    let bad = Command::new(bin())
        .args([
            "run",
            "--manifest",
            &manifest,
            "--driver",
            "bogus:x",
            "--out",
            runs.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

use std::fmt::Write;

use super::bias::{csv_writer, finish_csv, write_row};
use super::svg::f6;
use super::{EvalReport, TrackerReport};
use crate::error::Result;
use crate::metrics::Metric;
use crate::model::View;

const VARIANTS: [(bool, &str); 2] = [(true, "weighted"), (false, "unweighted")];

fn cell(v: Option<f64>) -> String {
    v.map(f6).unwrap_or_default()
}

/// FPV mean, TPV mean and delta for one metric, blank where not computed.
fn metric_cells(t: &TrackerReport, weighted: bool, metric: Metric) -> [Option<f64>; 3] {
    if !t.metrics().contains(&metric) {
        return [None; 3];
    }
    let s = t.summary(weighted);
    [
        s.mean(View::Fpv, metric),
        s.mean(View::Tpv, metric),
        s.delta(metric).map(|d| d.delta),
    ]
}

/// One row per (variant, tracker) with FPV, TPV and delta columns for each
/// metric.
pub fn tables_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv_writer();
    let mut header = vec!["variant".to_string(), "tracker".to_string()];
    for m in Metric::ALL {
        for col in ["fpv", "tpv", "delta"] {
            header.push(format!("{}_{col}", m.name()));
        }
    }
    write_row(&mut w, &header)?;
    for (weighted, name) in VARIANTS {
        for t in &report.trackers {
            let mut row = vec![name.to_string(), t.label().to_string()];
            for m in Metric::ALL {
                row.extend(metric_cells(t, weighted, m).map(cell));
            }
            write_row(&mut w, &row)?;
        }
    }
    finish_csv(w)
}

fn md_num(v: Option<f64>, signed: bool) -> String {
    match v {
        Some(v) if signed => format!("{v:+.1}"),
        Some(v) => format!("{v:.1}"),
        None => "-".into(),
    }
}

/// Markdown summary: weighted and unweighted score tables, significance
/// tests and excluded units.
pub fn tables_md(report: &EvalReport) -> String {
    let mut out = String::new();
    for (weighted, _) in VARIANTS {
        let title = if weighted {
            "Scores weighted by sequence length"
        } else {
            "Unweighted scores"
        };
        let _ = writeln!(out, "## {title}\n");
        let mut header = String::from("| Tracker |");
        let mut rule = String::from("|---|");
        for m in Metric::ALL {
            let _ = write!(header, " {l} FPV | {l} TPV | Δ{l} |", l = m.label());
            rule.push_str("---:|---:|---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for t in &report.trackers {
            let mut row = format!("| {} |", t.label());
            for m in Metric::ALL {
                let [f, tp, d] = metric_cells(t, weighted, m);
                let _ = write!(
                    row,
                    " {} | {} | {} |",
                    md_num(f, false),
                    md_num(tp, false),
                    md_num(d, true)
                );
            }
            let _ = writeln!(out, "{row}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "## Paired t-test (FPV vs TPV)\n");
    let _ = writeln!(out, "| Tracker | Metric | n | t | p |\n|---|---|---:|---:|---:|");
    for t in &report.trackers {
        for test in &t.t_tests {
            match &test.test {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {:.3} | {:.4} |",
                        t.label(),
                        test.metric.label(),
                        r.n,
                        r.t,
                        r.p
                    );
                }
                None => {
                    let _ = writeln!(out, "| {} | {} | - | - | - |", t.label(), test.metric.label());
                }
            }
        }
    }
    let failures: usize = report.trackers.iter().map(|t| t.failures.len()).sum();
    if failures > 0 {
        let _ = writeln!(out, "\n## Excluded units\n");
        for t in &report.trackers {
            for f in &t.failures {
                let view = f.view.map(|v| format!(" ({v})")).unwrap_or_default();
                let _ = writeln!(out, "- {}: {}{}: {}", t.label(), f.pair_id, view, f.error);
            }
        }
    }
    out
}

/// Per-sequence scores of every tracker.
pub fn scores_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv_writer();
    write_row(
        &mut w,
        ["tracker", "pair", "view", "weight", "auc", "nps", "gsr", "j", "f", "jf"],
    )?;
    for t in &report.trackers {
        let metrics = t.metrics();
        for s in &t.scores {
            let mut row = vec![
                t.label().to_string(),
                s.pair_id.clone(),
                s.view.to_string(),
                s.weight.to_string(),
            ];
            row.extend(Metric::ALL.map(|m| {
                if metrics.contains(&m) {
                    f6(s.get(m))
                } else {
                    String::new()
                }
            }));
            write_row(&mut w, &row)?;
        }
    }
    finish_csv(w)
}

/// Attribute-restricted means per view and their difference, with frame
/// counts; unavailable or empty attributes carry a note instead.
pub fn attributes_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv_writer();
    let mut header: Vec<String> = ["tracker", "attribute", "view", "frames", "sequences"]
        .map(String::from)
        .to_vec();
    header.extend(Metric::ALL.map(|m| m.name().to_string()));
    header.push("note".into());
    write_row(&mut w, &header)?;
    for t in &report.trackers {
        let metrics = t.metrics();
        let value = |m: Metric, v: Option<&f64>| {
            if metrics.contains(&m) {
                cell(v.copied())
            } else {
                String::new()
            }
        };
        for entry in &t.attributes {
            let Some(b) = &entry.breakdown else {
                let mut row = vec![
                    t.label().to_string(),
                    entry.attribute.to_string(),
                    String::new(),
                    "0".into(),
                    "0".into(),
                ];
                row.extend(Metric::ALL.map(|_| String::new()));
                row.push(entry.note.clone().unwrap_or_default());
                write_row(&mut w, &row)?;
                continue;
            };
            for view in View::BOTH {
                let Some(vb) = b.view(view) else { continue };
                let mut row = vec![
                    t.label().to_string(),
                    entry.attribute.to_string(),
                    view.to_string(),
                    vb.frames.to_string(),
                    vb.sequences.to_string(),
                ];
                row.extend(Metric::ALL.map(|m| value(m, vb.means.get(&m))));
                row.push(String::new());
                write_row(&mut w, &row)?;
            }
            if !b.deltas.is_empty() {
                let mut row = vec![
                    t.label().to_string(),
                    entry.attribute.to_string(),
                    "delta".into(),
                    String::new(),
                    String::new(),
                ];
                row.extend(Metric::ALL.map(|m| value(m, b.deltas.get(&m))));
                row.push(String::new());
                write_row(&mut w, &row)?;
            }
        }
    }
    finish_csv(w)
}

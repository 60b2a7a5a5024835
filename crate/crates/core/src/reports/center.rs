use super::bias::{csv_writer, finish_csv, write_row};
use super::svg::{f6, Frame, Svg, PALETTE};
use super::EvalReport;
use crate::error::Result;
use crate::geometry::CenterDistanceBin;
use crate::model::View;

/// Per tracker, view and bin: weighted AUC (empty for bins without
/// frames), frame and sequence counts, and population share.
pub fn center_distance_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv_writer();
    write_row(
        &mut w,
        [
            "tracker",
            "view",
            "bin",
            "range",
            "auc",
            "frames",
            "sequences",
            "population",
        ],
    )?;
    for t in &report.trackers {
        for b in &t.center_distance {
            write_row(
                &mut w,
                [
                    t.label().to_string(),
                    b.view.to_string(),
                    b.bin.index().to_string(),
                    b.bin.label().to_string(),
                    b.auc.map(f6).unwrap_or_default(),
                    b.frames.to_string(),
                    b.sequences.to_string(),
                    f6(b.population),
                ],
            )?;
        }
    }
    finish_csv(w)
}

/// AUC against center-distance bin: solid lines for FPV, dashed for TPV.
/// Empty bins leave a gap and are marked on the axis.
pub fn center_distance_svg(report: &EvalReport) -> String {
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: 420.0,
        height: 320.0,
    };
    let bin_x = |b: CenterDistanceBin| frame.left + frame.width * (b.index() as f64 + 0.5) / 4.0;
    let legend_x = 520.0;
    let rows = report.trackers.len() * 2;
    let height = (frame.top + frame.height + 70.0).max(60.0 + 20.0 * rows as f64);
    let mut svg = Svg::new(780.0, height);
    svg.text(
        (frame.left + frame.width / 2.0, 24.0),
        15.0,
        "middle",
        "AUC by distance from frame center",
    );
    frame.draw(&mut svg, false);
    for b in CenterDistanceBin::ALL {
        svg.text((bin_x(b), frame.top + frame.height + 18.0), 11.0, "middle", b.label());
    }
    svg.text(
        (frame.left + frame.width / 2.0, frame.top + frame.height + 44.0),
        13.0,
        "middle",
        "distance from center (fraction of frame width)",
    );
    let mut row = 0;
    for (i, t) in report.trackers.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for view in View::BOTH {
            let dash = (view == View::Tpv).then_some("6 4");
            let bins: Vec<_> = t.center_distance.iter().filter(|b| b.view == view).collect();
            if bins.is_empty() {
                continue;
            }
            let mut segment: Vec<(f64, f64)> = Vec::new();
            for b in &bins {
                match b.auc {
                    Some(auc) => {
                        let p = (bin_x(b.bin), frame.y(auc));
                        svg.marker("circle", p, 3.0, color);
                        segment.push(p);
                    }
                    None => {
                        if segment.len() > 1 {
                            svg.polyline(&segment, color, 2.0, dash);
                        }
                        segment.clear();
                        svg.text((bin_x(b.bin), frame.y(0.0) - 6.0), 10.0, "middle", "empty");
                    }
                }
            }
            if segment.len() > 1 {
                svg.polyline(&segment, color, 2.0, dash);
            }
            let ly = frame.top + 10.0 + 20.0 * row as f64;
            svg.line((legend_x, ly), (legend_x + 28.0, ly), color, 2.0, dash);
            svg.text(
                (legend_x + 36.0, ly + 4.0),
                12.0,
                "start",
                &format!("{} {}", t.label(), view.as_str().to_uppercase()),
            );
            row += 1;
        }
    }
    svg.finish()
}

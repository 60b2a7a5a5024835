use serde::{Deserialize, Serialize};

use super::svg::{f6, Frame, Svg, PALETTE};
use super::EvalReport;
use crate::error::{Error, Result};
use crate::metrics::Metric;

const MARKERS: [&str; 4] = ["circle", "square", "triangle", "diamond"];

/// One tracker on a bias plot: TPV score on x, FPV score on y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasPlotPoint {
    pub tracker: String,
    pub tpv: f64,
    pub fpv: f64,
    pub delta: f64,
    pub marker: String,
}

impl BiasPlotPoint {
    pub fn new(tracker: impl Into<String>, tpv: f64, fpv: f64) -> Self {
        Self {
            tracker: tracker.into(),
            tpv,
            fpv,
            delta: fpv - tpv,
            marker: MARKERS[0].into(),
        }
    }

    /// Sign of the position relative to the diagonal: positive above
    /// (better on FPV), negative below.
    pub fn side(&self) -> std::cmp::Ordering {
        self.delta.partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Sort by descending delta (ties by label) and assign markers by rank.
fn rank(mut points: Vec<BiasPlotPoint>) -> Vec<BiasPlotPoint> {
    points.sort_by(|a, b| b.delta.total_cmp(&a.delta).then_with(|| a.tracker.cmp(&b.tracker)));
    for (i, p) in points.iter_mut().enumerate() {
        p.marker = MARKERS[i % MARKERS.len()].into();
    }
    points
}

/// Points of every tracker with both views scored on `metric`.
pub fn bias_points(report: &EvalReport, metric: Metric, weighted: bool) -> Vec<BiasPlotPoint> {
    rank(
        report
            .trackers
            .iter()
            .filter_map(|t| {
                let d = t.summary(weighted).delta(metric)?;
                Some(BiasPlotPoint {
                    tracker: t.label().to_string(),
                    tpv: d.tpv_mean,
                    fpv: d.fpv_mean,
                    delta: d.delta,
                    marker: String::new(),
                })
            })
            .collect(),
    )
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

pub(crate) fn write_row<I, S>(w: &mut csv::Writer<Vec<u8>>, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(csv_error)
}

/// `tracker,tpv,fpv,delta`, legend order.
pub fn bias_csv(points: &[BiasPlotPoint]) -> Result<String> {
    let mut w = csv_writer();
    write_row(&mut w, ["tracker", "tpv", "fpv", "delta"])?;
    for p in points {
        write_row(&mut w, [p.tracker.clone(), f6(p.tpv), f6(p.fpv), f6(p.delta)])?;
    }
    finish_csv(w)
}

pub fn read_bias_csv(text: &str) -> Result<Vec<BiasPlotPoint>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| csv_error("short row"))?
                .parse()
                .map_err(csv_error)
        };
        out.push(BiasPlotPoint {
            tracker: rec.get(0).unwrap_or_default().to_string(),
            tpv: num(1)?,
            fpv: num(2)?,
            delta: num(3)?,
            marker: String::new(),
        });
    }
    Ok(rank(out))
}

/// Scatter of `(TPV, FPV)` with the identity diagonal; the legend lists
/// trackers by descending delta.
pub fn bias_plot_svg(points: &[BiasPlotPoint], metric: Metric) -> String {
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: 440.0,
        height: 440.0,
    };
    let legend_x = 540.0;
    let height = (frame.top + frame.height + 60.0).max(60.0 + 22.0 * points.len() as f64);
    let mut svg = Svg::new(800.0, height);
    svg.text(
        (frame.left + frame.width / 2.0, 24.0),
        15.0,
        "middle",
        &format!("Bias plot ({})", metric.label()),
    );
    frame.draw(&mut svg, true);
    svg.line(
        (frame.x(0.0), frame.y(0.0)),
        (frame.x(100.0), frame.y(100.0)),
        "black",
        1.5,
        None,
    );
    svg.text(
        (frame.left + frame.width / 2.0, frame.top + frame.height + 40.0),
        13.0,
        "middle",
        &format!("TPV {}", metric.label()),
    );
    svg.text(
        (20.0, frame.top - 12.0),
        13.0,
        "start",
        &format!("FPV {}", metric.label()),
    );
    for (i, p) in points.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pos = (frame.x(p.tpv.clamp(0.0, 100.0)), frame.y(p.fpv.clamp(0.0, 100.0)));
        svg.marker(&p.marker, pos, 6.0, color);
        let ly = frame.top + 10.0 + 22.0 * i as f64;
        svg.marker(&p.marker, (legend_x, ly), 6.0, color);
        svg.text(
            (legend_x + 14.0, ly + 4.0),
            12.0,
            "start",
            &format!("{} ({:+.1})", p.tracker, p.delta),
        );
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn side_of_diagonal() {
        let below = BiasPlotPoint::new("generic", 42.8, 35.5);
        assert_eq!(below.side(), Ordering::Less);
        assert!((below.delta + 7.3).abs() < 1e-9);
        assert_eq!(BiasPlotPoint::new("x", 50.0, 50.0).side(), Ordering::Equal);
    }

    #[test]
    fn csv_round_trip() {
        let points = rank(vec![
            BiasPlotPoint::new("a, quoted \"one\"", 42.8, 35.5),
            BiasPlotPoint::new("b", 10.25, 60.0),
            BiasPlotPoint::new("c", 50.0, 50.0),
        ]);
        let text = bias_csv(&points).unwrap();
        assert!(text.starts_with("tracker,tpv,fpv,delta\n"));
        let back = read_bias_csv(&text).unwrap();
        assert_eq!(
            back.iter().map(|p| &p.tracker).collect::<Vec<_>>(),
            ["b", "c", "a, quoted \"one\""]
        );
        for (a, b) in points.iter().zip(&back) {
            assert_eq!((a.tpv, a.fpv, &a.marker), (b.tpv, b.fpv, &b.marker));
            assert!((a.delta - b.delta).abs() < 1e-6);
        }
        assert_eq!(bias_csv(&back).unwrap(), text);
    }

    #[test]
    fn svg_places_points() {
        let points = rank(vec![
            BiasPlotPoint::new("g", 42.8, 35.5),
            BiasPlotPoint::new("d", 50.0, 50.0),
        ]);
        let svg = bias_plot_svg(&points, Metric::Auc);
        assert_eq!(svg, bias_plot_svg(&points, Metric::Auc));
        assert!(svg.contains(r#"cx="290.000000" cy="260.000000""#), "{svg}");
        // x = 70 + 0.428 * 440, y = 40 + 440 - 0.355 * 440, as a square of side 12
        assert!(svg.contains(r#"x="252.320000" y="317.800000""#), "{svg}");
        // Legend: the on-diagonal tracker (delta 0) comes first.
        assert!(svg.find("d (+0.0)").unwrap() < svg.find("g (-7.3)").unwrap());
        assert!(svg.contains(r#"<line x1="70.000000" y1="480.000000" x2="510.000000" y2="40.000000" stroke="black""#));
    }
}

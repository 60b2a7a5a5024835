use std::fmt::Write;

pub(crate) const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub(crate) fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Minimal SVG writer with fixed-precision coordinates.
pub(crate) struct Svg {
    buf: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            w = f6(width),
            h = f6(height)
        );
        let _ = writeln!(
            buf,
            r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
            f6(width),
            f6(height)
        );
        Self { buf }
    }

    pub fn line(&mut self, (x1, y1): (f64, f64), (x2, y2): (f64, f64), stroke: &str, width: f64, dash: Option<&str>) {
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(
            self.buf,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            f6(x1),
            f6(y1),
            f6(x2),
            f6(y2),
            f6(width)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", f6(*x), f6(*y))).collect();
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(
            self.buf,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            pts.join(" "),
            f6(width)
        );
    }

    pub fn rect(&mut self, (x, y): (f64, f64), (w, h): (f64, f64), stroke: &str, fill: &str) {
        let _ = writeln!(
            self.buf,
            r#"<rect x="{}" y="{}" width="{}" height="{}" stroke="{stroke}" fill="{fill}"/>"#,
            f6(x),
            f6(y),
            f6(w),
            f6(h)
        );
    }

    /// Filled marker centred on `(x, y)`.
    pub fn marker(&mut self, shape: &str, (x, y): (f64, f64), r: f64, fill: &str) {
        let _ = match shape {
            "square" => writeln!(
                self.buf,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                f6(x - r),
                f6(y - r),
                f6(2.0 * r),
                f6(2.0 * r)
            ),
            "triangle" => writeln!(
                self.buf,
                r#"<polygon points="{},{} {},{} {},{}" fill="{fill}"/>"#,
                f6(x),
                f6(y - r),
                f6(x + r),
                f6(y + r),
                f6(x - r),
                f6(y + r)
            ),
            "diamond" => writeln!(
                self.buf,
                r#"<polygon points="{},{} {},{} {},{} {},{}" fill="{fill}"/>"#,
                f6(x),
                f6(y - r),
                f6(x + r),
                f6(y),
                f6(x),
                f6(y + r),
                f6(x - r),
                f6(y)
            ),
            _ => writeln!(
                self.buf,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
                f6(x),
                f6(y),
                f6(r)
            ),
        };
    }

    pub fn text(&mut self, (x, y): (f64, f64), size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.buf,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{anchor}">{}</text>"#,
            f6(x),
            f6(y),
            f6(size),
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Square plot frame mapping `[0, 100]` on both axes.
pub(crate) struct Frame {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub fn x(&self, v: f64) -> f64 {
        self.left + v / 100.0 * self.width
    }

    pub fn y(&self, v: f64) -> f64 {
        self.top + self.height - v / 100.0 * self.height
    }

    /// Border, grid and y-axis ticks every 20 units.
    pub fn draw(&self, svg: &mut Svg, x_ticks: bool) {
        for k in 0..=5 {
            let v = k as f64 * 20.0;
            svg.line(
                (self.left, self.y(v)),
                (self.left + self.width, self.y(v)),
                "#e5e5e5",
                1.0,
                None,
            );
            svg.text((self.left - 8.0, self.y(v) + 4.0), 11.0, "end", &format!("{v:.0}"));
            if x_ticks {
                svg.line(
                    (self.x(v), self.top),
                    (self.x(v), self.top + self.height),
                    "#e5e5e5",
                    1.0,
                    None,
                );
                svg.text(
                    (self.x(v), self.top + self.height + 16.0),
                    11.0,
                    "middle",
                    &format!("{v:.0}"),
                );
            }
        }
        svg.rect((self.left, self.top), (self.width, self.height), "black", "none");
    }
}

//! Minimal static SVG line charts. CSV is the authoritative output; these
//! renderings exist so sweep results can be eyeballed without extra tooling.

use std::fmt::Write as _;

pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

impl Chart {
    pub fn render(&self) -> String {
        let map = |v: f64, log: bool| if log { v.abs().max(1e-300).log10() } else { v };

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                xs.push(map(x, self.log_x));
                ys.push(map(y, self.log_y));
            }
        }
        let (x0, x1) = bounds(&xs);
        let (y0, y1) = bounds(&ys);
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
        );
        let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
        let _ = writeln!(
            out,
            r##"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"##,
            WIDTH / 2.0,
            xml_escape(&self.title)
        );

        // axes and grid
        let _ = writeln!(
            out,
            r##"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"##,
            l = MARGIN_L,
            r = WIDTH - MARGIN_R,
            t = MARGIN_T,
            b = HEIGHT - MARGIN_B
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let lx = tick_label(if self.log_x { 10f64.powf(fx) } else { fx });
            let ly = tick_label(if self.log_y { 10f64.powf(fy) } else { fy });
            let _ = writeln!(
                out,
                r##"<line x1="{x}" y1="{t}" x2="{x}" y2="{b}" stroke="#dddddd"/><line x1="{l}" y1="{y}" x2="{r}" y2="{y}" stroke="#dddddd"/>"##,
                x = px(fx),
                y = py(fy),
                l = MARGIN_L,
                r = WIDTH - MARGIN_R,
                t = MARGIN_T,
                b = HEIGHT - MARGIN_B
            );
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{lx}</text>"##,
                px(fx),
                HEIGHT - MARGIN_B + 18.0
            );
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{ly}</text>"##,
                MARGIN_L - 6.0,
                py(fy) + 4.0
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"##,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            xml_escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r##"<text x="16" y="{y}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {y})">{label}</text>"##,
            y = HEIGHT / 2.0,
            label = xml_escape(&self.y_label)
        );

        for (si, s) in self.series.iter().enumerate() {
            let mut path = String::new();
            for &(x, y) in &s.points {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                let cx = px(map(x, self.log_x));
                let cy = py(map(y, self.log_y));
                if path.is_empty() {
                    let _ = write!(path, "M{cx:.2},{cy:.2}");
                } else {
                    let _ = write!(path, " L{cx:.2},{cy:.2}");
                }
                let _ = writeln!(
                    out,
                    r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{}"/>"##,
                    s.color
                );
            }
            let _ = writeln!(
                out,
                r##"<path d="{path}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
                s.color
            );
            let ly = MARGIN_T + 14.0 * si as f64;
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"##,
                WIDTH - MARGIN_R - 190.0,
                ly,
                s.color,
                WIDTH - MARGIN_R - 175.0,
                ly + 9.0,
                xml_escape(&s.name)
            );
        }
        let _ = writeln!(out, "</svg>");
        out
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e4 || a < 1e-3) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

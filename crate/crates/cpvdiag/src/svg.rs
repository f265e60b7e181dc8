//! Minimal self-contained SVG plotting: line charts for IV curves and power
//! traces, bar charts for histograms. Fixed canvas, fixed palette, fixed
//! decimal widths, so a rerun emits identical bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 6] = [
    "#1f6fb2", "#d55e00", "#2a9d52", "#9467bd", "#c4336b", "#6a6a6a",
];

/// One named trace.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo > hi {
            // nothing plottable, keep a unit box
            return Range { lo: 0.0, hi: 1.0 };
        }
        if lo == hi {
            // widen a degenerate range so the scale stays invertible
            let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.05 };
            return Range { lo: lo - pad, hi: hi + pad };
        }
        Range { lo, hi }
    }

    fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Tick spacing: largest of 1/2/5 x 10^k giving at most `max_ticks` steps.
fn tick_step(span: f64, max_ticks: usize) -> f64 {
    let raw = span / max_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if mag * m >= raw {
            return mag * m;
        }
    }
    mag * 10.0
}

fn ticks(r: Range) -> Vec<f64> {
    let step = tick_step(r.span(), 8);
    let first = (r.lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = first;
    while t <= r.hi + step * 1e-9 {
        // snap -0.0 and accumulated error
        out.push((t / step).round() * step);
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 10.0 {
        format!("{v:.1}")
    } else if a >= 0.1 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: Range,
    y: Range,
}

impl Frame {
    fn sx(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x.lo) / self.x.span() * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.y.lo) / self.y.span() * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn chart_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        esc(title)
    );
    s
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    for t in ticks(frame.x) {
        let px = frame.sx(t);
        let _ = writeln!(
            s,
            "<line x1=\"{px:.1}\" y1=\"{y0:.1}\" x2=\"{px:.1}\" y2=\"{y1:.1}\" stroke=\"#dddddd\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            y0 + 16.0,
            fmt_tick(t)
        );
    }
    for t in ticks(frame.y) {
        let py = frame.sy(t);
        let _ = writeln!(
            s,
            "<line x1=\"{x0:.1}\" y1=\"{py:.1}\" x2=\"{x1:.1}\" y2=\"{py:.1}\" stroke=\"#dddddd\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            x0 - 6.0,
            py + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        "<rect x=\"{x0:.1}\" y=\"{y1:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(y_label)
    );
}

/// Multi-series line chart. Non-finite points break the polyline.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame {
        x: Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut s = chart_open(title);
    axes(&mut s, &frame, x_label, y_label);
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut runs: Vec<String> = Vec::new();
        for (x, y) in &ser.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(d, "{:.1},{:.1} ", frame.sx(*x), frame.sy(*y));
            } else if !d.is_empty() {
                runs.push(std::mem::take(&mut d));
            }
        }
        if !d.is_empty() {
            runs.push(d);
        }
        for run in runs {
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>",
                run.trim_end()
            );
        }
        let ly = MARGIN_T + 16.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"3\"/>",
            MARGIN_L + 10.0,
            MARGIN_L + 34.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            MARGIN_L + 40.0,
            ly + 4.0,
            esc(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Histogram from (lo, hi, count) bins.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bins: &[(f64, f64, u32)]) -> String {
    let max_count = bins.iter().map(|b| b.2).max().unwrap_or(0) as f64;
    let frame = Frame {
        x: Range::of(bins.iter().flat_map(|b| [b.0, b.1].into_iter())),
        y: Range::of([0.0, max_count.max(1.0)].into_iter()),
    };
    let mut s = chart_open(title);
    axes(&mut s, &frame, x_label, y_label);
    for (lo, hi, count) in bins {
        let x = frame.sx(*lo);
        let w = (frame.sx(*hi) - x).max(0.0);
        let y = frame.sy(*count as f64);
        let h = frame.sy(0.0) - y;
        let _ = writeln!(
            s,
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" fill=\"{}\" stroke=\"white\" stroke-width=\"1\"/>",
            PALETTE[0]
        );
    }
    s.push_str("</svg>\n");
    s
}

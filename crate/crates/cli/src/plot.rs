//! Minimal deterministic SVG line and scatter plots.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use drsplit::linalg::ComplexScalar;
use drsplit::SolveTrace;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"];

/// A named sequence plotted against its index.
pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn linear(lo: f64, hi: f64) -> Self {
        let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self { lo, hi, log: false }
    }

    /// Decade-aligned log axis covering `[lo, hi]`.
    fn log(lo: f64, hi: f64) -> Self {
        let lo = lo.log10().floor();
        let hi = hi.log10().ceil().max(lo + 1.0);
        Self { lo, hi, log: true }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0);
            let mut e = self.lo;
            let mut out = Vec::new();
            while e <= self.hi + 1e-9 {
                out.push((10f64.powf(e), format!("1e{e}")));
                e += step;
            }
            out
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format_tick(v))
                })
                .collect()
        }
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

struct Canvas {
    out: String,
    x: Axis,
    y: Axis,
}

impl Canvas {
    fn new(title: &str, x: Axis, y: Axis, x_label: &str, y_label: &str) -> Self {
        let mut c = Self { out: String::new(), x, y };
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let _ = writeln!(
            c.out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(c.out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(c.out, r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{}</text>"#, LEFT + pw / 2.0, escape(title));
        let _ = writeln!(c.out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for (v, label) in x.ticks() {
            let px = c.px(v);
            let _ = writeln!(c.out, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(c.out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0);
        }
        for (v, label) in y.ticks() {
            let py = c.py(v);
            let _ = writeln!(c.out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
            let _ = writeln!(c.out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 8.0, py + 4.0);
        }
        let _ = writeln!(c.out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, escape(x_label));
        let _ = writeln!(
            c.out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(y_label)
        );
        c
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.frac(v) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.frac(v) * (HEIGHT - TOP - BOTTOM)
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let _ = writeln!(self.out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
    }

    fn legend(&mut self, index: usize, label: &str, color: &str) {
        let y = TOP + 12.0 + 16.0 * index as f64;
        let x = WIDTH - RIGHT + 10.0;
        let _ = writeln!(self.out, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#, x + 18.0);
        let _ = writeln!(self.out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 22.0, y + 4.0, escape(label));
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn positive_range<'a>(values: impl Iterator<Item = &'a f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite() && **v > 0.0)
        .fold(None, |acc, &v| Some(acc.map_or((v, v), |(lo, hi): (f64, f64)| (lo.min(v), hi.max(v)))))
}

/// Index-vs-value lines on a logarithmic value axis. Nonpositive and
/// non-finite values are skipped.
pub fn log_lines_svg(title: &str, y_label: &str, series: &[Series]) -> String {
    let len = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let (lo, hi) = positive_range(series.iter().flat_map(|s| s.values.iter())).unwrap_or((1.0, 10.0));
    let mut canvas = Canvas::new(title, Axis::linear(0.0, len.saturating_sub(1) as f64), Axis::log(lo, hi), "iteration k", y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<(f64, f64)> = s
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite() && **v > 0.0)
            .map(|(k, &v)| (k as f64, v))
            .collect();
        canvas.polyline(&points, color);
        canvas.legend(i, s.label, color);
    }
    canvas.finish()
}

/// Objective value per iteration, one line per run.
pub fn objective_svg(runs: &[(&str, &SolveTrace)]) -> String {
    let columns: Vec<Vec<f64>> = runs.iter().map(|(_, t)| t.records.iter().map(|r| r.objective).collect()).collect();
    let series: Vec<Series> = runs.iter().zip(&columns).map(|((l, _), v)| Series { label: l, values: v }).collect();
    log_lines_svg("objective", "F(x^k)", &series)
}

/// Primal and dual stepsizes of one run.
pub fn stepsize_svg(trace: &SolveTrace) -> String {
    let t: Vec<f64> = trace.records.iter().map(|r| r.t).collect();
    let s: Vec<f64> = trace.records.iter().map(|r| r.s).collect();
    log_lines_svg("stepsizes", "stepsize", &[Series { label: "t", values: &t }, Series { label: "s", values: &s }])
}

/// Eigenvalues in the complex plane with the circle `|λ − ½| = ½`.
pub fn eigen_svg(eigenvalues: &[ComplexScalar]) -> String {
    let mut canvas = Canvas::new("eigenvalues", Axis::linear(-0.1, 1.1), Axis::linear(-0.6, 0.6), "Re λ", "Im λ");
    let circle: Vec<(f64, f64)> = (0..=180)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / 180.0;
            (0.5 + 0.5 * a.cos(), 0.5 * a.sin())
        })
        .collect();
    canvas.polyline(&circle, "#7f7f7f");
    canvas.legend(0, "|λ − ½| = ½", "#7f7f7f");
    for l in eigenvalues.iter().filter(|l| l.re.is_finite() && l.im.is_finite()) {
        let _ = writeln!(
            canvas.out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
            canvas.px(l.re),
            canvas.py(l.im),
            PALETTE[0]
        );
    }
    canvas.finish()
}

pub fn write_svg(svg: &str, path: &Path) -> Result<()> {
    std::fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use drsplit::TraceRecord;

    fn trace(n: usize) -> SolveTrace {
        SolveTrace {
            records: (0..n)
                .map(|k| TraceRecord { k, objective: 1.0 / (k + 1) as f64, t: 1.0, s: 2.0, residual: 0.0 })
                .collect(),
        }
    }

    #[test]
    fn empty_inputs_give_axes_only() {
        for svg in [objective_svg(&[]), stepsize_svg(&SolveTrace::default()), eigen_svg(&[])] {
            assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
            assert!(svg.contains("<rect x="));
            assert!(!svg.contains("<circle"));
        }
        assert!(!objective_svg(&[]).contains("<polyline"));
    }

    #[test]
    fn deterministic_bytes() {
        let tr = trace(50);
        assert_eq!(objective_svg(&[("a", &tr)]), objective_svg(&[("a", &tr)]));
        let eig = [ComplexScalar::new(0.2, 0.1), ComplexScalar::new(0.9, -0.2)];
        assert_eq!(eigen_svg(&eig), eigen_svg(&eig));
    }

    #[test]
    fn eigen_plot_has_reference_circle_and_points() {
        let svg = eigen_svg(&[ComplexScalar::new(0.5, 0.0), ComplexScalar::new(1.0, 0.0)]);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("|λ − ½| = ½"));
    }

    #[test]
    fn skips_nonpositive_values() {
        let v = [1.0, 0.0, -1.0, f64::NAN, 2.0];
        let svg = log_lines_svg("x", "y", &[Series { label: "v", values: &v }]);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.matches(',').count(), 2);
    }
}

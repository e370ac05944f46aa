//! Static SVG line plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use alefem::verify::convergence_rate;
use alefem::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: [f64; 4] = [60.0, 170.0, 40.0, 55.0]; // left, right, top, bottom
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Append the fitted log–log slope to each legend entry.
    pub annotate_slopes: bool,
}

/// Which CSV columns to plot and how to group rows into series.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvPlot {
    pub x: String,
    pub y: String,
    pub group_by: Vec<String>,
    pub axes: Axes,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn transform(v: f64, log: bool) -> Option<f64> {
    match log {
        true if v > 0.0 => Some(v.log10()),
        true => None,
        false => Some(v),
    }
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

/// Slope of the least-squares log–log fit of a series, when it has at least
/// three positive points.
pub fn series_slope(s: &Series) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = s.points.iter().copied().unzip();
    convergence_rate(&y, &x).ok().map(|r| r.slope)
}

/// One polyline per series, axes with end-point ticks, and a legend.
pub fn render_svg(series: &[Series], axes: &Axes) -> String {
    let tx: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| Some((transform(x, axes.log_x)?, transform(y, axes.log_y)?)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = tx.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let [ml, mr, mt, mb] = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        ml + pw / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, anchor_x) in [(x0, ml), (x1, ml + pw)] {
        let _ = writeln!(
            out,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{}</text>"#,
            mt + ph + 16.0,
            fmt_tick(v, axes.log_x)
        );
    }
    for (v, anchor_y) in [(y0, mt + ph), (y1, mt)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            ml - 4.0,
            anchor_y + 4.0,
            fmt_tick(v, axes.log_y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(&axes.y_label)
    );
    for (k, (s, pts)) in series.iter().zip(&tx).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let mut label = s.label.clone();
        if axes.annotate_slopes {
            if let Some(slope) = series_slope(s) {
                let _ = write!(label, " (slope {slope:.2})");
            }
        }
        let ly = mt + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
            ml + pw + 10.0,
            ly - 4.0,
            ml + pw + 28.0,
            ly - 4.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, ml + pw + 32.0, escape(&label));
    }
    out.push_str("</svg>\n");
    out
}

/// Groups CSV rows into series and renders them.
pub fn emit_svg(csv_text: &str, plot: &CsvPlot) -> Result<String> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("malformed CSV: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("CSV has no column '{name}'")))
    };
    let (xi, yi) = (col(&plot.x)?, col(&plot.y)?);
    let gi: Vec<usize> = plot.group_by.iter().map(|g| col(g)).collect::<Result<_>>()?;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Config(format!("malformed CSV: {e}")))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Config(format!("non-numeric value '{}'", &rec[i])))
        };
        let key = gi.iter().map(|&i| &rec[i]).collect::<Vec<_>>().join(" ");
        groups.entry(key).or_default().push((num(xi)?, num(yi)?));
    }
    let series: Vec<Series> = groups
        .into_iter()
        .map(|(label, points)| Series { label, points })
        .collect();
    Ok(render_svg(&series, &plot.axes))
}

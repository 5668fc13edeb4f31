//! Static SVG figures: node radar charts, elbow and discovery curves,
//! driver scatter plots, and screening bar charts.
//!
//! Every renderer is a pure function from data to SVG text. Coordinates are
//! rounded to 4 decimals before formatting, which both keeps diffs small and
//! erases the sub-1e-10 platform variation of trigonometric library calls,
//! so identical inputs produce byte-identical files everywhere.

use std::fmt::Write;

use crate::cluster::ElbowPoint;
use crate::discovery::DiscoveryCurve;
use crate::matrix::DataMatrix;
use crate::scenario::{LockLevel, NodeSummary, OutputDescriptor};
use crate::screening::{Rule, ScreeningReport};
use crate::{Error, Result};

/// Fixed cluster palette; label `i` always maps to `PALETTE[i % 8]`, so the
/// same storyline keeps its color across figures and runs.
pub const PALETTE: [&str; 8] = [
    "#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860", "#DA8BC3", "#8C8C8C",
];

pub fn palette_color(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

const GRID: &str = "#DDDDDD";
const INK: &str = "#333333";
const MUTED: &str = "#8C8C8C";
const CHART_W: f64 = 560.0;
const CHART_H: f64 = 360.0;

/// Format a coordinate rounded to 4 decimals, with negative zero folded
/// into zero so the sign of vanishing trig terms cannot leak into the file.
fn fmt4(v: f64) -> String {
    let r = (v * 1e4).round() / 1e4;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r}")
}

fn fmt_tick(v: f64) -> String {
    format!("{}", super::sig6(v))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        let mut body = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
             viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n",
            w = fmt4(width),
            h = fmt4(height)
        );
        writeln!(
            body,
            "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>",
            fmt4(width),
            fmt4(height)
        )
        .expect("string write");
        Canvas { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        writeln!(
            self.body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            fmt4(x1),
            fmt4(y1),
            fmt4(x2),
            fmt4(y2),
            fmt4(width)
        )
        .expect("string write");
    }

    fn dashed_line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        writeln!(
            self.body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
            fmt4(x1),
            fmt4(y1),
            fmt4(x2),
            fmt4(y2)
        )
        .expect("string write");
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, stroke: &str) {
        writeln!(
            self.body,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\"/>",
            fmt4(cx),
            fmt4(cy),
            fmt4(r)
        )
        .expect("string write");
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        writeln!(
            self.body,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>",
            fmt4(x),
            fmt4(y),
            fmt4(w),
            fmt4(h)
        )
        .expect("string write");
    }

    fn polygon(&mut self, points: &[(f64, f64)], fill: &str, stroke: &str, width: f64) {
        writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            points_attr(points),
            fmt4(width)
        )
        .expect("string write");
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            points_attr(points),
            fmt4(width)
        )
        .expect("string write");
    }

    fn path(&mut self, d: &str, fill: &str, extra: &str) {
        writeln!(self.body, "<path d=\"{d}\" fill=\"{fill}\"{extra}/>").expect("string write");
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, fill: &str, content: &str) {
        writeln!(
            self.body,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"{}\" fill=\"{fill}\">{}</text>",
            fmt4(x),
            fmt4(y),
            fmt4(size),
            xml_escape(content)
        )
        .expect("string write");
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn points_attr(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|&(x, y)| format!("{},{}", fmt4(x), fmt4(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn path_from(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        let op = if i == 0 { 'M' } else { 'L' };
        write!(d, "{op} {} {} ", fmt4(x), fmt4(y)).expect("string write");
    }
    d.push('Z');
    d
}

/// Data extent padded by 5% on each side; degenerate extents widen by 5% of
/// the magnitude (or 0.5 around zero) so scales never collapse.
fn padded_extent(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        (0.05 * lo.abs()).max(0.5)
    };
    (lo - pad, hi + pad)
}

struct Scale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        self.r0 + (v - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)
    }
}

struct Frame {
    x: Scale,
    y: Scale,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(x_extent: (f64, f64), y_extent: (f64, f64)) -> Self {
        let (left, right, top, bottom) = (64.0, CHART_W - 16.0, 16.0, CHART_H - 48.0);
        Frame {
            x: Scale {
                d0: x_extent.0,
                d1: x_extent.1,
                r0: left,
                r1: right,
            },
            y: Scale {
                d0: y_extent.0,
                d1: y_extent.1,
                r0: bottom,
                r1: top,
            },
            left,
            right,
            top,
            bottom,
        }
    }

    fn draw_axes(
        &self,
        canvas: &mut Canvas,
        x_ticks: &[f64],
        y_ticks: &[f64],
        x_label: &str,
        y_label: &str,
    ) {
        for &t in y_ticks {
            let y = self.y.map(t);
            canvas.line(self.left, y, self.right, y, GRID, 1.0);
            canvas.text(self.left - 8.0, y + 4.0, "end", 11.0, INK, &fmt_tick(t));
        }
        for &t in x_ticks {
            let x = self.x.map(t);
            canvas.line(x, self.bottom, x, self.bottom + 4.0, INK, 1.0);
            canvas.text(x, self.bottom + 18.0, "middle", 11.0, INK, &fmt_tick(t));
        }
        canvas.line(self.left, self.bottom, self.right, self.bottom, INK, 1.0);
        canvas.line(self.left, self.top, self.left, self.bottom, INK, 1.0);
        canvas.text(
            (self.left + self.right) / 2.0,
            CHART_H - 10.0,
            "middle",
            12.0,
            INK,
            x_label,
        );
        canvas.text(self.left - 8.0, self.top - 4.0, "start", 12.0, INK, y_label);
    }

    fn legend(&self, canvas: &mut Canvas, entries: &[(&str, String)]) {
        let x = self.left + 12.0;
        for (i, (color, label)) in entries.iter().enumerate() {
            let y = self.top + 12.0 + 18.0 * i as f64;
            canvas.rect(x, y - 8.0, 12.0, 12.0, color);
            canvas.text(x + 18.0, y + 2.0, "start", 11.0, INK, label);
        }
    }
}

fn spread_ticks(values: &[f64], max_ticks: usize) -> Vec<f64> {
    if values.len() <= max_ticks {
        return values.to_vec();
    }
    let step = values.len().div_ceil(max_ticks);
    values.iter().copied().step_by(step).collect()
}

fn even_ticks(extent: (f64, f64), n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| extent.0 + (extent.1 - extent.0) * i as f64 / n as f64)
        .collect()
}

/// Appearance knobs for [`render_radar_svg`].
#[derive(Debug, Clone)]
pub struct RadarStyle {
    /// Edge length of the square canvas.
    pub size: f64,
    /// Palette slot for the node's band (typically the storyline label).
    pub color_index: usize,
    /// Draw concentric gridlines behind the band.
    pub grid: bool,
}

impl Default for RadarStyle {
    fn default() -> Self {
        RadarStyle {
            size: 420.0,
            color_index: 0,
            grid: true,
        }
    }
}

fn unit_position(v: f64, range: (f64, f64)) -> f64 {
    if range.1 > range.0 {
        ((v - range.0) / (range.1 - range.0)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

fn lock_glyph(canvas: &mut Canvas, x: f64, y: f64, lock: LockLevel) {
    const R: f64 = 5.0;
    match lock {
        LockLevel::Open => canvas.circle(x, y, R, "white", INK),
        LockLevel::Partial => {
            canvas.circle(x, y, R, "white", INK);
            let d = format!(
                "M {} {} A {} {} 0 0 1 {} {} Z",
                fmt4(x - R),
                fmt4(y),
                fmt4(R),
                fmt4(R),
                fmt4(x + R),
                fmt4(y)
            );
            canvas.path(&d, INK, "");
        }
        LockLevel::Locked => canvas.circle(x, y, R, INK, INK),
    }
}

fn validate_radar_inputs(
    summary: &NodeSummary,
    descriptors: &[OutputDescriptor],
    initial_ranges: &[(f64, f64)],
) -> Result<usize> {
    let m = descriptors.len();
    if m == 0 {
        return Err(Error::NoColumns);
    }
    for len in [
        summary.ranges.len(),
        summary.locks.len(),
        initial_ranges.len(),
    ] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: len,
            });
        }
    }
    Ok(m)
}

/// Horizontal range bars used when fewer than 3 axes make a polygon radar
/// meaningless: one row per output, a gray track for the full normalized
/// range and a colored band for the node's share of it.
fn render_range_bars(
    summary: &NodeSummary,
    descriptors: &[OutputDescriptor],
    initial_ranges: &[(f64, f64)],
    style: &RadarStyle,
) -> String {
    let m = descriptors.len();
    let size = style.size;
    let mut canvas = Canvas::new(size, size);
    let color = palette_color(style.color_index);
    canvas.text(
        12.0,
        24.0,
        "start",
        14.0,
        INK,
        &format!("\u{3a3} = {:.3}", summary.sigma),
    );
    let track_x0 = size * 0.3;
    let track_x1 = size - 56.0;
    let row_height = 26.0;
    let y0 = (size - row_height * m as f64) / 2.0;
    for i in 0..m {
        let y = y0 + row_height * i as f64;
        let lo = unit_position(summary.ranges[i].0, initial_ranges[i]);
        let hi = unit_position(summary.ranges[i].1, initial_ranges[i]);
        canvas.text(
            track_x0 - 10.0,
            y + 12.0,
            "end",
            11.0,
            INK,
            &descriptors[i].name,
        );
        canvas.rect(track_x0, y + 4.0, track_x1 - track_x0, 10.0, "#EEEEEE");
        let band_w = ((hi - lo) * (track_x1 - track_x0)).max(1.0);
        canvas.rect(
            track_x0 + lo * (track_x1 - track_x0),
            y + 4.0,
            band_w,
            10.0,
            color,
        );
        lock_glyph(&mut canvas, track_x1 + 20.0, y + 9.0, summary.locks[i]);
    }
    canvas.finish()
}

/// Draw one node as a radar figure: one axis per output, each normalized to
/// the full data range, with the node's min and max polygons enclosing a
/// shaded band. Lock glyphs at the axis tips show per-output flexibility
/// (open circle, half-filled, filled) and the decision-space fraction is
/// annotated in the corner. With fewer than 3 outputs the figure falls back
/// to horizontal range bars; zero outputs is an error.
pub fn render_radar_svg(
    summary: &NodeSummary,
    descriptors: &[OutputDescriptor],
    initial_ranges: &[(f64, f64)],
    style: &RadarStyle,
) -> Result<String> {
    let m = validate_radar_inputs(summary, descriptors, initial_ranges)?;
    if m < 3 {
        return Ok(render_range_bars(
            summary,
            descriptors,
            initial_ranges,
            style,
        ));
    }
    let size = style.size;
    let cx = size / 2.0;
    let cy = size / 2.0;
    let radius = size * 0.333;
    let color = palette_color(style.color_index);
    let tip = |i: usize, r: f64| -> (f64, f64) {
        let angle = -std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / m as f64;
        (cx + r * angle.cos(), cy + r * angle.sin())
    };
    let ring = |level: f64| -> Vec<(f64, f64)> { (0..m).map(|i| tip(i, radius * level)).collect() };

    let mut canvas = Canvas::new(size, size);
    if style.grid {
        for level in [0.25, 0.5, 0.75] {
            canvas.polygon(&ring(level), "none", GRID, 1.0);
        }
    }
    canvas.polygon(&ring(1.0), "none", MUTED, 1.0);
    for i in 0..m {
        let (x, y) = tip(i, radius);
        canvas.line(cx, cy, x, y, GRID, 1.0);
    }

    let max_poly: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            tip(
                i,
                radius * unit_position(summary.ranges[i].1, initial_ranges[i]),
            )
        })
        .collect();
    let min_poly: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            tip(
                i,
                radius * unit_position(summary.ranges[i].0, initial_ranges[i]),
            )
        })
        .collect();
    let band = format!("{} {}", path_from(&max_poly), path_from(&min_poly));
    canvas.path(
        &band,
        color,
        " fill-opacity=\"0.35\" fill-rule=\"evenodd\" stroke=\"none\"",
    );
    canvas.polygon(&max_poly, "none", color, 1.5);
    canvas.polygon(&min_poly, "none", color, 1.5);

    for (i, (descriptor, &lock)) in descriptors.iter().zip(&summary.locks).enumerate() {
        let (gx, gy) = tip(i, radius + 16.0);
        lock_glyph(&mut canvas, gx, gy, lock);
        let (lx, ly) = tip(i, radius + 34.0);
        canvas.text(lx, ly + 4.0, "middle", 11.0, INK, &descriptor.name);
    }
    canvas.text(
        12.0,
        24.0,
        "start",
        14.0,
        INK,
        &format!("\u{3a3} = {:.3}", summary.sigma),
    );
    Ok(canvas.finish())
}

/// Chart of total intra-cluster distance against k: one series straight out
/// of k-Means and, where the curve carries them, a second series for the
/// distance after tree-based re-ordering.
pub fn render_elbow(curve: &[ElbowPoint]) -> Result<String> {
    if curve.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let mut canvas = Canvas::new(CHART_W, CHART_H);
    let ks: Vec<f64> = curve.iter().map(|p| p.k as f64).collect();
    let x_extent = padded_extent(ks.iter().copied());
    let y_extent = padded_extent(
        curve
            .iter()
            .flat_map(|p| std::iter::once(p.d_initial).chain(p.d_reordered)),
    );
    let frame = Frame::new(x_extent, y_extent);
    frame.draw_axes(
        &mut canvas,
        &spread_ticks(&ks, 12),
        &even_ticks(y_extent, 4),
        "k",
        "total intra-cluster distance d",
    );
    let initial: Vec<(f64, f64)> = curve
        .iter()
        .map(|p| (frame.x.map(p.k as f64), frame.y.map(p.d_initial)))
        .collect();
    if initial.len() > 1 {
        canvas.polyline(&initial, PALETTE[0], 1.5);
    }
    for &(x, y) in &initial {
        canvas.circle(x, y, 3.5, PALETTE[0], "white");
    }
    let reordered: Vec<(f64, f64)> = curve
        .iter()
        .filter_map(|p| {
            p.d_reordered
                .map(|d| (frame.x.map(p.k as f64), frame.y.map(d)))
        })
        .collect();
    let mut legend = vec![(PALETTE[0], "d initial".to_string())];
    if !reordered.is_empty() {
        if reordered.len() > 1 {
            canvas.polyline(&reordered, PALETTE[1], 1.5);
        }
        for &(x, y) in &reordered {
            canvas.rect(x - 3.0, y - 3.0, 6.0, 6.0, PALETTE[1]);
        }
        legend.push((PALETTE[1], "d re-ordered".to_string()));
    }
    frame.legend(&mut canvas, &legend);
    Ok(canvas.finish())
}

/// Chart of the discovery sweep: interpretability, training coverage, and
/// cross-validated coverage against the leaf budget, all on a [0, 1] axis.
pub fn render_discovery(curve: &DiscoveryCurve) -> Result<String> {
    if curve.entries.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let mut canvas = Canvas::new(CHART_W, CHART_H);
    let budgets: Vec<f64> = curve.entries.iter().map(|e| e.max_leaves as f64).collect();
    let x_extent = padded_extent(budgets.iter().copied());
    let y_extent = (0.0, 1.0);
    let frame = Frame::new(x_extent, y_extent);
    frame.draw_axes(
        &mut canvas,
        &spread_ticks(&budgets, 12),
        &even_ticks(y_extent, 4),
        "leaf budget",
        "score",
    );
    type Accessor = fn(&crate::discovery::DiscoveryEntry) -> f64;
    let series: [(&str, Accessor); 3] = [
        ("interpretability", |e| e.interpretability),
        ("coverage", |e| e.coverage),
        ("cv coverage", |e| e.cv_coverage),
    ];
    let mut legend = Vec::new();
    for (slot, (name, value)) in series.iter().enumerate() {
        let points: Vec<(f64, f64)> = curve
            .entries
            .iter()
            .map(|e| (frame.x.map(e.max_leaves as f64), frame.y.map(value(e))))
            .collect();
        if points.len() > 1 {
            canvas.polyline(&points, PALETTE[slot], 1.5);
        }
        for &(x, y) in &points {
            canvas.circle(x, y, 3.0, PALETTE[slot], "white");
        }
        legend.push((PALETTE[slot], name.to_string()));
    }
    frame.legend(&mut canvas, &legend);
    Ok(canvas.finish())
}

/// Scatter of scenarios over exactly two uncertain inputs, colored by
/// storyline label with a fixed palette and one legend entry per label.
pub fn render_scatter(
    points: &DataMatrix,
    names: (&str, &str),
    labels: &[usize],
) -> Result<String> {
    if points.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: points.n_cols(),
        });
    }
    if labels.len() != points.n_rows() {
        return Err(Error::RowCountMismatch {
            left: points.n_rows(),
            right: labels.len(),
        });
    }
    if points.n_rows() == 0 {
        return Err(Error::EmptyCurve);
    }
    let mut canvas = Canvas::new(CHART_W, CHART_H);
    let x_extent = padded_extent(points.column(0));
    let y_extent = padded_extent(points.column(1));
    let frame = Frame::new(x_extent, y_extent);
    frame.draw_axes(
        &mut canvas,
        &even_ticks(x_extent, 4),
        &even_ticks(y_extent, 4),
        names.0,
        names.1,
    );
    for (row, &label) in labels.iter().enumerate() {
        let p = points.row(row);
        canvas.circle(
            frame.x.map(p[0]),
            frame.y.map(p[1]),
            2.5,
            palette_color(label),
            "none",
        );
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let legend: Vec<(&str, String)> = distinct
        .iter()
        .map(|&l| (palette_color(l), format!("Storyline {l}")))
        .collect();
    frame.legend(&mut canvas, &legend);
    Ok(canvas.finish())
}

/// Horizontal bar chart of a screening report: candidates in ranked order
/// top to bottom, bar length proportional to range, kept candidates in
/// color, rejected ones gray, and the threshold marked when the rule has
/// one.
pub fn render_screening(report: &ScreeningReport) -> Result<String> {
    if report.ranking.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let mut canvas = Canvas::new(CHART_W, CHART_H);
    let x_extent = padded_extent(
        report
            .ranking
            .iter()
            .map(|c| c.range)
            .chain(std::iter::once(0.0)),
    );
    let left = 140.0;
    let right = CHART_W - 24.0;
    let top = 20.0;
    let bottom = CHART_H - 40.0;
    let x = Scale {
        d0: x_extent.0,
        d1: x_extent.1,
        r0: left,
        r1: right,
    };
    let n = report.ranking.len();
    let row = (bottom - top) / n as f64;
    let bar_h = (row * 0.6).min(22.0);
    for (i, candidate) in report.ranking.iter().enumerate() {
        let y = top + row * i as f64 + (row - bar_h) / 2.0;
        let kept = report.selected.contains(&candidate.name);
        let fill = if kept { PALETTE[0] } else { MUTED };
        canvas.rect(
            x.map(0.0),
            y,
            x.map(candidate.range) - x.map(0.0),
            bar_h,
            fill,
        );
        canvas.text(
            left - 8.0,
            y + bar_h / 2.0 + 4.0,
            "end",
            11.0,
            INK,
            &candidate.name,
        );
        canvas.text(
            x.map(candidate.range) + 6.0,
            y + bar_h / 2.0 + 4.0,
            "start",
            10.0,
            INK,
            &fmt_tick(candidate.range),
        );
    }
    canvas.line(x.map(0.0), top, x.map(0.0), bottom, INK, 1.0);
    if let Rule::Threshold(t) = report.rule {
        canvas.dashed_line(x.map(t), top, x.map(t), bottom, "#C44E52");
        canvas.text(
            x.map(t),
            bottom + 16.0,
            "middle",
            11.0,
            "#C44E52",
            &format!("threshold {}", fmt_tick(t)),
        );
    }
    canvas.text(
        (left + right) / 2.0,
        CHART_H - 10.0,
        "middle",
        12.0,
        INK,
        "range of outcomes",
    );
    Ok(canvas.finish())
}

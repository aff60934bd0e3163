//! Static SVG line plots. Output depends only on the input data: fixed
//! viewport, fixed palette, fixed number formatting.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Result};

use crate::table::{Table, BENCH_HEADER, GRAPHENE_HEADER, HUBBARD_AGGREGATE_HEADER, HUBBARD_HEADER};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| usable(*v, log)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        }
        if hi - lo < 1e-300 {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i32;
            (self.lo as i32..=self.hi as i32)
                .filter(|e| (e - self.lo as i32) % step == 0)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|k| {
                    let v = k as f64 * step;
                    (v, format!("{v:.decimals$}"))
                })
                .collect()
        }
    }
}

fn usable(v: f64, log: bool) -> bool {
    v.is_finite() && (!log || v > 0.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(style: &PlotStyle, series: &[Series]) -> String {
    let xs = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), style.log_x);
    let ys = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), style.log_y);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + xs.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ys.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&style.title)
    );
    let _ = writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>"##);

    for (v, label) in xs.ticks() {
        let x = px(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0
        );
    }
    for (v, label) in ys.ticks() {
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&style.y_label)
    );

    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        // Split into runs of drawable points so gaps stay visible.
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(x, y) in &ser.points {
            if usable(x, style.log_x) && usable(y, style.log_y) {
                runs.last_mut().expect("non-empty").push((px(x), py(y)));
            } else if !runs.last().expect("non-empty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Recognizes the CSV schema and picks the curves worth drawing.
pub fn series_from_table(table: &Table) -> Result<(PlotStyle, Vec<Series>)> {
    if table.has_header(&BENCH_HEADER) {
        let (m, d, t, y) = (table.column("method")?, table.column("dim")?, table.column("t_norm")?, table.column("l2_mean")?);
        let mut curves: BTreeMap<(String, usize), Vec<(f64, f64)>> = BTreeMap::new();
        let mut order = Vec::new();
        for (i, row) in table.rows.iter().enumerate() {
            let key = (row[m].clone(), row[d].parse::<usize>()?);
            if !curves.contains_key(&key) {
                order.push(key.clone());
            }
            curves.entry(key).or_default().push((table.f64_at(i, t)?, table.f64_at(i, y)?));
        }
        let series = order
            .into_iter()
            .map(|k| Series { label: format!("{} d={}", k.0, k.1), points: curves.remove(&k).unwrap_or_default() })
            .collect();
        let style = PlotStyle {
            title: "Distance to the exact propagator".into(),
            x_label: "t‖H‖".into(),
            y_label: "mean l2".into(),
            ..Default::default()
        };
        return Ok((style, series));
    }
    if table.has_header(&GRAPHENE_HEADER) {
        let mut std = Vec::new();
        let mut var = Vec::new();
        let mut last = None;
        for i in 0..table.rows.len() {
            let p = table.f64_at(i, 0)?;
            if last == Some(p) {
                continue;
            }
            last = Some(p);
            std.push((p, table.f64_at(i, 1)?));
            var.push((p, table.f64_at(i, 2)?));
        }
        let style = PlotStyle {
            title: "Relative mismatch of the low-energy doublet".into(),
            x_label: "p / γ".into(),
            y_label: "Δ".into(),
            log_y: true,
            ..Default::default()
        };
        return Ok((style, vec![named("standard", std), named("variational", var)]));
    }
    if table.has_header(&HUBBARD_AGGREGATE_HEADER) {
        let mut cols: Vec<Series> = ["first_half_std", "first_half_var", "upper_half_std", "upper_half_var"]
            .iter()
            .map(|n| named(n, Vec::new()))
            .collect();
        for i in 0..table.rows.len() {
            let x = table.f64_at(i, 0)?;
            for (k, c) in cols.iter_mut().enumerate() {
                c.points.push((x, table.f64_at(i, k + 1)?));
            }
        }
        let style = PlotStyle {
            title: "Averaged relative error of non-zero levels".into(),
            x_label: "t / U".into(),
            y_label: "relative error".into(),
            log_x: true,
            log_y: true,
        };
        return Ok((style, cols));
    }
    if table.has_header(&HUBBARD_HEADER) {
        let (li, es, ev) = (table.column("level_index")?, table.column("err_std")?, table.column("err_var")?);
        let mut std = Vec::new();
        let mut var = Vec::new();
        for (i, row) in table.rows.iter().enumerate() {
            if row[li] == "0" {
                let x = table.f64_at(i, 0)?;
                std.push((x, table.f64_at(i, es)?));
                var.push((x, table.f64_at(i, ev)?));
            }
        }
        let style = PlotStyle {
            title: "Relative error of the lowest level".into(),
            x_label: "t / U".into(),
            y_label: "relative error".into(),
            log_x: true,
            log_y: true,
        };
        return Ok((style, vec![named("standard", std), named("variational", var)]));
    }
    bail!("unrecognized CSV columns: {}", table.header.join(","))
}

fn named(label: &str, points: Vec<(f64, f64)>) -> Series {
    Series { label: label.to_string(), points }
}

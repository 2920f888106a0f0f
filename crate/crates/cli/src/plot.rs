//! Plain SVG line plots of experiment runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::experiment::RunRecord;
use crate::io;
use crate::run::FINAL_FILE;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;

/// Writes `<label>.svg` into `dir` for every run of the record: the data in light grey,
/// `u` solid and `v` dashed against a `[0, 1]` axis on the right.
pub fn plot(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    let data_path = dir.join(&record.data_file);
    let finals: Vec<PathBuf> = record
        .runs
        .iter()
        .map(|r| dir.join(&r.label).join(FINAL_FILE))
        .collect();
    let missing: Vec<PathBuf> = std::iter::once(&data_path)
        .chain(&finals)
        .filter(|p| !p.exists())
        .cloned()
        .collect();
    if record.runs.is_empty() {
        return Ok(Vec::new());
    }
    if !missing.is_empty() {
        return Err(HarnessError::MissingArtifacts(missing));
    }
    let g = io::read_signal_csv(&data_path)?;
    let mut written = Vec::new();
    for (run, path) in record.runs.iter().zip(&finals) {
        let (u, v) = io::read_state_csv(path)?;
        let xs: Vec<f64> = u.nodes().collect();
        let lo = g.min().min(u.min());
        let hi = g.max().max(u.max());
        let title = format!("{} ({}, λ = {})", run.label, run.model.name(), record.lambda);
        let svg = render(&title, &xs, g.samples(), u.samples(), v.as_deref(), (lo, hi));
        let out = dir.join(format!("{}.svg", run.label));
        io::write_text(&out, &svg)?;
        written.push(out);
    }
    Ok(written)
}

fn render(title: &str, xs: &[f64], g: &[f64], u: &[f64], v: Option<&[f64]>, range: (f64, f64)) -> String {
    let (lo, hi) = if range.1 > range.0 { range } else { (range.0 - 0.5, range.0 + 0.5) };
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64, lo: f64, hi: f64| HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black" stroke-width="0.5"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        MARGIN - 12.0,
        escape(title)
    );
    for y in [lo, hi] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{y:.3}</text>"#,
            MARGIN - 4.0,
            py(y, lo, hi) + 3.0
        );
    }
    let _ = writeln!(s, "{}", path(xs, g, |y| py(y, lo, hi), &px, r##"stroke="#bbbbbb" stroke-width="1""##));
    let _ = writeln!(s, "{}", path(xs, u, |y| py(y, lo, hi), &px, r##"stroke="#1f4e9c" stroke-width="1.5""##));
    if let Some(v) = v {
        let _ = writeln!(
            s,
            "{}",
            path(xs, v, |y| py(y, 0.0, 1.0), &px, r##"stroke="#c0392b" stroke-width="1" stroke-dasharray="5,3""##)
        );
        for y in [0.0, 1.0] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10">v={y}</text>"#,
                WIDTH - MARGIN + 4.0,
                py(y, 0.0, 1.0) + 3.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn path(xs: &[f64], ys: &[f64], py: impl Fn(f64) -> f64, px: &impl Fn(f64) -> f64, style: &str) -> String {
    let mut d = String::new();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(x), py(y));
    }
    format!(r#"<path d="{d}" fill="none" {style}/>"#)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

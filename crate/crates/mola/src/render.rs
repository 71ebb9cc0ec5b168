//! SVG renders and chart data from the CSVs of a run directory.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mola_core::analysis::TernaryPoint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MolaError, Result};
use crate::io::{self, write_atomic};
use crate::manifest::{Manifest, MANIFEST};
use crate::pipeline::{read_series_csv, SERIES};

/// Most markers drawn in one ternary panel.
pub const TERNARY_MARKER_CAP: usize = 5000;
const SUBSAMPLE_SEED: u64 = 0x7e7a;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `hue` in radians, saturation and value in `[0, 1]`.
pub fn hsv_to_rgb(hue: f64, sat: f64, val: f64) -> (u8, u8, u8) {
    let h = (hue.rem_euclid(2.0 * PI) / (2.0 * PI)) * 6.0;
    let c = val * sat.clamp(0.0, 1.0);
    let x = c * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = val - c;
    let q = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    (q(r), q(g), q(b))
}

fn svg_open(w: f64, h: f64) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n")
}

/// Scatter of compositions in the triangle, at most [`TERNARY_MARKER_CAP`]
/// markers chosen at random (fixed seed) when there are more points.
pub fn ternary_svg(points: &[TernaryPoint]) -> String {
    let idx: Vec<usize> = if points.len() > TERNARY_MARKER_CAP {
        let mut rng = ChaCha8Rng::seed_from_u64(SUBSAMPLE_SEED);
        let mut v = rand::seq::index::sample(&mut rng, points.len(), TERNARY_MARKER_CAP).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..points.len()).collect()
    };
    let (size, pad) = (400.0, 20.0);
    let h = size * SQRT3 / 2.0;
    let tx = |x: f64| pad + x * size;
    let ty = |y: f64| pad + h - y * size;
    let mut s = svg_open(size + 2.0 * pad, h + 2.0 * pad);
    let _ = writeln!(
        s,
        "<polygon points=\"{},{} {},{} {},{}\" fill=\"none\" stroke=\"black\"/>",
        tx(0.0),
        ty(0.0),
        tx(1.0),
        ty(0.0),
        tx(0.5),
        ty(SQRT3 / 2.0)
    );
    for (label, x, y, dy) in [("0", 0.0, 0.0, 14.0), ("1", 1.0, 0.0, 14.0), ("2", 0.5, SQRT3 / 2.0, -6.0)] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{label}</text>", tx(x), ty(y) + dy);
    }
    for k in idx {
        let p = &points[k];
        let _ = writeln!(s, "<circle class=\"m\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"1.5\" fill-opacity=\"0.4\"/>", tx(p.x), ty(p.y));
    }
    s.push_str("</svg>\n");
    s
}

/// One square per parcel: hue from `arg <z>`, saturation from `|<z>|`.
pub fn gray_area_svg(rows: &[(usize, usize, f64, f64, f64, f64)]) -> String {
    let cell = 10.0;
    let nr = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
    let nc = rows.iter().map(|r| r.1).max().map_or(0, |m| m + 1);
    let mut s = svg_open(nc as f64 * cell, nr as f64 * cell);
    for &(i, j, _, _, modulus, arg) in rows {
        let (r, g, b) = hsv_to_rgb(arg, modulus, 1.0);
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>",
            j as f64 * cell,
            i as f64 * cell
        );
    }
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 6] = ["#d95f02", "#7570b3", "#1b9e77", "#e7298a", "#66a61e", "#e6ab02"];

/// Polylines of `(x, y)` series on shared axes.
fn line_chart(series: &[(String, Vec<(f64, f64)>)], x_label: &str, y_label: &str) -> String {
    let (w, h, pad) = (480.0, 300.0, 40.0);
    let all = series.iter().flat_map(|s| s.1.iter());
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
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = svg_open(w, h);
    let _ = writeln!(
        s,
        "<path d=\"M{pad},{pad} V{} H{}\" fill=\"none\" stroke=\"black\"/>",
        h - pad,
        w - pad
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{x_label} [{x0}, {x1}]</text>", w / 2.0, h - 8.0);
    let _ = writeln!(s, "<text x=\"8\" y=\"{}\" font-size=\"12\">{y_label} [{y0:.3}, {y1:.3}]</text>", pad - 10.0);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>", d.join(" "));
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{name}</text>", w - pad + 4.0, pad + 14.0 * k as f64);
    }
    s.push_str("</svg>\n");
    s
}

fn dirs_in(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut v: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| MolaError::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    v.sort();
    Ok(v)
}

/// Renders every SVG and chart table a run directory supports and refreshes
/// its manifest. Works from CSVs only, so re-rendering gives identical files.
pub fn render_reports(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let series_path = run_dir.join(SERIES);
    let single = run_dir.join("samples.csv");
    if !series_path.exists() && !single.exists() {
        return Err(MolaError::MissingInputs {
            dir: run_dir.into(),
            files: vec![SERIES.into(), "points/ps_*/ternary.csv".into(), "samples.csv (single-point run)".into()],
        });
    }
    let out = run_dir.join("reports");
    let mut written = Vec::new();
    let mut emit = |name: String, text: String| -> Result<()> {
        let p = out.join(name);
        write_atomic(&p, text.as_bytes())?;
        written.push(p);
        Ok(())
    };

    let mut panels: Vec<(String, PathBuf)> = Vec::new();
    if series_path.exists() {
        let series = read_series_csv(&series_path)?;
        let types = series.counts.first().map_or(0, Vec::len);
        let mut csv = String::from("P_S");
        for t in 0..types {
            let _ = write!(csv, ",f_{t}");
        }
        csv.push('\n');
        let mut lines: Vec<(String, Vec<(f64, f64)>)> = (0..types).map(|t| (format!("type {t}"), Vec::new())).collect();
        for (p, c) in series.priorities.iter().zip(&series.counts) {
            let total: f64 = c.iter().sum();
            let _ = write!(csv, "{p}");
            for (t, v) in c.iter().enumerate() {
                let f = if total > 0.0 { v / total } else { 0.0 };
                let _ = write!(csv, ",{f}");
                lines[t].1.push((*p, f));
            }
            csv.push('\n');
        }
        emit("fractions.csv".into(), csv)?;
        emit("fractions.svg".into(), line_chart(&lines, "P_S", "fraction"))?;
        for d in dirs_in(&run_dir.join("points"))? {
            let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            panels.push((name, d));
        }
    } else {
        panels.push(("run".into(), run_dir.to_path_buf()));
    }

    for (name, d) in &panels {
        let tern = d.join("ternary.csv");
        if tern.exists() {
            emit(format!("ternary_{name}.svg"), ternary_svg(&io::read_ternary_csv(&tern)?))?;
        }
        let mut curves = Vec::new();
        for x in 0.. {
            let p = d.join(format!("landau_{x}.csv"));
            if !p.exists() {
                break;
            }
            let pts = io::read_landau_csv(&p)?.into_iter().map(|(b, f, _)| (b as f64, f)).collect();
            curves.push((format!("N_{x}"), pts));
        }
        if !curves.is_empty() {
            emit(format!("free_energy_{name}.svg"), line_chart(&curves, "N_X", "F"))?;
        }
    }

    let mut gray = dirs_in(&run_dir.join("grayarea"))?;
    if run_dir.join("grayarea.csv").exists() {
        gray.push(run_dir.join("grayarea.csv"));
    }
    for p in gray.into_iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
        let stem = p.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        emit(format!("{stem}.svg"), gray_area_svg(&io::read_gray_area_csv(&p)?))?;
    }

    if run_dir.join(MANIFEST).exists() {
        let old = Manifest::read(run_dir)?;
        let mut m = Manifest::scan(run_dir, &old.command, old.config_fingerprint.clone())?;
        m.status = old.status;
        m.error = old.error;
        m.warnings = old.warnings;
        m.write(run_dir)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mola_core::analysis::{ternary_project, ParcelTally, GrayAreaMap};
    use mola_core::{LandUseGrid, LandUseType};

    #[test]
    fn hue_wheel() {
        assert_eq!(hsv_to_rgb(0.0, 1.0, 1.0), (255, 0, 0));
        assert_eq!(hsv_to_rgb(2.0 * PI / 3.0, 1.0, 1.0), (0, 255, 0));
        assert_eq!(hsv_to_rgb(-2.0 * PI / 3.0, 1.0, 1.0), (0, 0, 255));
        assert_eq!(hsv_to_rgb(1.0, 0.0, 1.0), (255, 255, 255));
    }

    #[test]
    fn ternary_cap() {
        let pts: Vec<_> = (0..12_000usize).map(|k| ternary_project(&[k % 901, 900 - k % 901, 0], 900).unwrap()).collect();
        let svg = ternary_svg(&pts);
        assert_eq!(svg.matches("class=\"m\"").count(), TERNARY_MARKER_CAP);
        assert_eq!(svg, ternary_svg(&pts));
        assert_eq!(ternary_svg(&pts[..10]).matches("class=\"m\"").count(), 10);
    }

    #[test]
    fn unanimous_gray_area_is_fully_saturated() {
        let mut tally = ParcelTally::new(3, 3);
        let mut g = LandUseGrid::uniform(3, 3, 3, LandUseType(0)).unwrap();
        g.set(1, 1, LandUseType(2)).unwrap();
        for _ in 0..5 {
            tally.add(&g).unwrap();
        }
        let map = GrayAreaMap::from_tally(&tally).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        fs::write(&p, io::gray_area_csv(&map)).unwrap();
        let svg = gray_area_svg(&io::read_gray_area_csv(&p).unwrap());
        assert_eq!(svg.matches("<rect").count(), 9);
        // full saturation: every fill has a zero channel
        for fill in svg.split("fill=\"#").skip(1) {
            let hex = &fill[..6];
            let ch: Vec<u8> = (0..3).map(|k| u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).unwrap()).collect();
            assert!(ch.contains(&0) && ch.contains(&255), "{hex}");
        }
    }

    #[test]
    fn empty_dir_lists_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let e = render_reports(dir.path()).unwrap_err().to_string();
        assert!(e.contains("series.csv") && e.contains("samples.csv"), "{e}");
    }
}

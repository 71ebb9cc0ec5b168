//! Stand-alone stages that work on files from earlier runs.

use std::fs;
use std::path::{Path, PathBuf};

use mola_core::analysis::{detect_flashpoints, gray_area_map, ternary_project, FlashpointScan};
use mola_core::nucleation::{predict_flashpoint_priority, BoundaryMetric, FlashpointPrediction};
use mola_core::{LandUseType, SuitabilityField};

use crate::error::{MolaError, Result};
use crate::io::{self, write_atomic};
use crate::manifest::Manifest;
use crate::pipeline::read_series_csv;
use crate::render::{gray_area_svg, ternary_svg};

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| MolaError::io(out, e))
}

/// Flashpoints of a `series.csv`, written as `flashpoints.csv`.
pub fn flashpoints_command(series: &Path, alpha: f64, out: &Path) -> Result<FlashpointScan> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MolaError::config("alpha", format!("{alpha} is outside (0, 1)")));
    }
    prepare(out)?;
    let s = read_series_csv(series)?;
    let scan = detect_flashpoints(&s, alpha)?;
    write_atomic(&out.join("flashpoints.csv"), io::flashpoints_csv(&scan.flashpoints).as_bytes())?;
    let mut m = Manifest::scan(out, "flashpoints", None)?;
    m.warnings = scan.warnings.iter().map(|w| format!("type {} absent on interval {}; skipped", w.ty, w.index)).collect();
    m.write(out)?;
    Ok(scan)
}

/// Gray-area map of snapshot files `a`, pooled with `b` when non-empty.
pub fn grayarea_command(a: &[PathBuf], b: &[PathBuf], out: &Path) -> Result<PathBuf> {
    if a.is_empty() {
        return Err(MolaError::config("a", "at least one snapshot is required"));
    }
    prepare(out)?;
    let load = |ps: &[PathBuf]| ps.iter().map(|p| io::read_grid_csv(p, 3)).collect::<Result<Vec<_>>>();
    let (ga, gb) = (load(a)?, load(b)?);
    let map = gray_area_map(&ga, (!gb.is_empty()).then_some(gb.as_slice()))?;
    let path = out.join("grayarea.csv");
    let csv = io::gray_area_csv(&map);
    write_atomic(&path, csv.as_bytes())?;
    write_atomic(&out.join("grayarea.svg"), gray_area_svg(&io::read_gray_area_csv(&path)?).as_bytes())?;
    Manifest::scan(out, "grayarea", None)?.write(out)?;
    Ok(path)
}

/// Ternary coordinates of every row of a samples file.
pub fn ternary_command(samples: &Path, out: &Path) -> Result<PathBuf> {
    prepare(out)?;
    let rows = io::read_samples_csv(samples)?;
    let sites = rows.first().map(|(_, r)| r.use_counts.iter().sum()).ok_or_else(|| MolaError::format(samples, "no samples"))?;
    let pts = rows.iter().map(|(_, r)| ternary_project(&r.use_counts, sites)).collect::<Result<Vec<_>, _>>()?;
    let path = out.join("ternary.csv");
    write_atomic(&path, io::ternary_csv(&pts).as_bytes())?;
    write_atomic(&out.join("ternary.svg"), ternary_svg(&pts).as_bytes())?;
    Manifest::scan(out, "ternary", None)?.write(out)?;
    Ok(path)
}

/// Which boundary measures to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    Exact,
    Edge,
    Both,
}

impl std::str::FromStr for PredictionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" | "moore" => Ok(PredictionMode::Exact),
            "edge" => Ok(PredictionMode::Edge),
            "both" => Ok(PredictionMode::Both),
            other => Err(format!("unknown mode `{other}` (exact|edge|both)")),
        }
    }
}

/// Predicted flashpoint priority of flipping the masked region.
pub fn nucleation_command(
    mask: &Path,
    field: &SuitabilityField,
    from: u8,
    to: u8,
    compactness: f64,
    mode: PredictionMode,
    out: &Path,
) -> Result<Vec<FlashpointPrediction>> {
    prepare(out)?;
    let mask = io::read_mask_csv(mask)?;
    let metrics: &[BoundaryMetric] = match mode {
        PredictionMode::Exact => &[BoundaryMetric::MoorePairs],
        PredictionMode::Edge => &[BoundaryMetric::EdgeCount],
        PredictionMode::Both => &[BoundaryMetric::MoorePairs, BoundaryMetric::EdgeCount],
    };
    let preds = metrics
        .iter()
        .map(|&m| predict_flashpoint_priority(&mask, field, LandUseType(from), LandUseType(to), compactness, m))
        .collect::<Result<Vec<_>, _>>()?;
    write_atomic(&out.join("prediction.csv"), io::prediction_csv(&preds).as_bytes())?;
    Manifest::scan(out, "nucleation", None)?.write(out)?;
    Ok(preds)
}

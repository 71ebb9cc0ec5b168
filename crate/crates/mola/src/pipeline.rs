//! Priority sweeps and single-point runs on disk.
//!
//! Layout of a sweep directory:
//!
//! ```text
//! effective_config.toml   suitability.csv   series.csv   flashpoints.csv
//! stable_intervals.csv    manifest.json
//! points/ps_<P_S>/        samples.csv landau_<X>.csv ternary.csv tally.csv point.json
//! grayarea/fp<k>_{below,above,combined}.csv
//! ```
//!
//! `point.json` is written last, so a point directory without it is
//! incomplete and is recomputed on resume.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mola_core::analysis::{
    build_histogram, detect_flashpoints, landau_surface, optimal_counts_with, samples_near, ternary_project, Axis,
    FlashpointScan, GrayAreaMap, OptimalCounts, OptimalOptions, ParcelTally, UseCountSeries,
};
use mola_core::SuitabilityField;
use serde::{Deserialize, Serialize};

use crate::config::{load_config, RunConfig, EFFECTIVE_CONFIG};
use crate::error::{MolaError, Result};
use crate::io::{self, write_atomic};
use crate::manifest::{Manifest, RunStatus};
use crate::replicate::{run_replicates, ReplicateSet};

pub const POINT_SUMMARY: &str = "point.json";
pub const SERIES: &str = "series.csv";
pub const FLASHPOINTS: &str = "flashpoints.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub counts: Vec<usize>,
    pub f: f64,
    pub samples: u64,
}

/// Analysis of one priority point, stored as `point.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub p_s: f64,
    pub replicates: usize,
    pub samples: usize,
    /// Global minimum of each type's Landau surface.
    pub per_type: Vec<usize>,
    /// Counts used for the series: the deepest joint peak when degenerate.
    pub representative: Vec<usize>,
    pub degenerate: bool,
    pub modes: Vec<ModeSummary>,
    /// Samples within the gray-area tolerance of `representative`.
    pub gray_area_samples: u64,
}

/// Options that do not affect results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the machine default.
    pub parallelism: usize,
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub series: UseCountSeries,
    pub scan: FlashpointScan,
    pub points: Vec<PointSummary>,
    /// Points computed in this invocation (the rest were resumed).
    pub computed: usize,
}

pub fn point_dir(run_dir: &Path, p_s: f64) -> PathBuf {
    run_dir.join("points").join(format!("ps_{p_s:.9}"))
}

/// Summarizes a replicate set and writes its files into `dir`.
pub fn write_point(
    dir: &Path,
    set: &ReplicateSet,
    config: &RunConfig,
    p_s: f64,
    keep_snapshots: bool,
) -> Result<(PointSummary, Option<ParcelTally>)> {
    let types = config.grid.types;
    let sites = config.grid.rows * config.grid.cols;
    fs::create_dir_all(dir).map_err(|e| MolaError::io(dir, e))?;
    write_atomic(&dir.join("samples.csv"), io::samples_csv(types, set.records()).as_bytes())?;

    let pooled = set.pooled();
    for x in 0..types {
        let surface = landau_surface(&build_histogram(&pooled, Axis::Type(x))?)?;
        write_atomic(&dir.join(format!("landau_{x}.csv")), io::landau_csv(&surface).as_bytes())?;
    }
    let opts = OptimalOptions { smoothing_window: config.analysis.smoothing_window, ..OptimalOptions::for_sites(sites) };
    let opt = optimal_counts_with(&pooled, &opts)?;
    let representative = opt.representative().to_vec();

    let mut tally = None;
    let mut gray_area_samples = 0;
    if types == 3 {
        let pts = pooled.iter().map(|r| ternary_project(&r.use_counts, sites)).collect::<Result<Vec<_>, _>>()?;
        write_atomic(&dir.join("ternary.csv"), io::ternary_csv(&pts).as_bytes())?;
        let all: Vec<_> = set.records().map(|(_, r)| r).collect();
        let near = samples_near(&pooled, &representative, config.gray_area_tolerance());
        let mut t = ParcelTally::new(config.grid.rows, config.grid.cols);
        for k in near {
            if let Some(g) = &all[k].snapshot {
                t.add(g)?;
            }
        }
        gray_area_samples = t.samples();
        if t.samples() > 0 {
            write_atomic(&dir.join("tally.csv"), io::tally_csv(&t).as_bytes())?;
            tally = Some(t);
        }
    }
    if keep_snapshots {
        for (seed, r) in set.records() {
            if let Some(g) = &r.snapshot {
                let p = dir.join("snapshots").join(format!("seed{seed}_sweep{}.csv", r.sweep_index));
                write_atomic(&p, io::grid_csv(g).as_bytes())?;
            }
        }
    }
    let summary = summarize(p_s, set, &opt, representative, gray_area_samples);
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&dir.join(POINT_SUMMARY), json.as_bytes())?;
    Ok((summary, tally))
}

fn summarize(p_s: f64, set: &ReplicateSet, opt: &OptimalCounts, representative: Vec<usize>, gray: u64) -> PointSummary {
    PointSummary {
        p_s,
        replicates: set.runs.len(),
        samples: set.record_count(),
        per_type: opt.per_type.clone(),
        representative,
        degenerate: opt.degenerate,
        modes: opt.modes.iter().map(|m| ModeSummary { counts: m.counts.clone(), f: m.f, samples: m.samples }).collect(),
        gray_area_samples: gray,
    }
}

fn read_point(dir: &Path) -> Result<Option<PointSummary>> {
    let path = dir.join(POINT_SUMMARY);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| MolaError::io(&path, e))?;
    Ok(Some(serde_json::from_str(&text)?))
}

fn run_point(config: &RunConfig, field: &SuitabilityField, p_s: f64, seeds: &[u64], run: &RunOptions, dir: &Path) -> Result<PointSummary> {
    let mut options = config.anneal_options();
    // the gray-area tally needs the patterns; they are dropped after this point
    options.keep_snapshots |= config.grid.types == 3;
    let set = run_replicates(
        field,
        &config.priorities_at(p_s)?,
        &config.schedule(),
        seeds,
        config.sampler.kind(),
        &options,
        run.parallelism,
    )?;
    Ok(write_point(dir, &set, config, p_s, config.seeds.keep_snapshots)?.0)
}

pub fn series_csv(points: &[PointSummary]) -> String {
    let types = points.first().map_or(0, |p| p.representative.len());
    let mut s = String::from("n,P_S,replicates");
    for t in 0..types {
        let _ = write!(s, ",N_{t}");
    }
    s.push_str(",degenerate\n");
    for (n, p) in points.iter().enumerate() {
        let _ = write!(s, "{n},{},{}", p.p_s, p.replicates);
        for c in &p.representative {
            let _ = write!(s, ",{c}");
        }
        let _ = writeln!(s, ",{}", p.degenerate as u8);
    }
    s
}

pub fn read_series_csv(path: &Path) -> Result<UseCountSeries> {
    let text = fs::read_to_string(path).map_err(|e| MolaError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| MolaError::format(path, "empty series"))?.split(',').collect();
    let types = header.len().saturating_sub(4);
    let ok = types > 0
        && header[..3] == ["n", "P_S", "replicates"]
        && header[header.len() - 1] == "degenerate"
        && (0..types).all(|t| header[3 + t] == format!("N_{t}"));
    if !ok {
        return Err(MolaError::format(path, "expected header `n,P_S,replicates,N_0,...,degenerate`"));
    }
    let (mut ps, mut counts, mut reps) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || MolaError::format(path, format!("row {}: malformed", k + 1));
        if f.len() != header.len() {
            return Err(bad());
        }
        ps.push(f[1].parse::<f64>().map_err(|_| bad())?);
        reps.push(f[2].parse::<usize>().map_err(|_| bad())?);
        counts.push(f[3..3 + types].iter().map(|v| v.parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?);
    }
    UseCountSeries::new(ps, counts, reps).map_err(|e| MolaError::format(path, e.to_string()))
}

/// Runs of priorities whose optimal counts stay within `alpha` of each other,
/// with the counts at the start of each run.
pub fn stable_intervals_csv(points: &[PointSummary], scan: &FlashpointScan) -> String {
    let types = points.first().map_or(0, |p| p.representative.len());
    let mut s = String::from("interval,P_start,P_end");
    for t in 0..types {
        let _ = write!(s, ",N_{t}");
    }
    s.push('\n');
    let mut start = 0;
    let mut k = 0;
    let mut cuts: Vec<usize> = scan.flashpoints.iter().map(|f| f.index).collect();
    cuts.push(points.len().saturating_sub(1));
    for cut in cuts {
        if points.is_empty() {
            break;
        }
        let _ = write!(s, "{k},{},{}", points[start].p_s, points[cut].p_s);
        for c in &points[start].representative {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        start = cut + 1;
        k += 1;
        if start >= points.len() {
            break;
        }
    }
    s
}

fn check_resume(dir: &Path, config: &RunConfig, resume: bool) -> Result<()> {
    let points = dir.join("points");
    if !points.exists() {
        return Ok(());
    }
    if !resume {
        return Err(MolaError::Resume {
            dir: dir.into(),
            message: "it holds a previous run; pass --resume or choose another directory".into(),
        });
    }
    let eff = dir.join(EFFECTIVE_CONFIG);
    let previous = load_config(&eff).map_err(|e| MolaError::Resume { dir: dir.into(), message: e.to_string() })?;
    if previous.fingerprint() != config.fingerprint() {
        return Err(MolaError::Resume { dir: dir.into(), message: "the configuration differs from the previous run".into() });
    }
    Ok(())
}

/// Full sweep: replicates at every priority, Landau analysis, flashpoints,
/// optional bisection, gray areas at each flashpoint and a manifest.
pub fn sweep_pipeline(config: &RunConfig, run: &RunOptions) -> Result<SweepOutcome> {
    config.validate()?;
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| MolaError::io(&dir, e))?;
    check_resume(&dir, config, run.resume)?;
    match sweep_inner(config, run, &dir) {
        Ok(outcome) => Ok(outcome),
        Err(e) => {
            // keep whatever finished and mark the run
            if let Ok(mut m) = Manifest::scan(&dir, "sweep", Some(config.fingerprint())) {
                m.status = RunStatus::Failed;
                m.error = Some(e.to_string());
                let _ = m.write(&dir);
            }
            Err(e)
        }
    }
}

fn sweep_inner(config: &RunConfig, run: &RunOptions, dir: &Path) -> Result<SweepOutcome> {
    config.write_effective(dir)?;
    let field = config.load_field()?;
    write_atomic(&dir.join("suitability.csv"), io::suitability_csv(&field).as_bytes())?;

    let mut points: Vec<PointSummary> = Vec::new();
    let mut computed = 0;
    let mut ensure = |p_s: f64, seeds: &[u64], points: &mut Vec<PointSummary>| -> Result<()> {
        if points.iter().any(|p| p.p_s == p_s) {
            return Ok(());
        }
        let pdir = point_dir(dir, p_s);
        let summary = match read_point(&pdir)? {
            Some(s) if s.replicates == seeds.len() => s,
            _ => {
                computed += 1;
                run_point(config, &field, p_s, seeds, run, &pdir)?
            }
        };
        points.push(summary);
        points.sort_by(|a, b| a.p_s.total_cmp(&b.p_s));
        Ok(())
    };

    let base = config.seeds.seeds();
    for p in config.sweep_points()? {
        ensure(p, &base, &mut points)?;
    }
    let refined = config.seeds.scaled(config.analysis.refinement_multiplier);
    let mut scan = detect(&points, config)?;
    for _ in 0..config.analysis.refinement_depth {
        let mids: Vec<f64> = scan
            .flashpoints
            .iter()
            .map(|f| ((f.p_low + f.p_high) * 0.5 * 1e9).round() / 1e9)
            .filter(|m| !points.iter().any(|p| p.p_s == *m))
            .collect();
        if mids.is_empty() {
            break;
        }
        for m in mids {
            ensure(m, &refined, &mut points)?;
        }
        scan = detect(&points, config)?;
    }

    let series = to_series(&points)?;
    write_atomic(&dir.join(SERIES), series_csv(&points).as_bytes())?;
    write_atomic(&dir.join(FLASHPOINTS), io::flashpoints_csv(&scan.flashpoints).as_bytes())?;
    write_atomic(&dir.join("stable_intervals.csv"), stable_intervals_csv(&points, &scan).as_bytes())?;

    if config.grid.types == 3 {
        for (k, fp) in scan.flashpoints.iter().enumerate() {
            write_gray_areas(dir, k, fp.p_low, fp.p_high)?;
        }
    }

    let mut manifest = Manifest::scan(dir, "sweep", Some(config.fingerprint()))?;
    manifest.warnings = scan
        .warnings
        .iter()
        .map(|w| {
            format!(
                "type {} is absent on both sides of interval {} ({}, {}); skipped",
                w.ty,
                w.index,
                points[w.index].p_s,
                points[w.index + 1].p_s
            )
        })
        .collect();
    manifest.write(dir)?;
    Ok(SweepOutcome { dir: dir.to_path_buf(), series, scan, points, computed })
}

fn to_series(points: &[PointSummary]) -> Result<UseCountSeries> {
    Ok(UseCountSeries::new(
        points.iter().map(|p| p.p_s).collect(),
        points.iter().map(|p| p.representative.iter().map(|&c| c as f64).collect()).collect(),
        points.iter().map(|p| p.replicates).collect(),
    )?)
}

fn detect(points: &[PointSummary], config: &RunConfig) -> Result<FlashpointScan> {
    if points.len() < 2 {
        return Ok(FlashpointScan::default());
    }
    Ok(detect_flashpoints(&to_series(points)?, config.analysis.alpha)?)
}

/// Gray-area maps on either side of flashpoint `k` and pooled over both.
fn write_gray_areas(dir: &Path, k: usize, p_low: f64, p_high: f64) -> Result<()> {
    let load = |p: f64| -> Result<Option<ParcelTally>> {
        let path = point_dir(dir, p).join("tally.csv");
        if path.exists() {
            io::read_tally_csv(&path).map(Some)
        } else {
            Ok(None)
        }
    };
    let (below, above) = (load(p_low)?, load(p_high)?);
    let out = dir.join("grayarea");
    let mut combined: Option<ParcelTally> = None;
    for (side, tally) in [("below", &below), ("above", &above)] {
        if let Some(t) = tally {
            let map = GrayAreaMap::from_tally(t)?;
            write_atomic(&out.join(format!("fp{k}_{side}.csv")), io::gray_area_csv(&map).as_bytes())?;
            match &mut combined {
                Some(c) => c.merge(t)?,
                None => combined = Some(t.clone()),
            }
        }
    }
    if let Some(c) = combined {
        let map = GrayAreaMap::from_tally(&c)?;
        write_atomic(&out.join(format!("fp{k}_combined.csv")), io::gray_area_csv(&map).as_bytes())?;
    }
    Ok(())
}

/// Replicates at the single priority `priorities.suitability`, analyzed like
/// one sweep point and written straight into the output directory.
pub fn anneal_pipeline(config: &RunConfig, run: &RunOptions) -> Result<PointSummary> {
    config.validate()?;
    let p_s = config
        .priorities
        .suitability
        .ok_or_else(|| MolaError::config("priorities.suitability", "anneal needs a single suitability priority"))?;
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| MolaError::io(&dir, e))?;
    config.write_effective(&dir)?;
    let field = config.load_field()?;
    write_atomic(&dir.join("suitability.csv"), io::suitability_csv(&field).as_bytes())?;
    let mut options = config.anneal_options();
    options.keep_snapshots |= config.grid.types == 3;
    let set = run_replicates(
        &field,
        &config.priorities_at(p_s)?,
        &config.schedule(),
        &config.seeds.seeds(),
        config.sampler.kind(),
        &options,
        run.parallelism,
    )?;
    let (summary, tally) = write_point(&dir, &set, config, p_s, config.seeds.keep_snapshots)?;
    if let Some(t) = tally {
        let map = GrayAreaMap::from_tally(&t)?;
        write_atomic(&dir.join("grayarea.csv"), io::gray_area_csv(&map).as_bytes())?;
    }
    Manifest::scan(&dir, "anneal", Some(config.fingerprint()))?.write(&dir)?;
    Ok(summary)
}

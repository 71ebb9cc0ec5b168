use alloc::vec::Vec;

use super::histogram::{build_histogram, Axis};
use super::landau::{landau_surface, significant_minima, LandauSurface, Minimum};
use crate::error::{Error, Result};
use crate::sampler::SampleRecord;

/// How minima of a compactness-only `N_X` landscape are classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Moving-average window in bins.
    pub smoothing_window: usize,
    /// Minimum prominence (in units of `F`) for a minimum to count.
    pub min_depth: f64,
    /// Two minima at least this many parcels apart are "well separated".
    pub min_separation: usize,
}

impl ScanOptions {
    pub fn for_sites(sites: usize) -> Self {
        Self {
            smoothing_window: (sites / 30) | 1,
            min_depth: 1.0,
            min_separation: (sites / 6).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MinimaStructure {
    /// One significant minimum.
    Single(Minimum),
    /// Several well-separated significant minima: symmetry is broken.
    Multiple(Vec<Minimum>),
}

impl MinimaStructure {
    pub fn is_broken(&self) -> bool {
        matches!(self, MinimaStructure::Multiple(_))
    }

    pub fn minima(&self) -> &[Minimum] {
        match self {
            MinimaStructure::Single(m) => core::slice::from_ref(m),
            MinimaStructure::Multiple(v) => v,
        }
    }
}

/// Classifies the significant minima of `surface`.
pub fn classify_minima(surface: &LandauSurface, opts: &ScanOptions) -> MinimaStructure {
    let minima = significant_minima(surface, opts.smoothing_window, opts.min_depth);
    let lo = minima.iter().map(|m| m.bin).min().unwrap_or(0);
    let hi = minima.iter().map(|m| m.bin).max().unwrap_or(0);
    if minima.len() >= 2 && hi - lo >= opts.min_separation {
        MinimaStructure::Multiple(minima)
    } else {
        MinimaStructure::Single(minima[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub threshold: f64,
    pub surface: LandauSurface,
    pub structure: MinimaStructure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryScan {
    pub points: Vec<ScanPoint>,
}

impl SymmetryScan {
    /// Largest threshold whose landscape has several well-separated minima.
    pub fn largest_broken(&self) -> Option<f64> {
        self.points.iter().rev().find(|p| p.structure.is_broken()).map(|p| p.threshold)
    }

    /// `(largest broken, next scanned threshold)`; the transition lies in between.
    pub fn transition(&self) -> Option<(f64, f64)> {
        let k = self.points.iter().rposition(|p| p.structure.is_broken())?;
        self.points.get(k + 1).map(|next| (self.points[k].threshold, next.threshold))
    }
}

/// Builds the pooled `N_X` landscape at each threshold and classifies its
/// minima. `sample(t)` must return records from a compactness-only ensemble
/// held at `t`; pooling over types relies on that symmetry.
pub fn symmetry_breaking_scan<F>(t_values: &[f64], opts: &ScanOptions, mut sample: F) -> Result<SymmetryScan>
where
    F: FnMut(f64) -> Result<Vec<SampleRecord>>,
{
    if t_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("thresholds must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let records = sample(t)?;
        let surface = landau_surface(&build_histogram(&records, Axis::Pooled)?)?;
        let structure = classify_minima(&surface, opts);
        points.push(ScanPoint { threshold: t, surface, structure });
    }
    Ok(SymmetryScan { points })
}

//! Post-processing of sampled ensembles.
//!
//! Use-count histograms and their Landau free energy `F = -ln p`, minima of
//! the resulting landscape, flashpoint detection across a priority sweep, the
//! per-parcel gray-area order parameter and ternary projections.

mod flashpoint;
mod grayarea;
mod histogram;
mod landau;
mod optimal;
mod symmetry;
mod ternary;

pub use flashpoint::{detect_flashpoints, Flashpoint, FlashpointScan, Trigger, UseCountSeries, ZeroDenominator};
pub use grayarea::{gray_area_map, wrap_angle, z_value, GrayAreaMap, ParcelTally};
pub use histogram::{build_histogram, Axis, JointHistogram, UseCountHistogram};
pub use landau::{find_minima, landau_surface, significant_minima, smooth, smooth_surface, LandauPoint, LandauSurface, Minimum};
pub use optimal::{optimal_counts, optimal_counts_with, samples_near, CountMode, OptimalCounts, OptimalOptions};
pub use symmetry::{classify_minima, symmetry_breaking_scan, MinimaStructure, ScanOptions, ScanPoint, SymmetryScan};
pub use ternary::{ternary_project, TernaryPoint};

/// Default moving-average window applied before minima detection.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 3;

/// Flashpoint cutoff on the symmetric relative change.
pub const DEFAULT_ALPHA: f64 = 0.1;

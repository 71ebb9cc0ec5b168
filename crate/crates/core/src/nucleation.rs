//! Boundary/area cost of reallocating a region.
//!
//! Flipping a region `R` from one use to another costs `dE_M` per unit of
//! boundary and gains `dE_O` per parcel, so it pays off once
//! `dE_F = dE_M L - dE_O A < 0`. On the lattice the boundary can be measured
//! two ways: exposed 4-neighbor edges (shape-generic, approximate) or the exact
//! number of Moore pairs straddling the boundary, which reproduces the change in
//! `O1` exactly for a uniform background.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{LandUseType, SuitabilityField, MOORE};

/// `O1` increase per broken same-type Moore pair.
pub const MOORE_PAIR_COST: f64 = 2.0;

/// Straight-interface cost per exposed unit edge: one orthogonal and two
/// diagonal Moore pairs.
pub const EDGE_COST: f64 = 3.0 * MOORE_PAIR_COST;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl RegionMask {
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimensions { rows, cols, types: 0 });
        }
        if cells.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: cells.len() });
        }
        Ok(Self { rows, cols, cells })
    }

    /// Solid `height x width` rectangle with top-left corner `(row, col)`.
    pub fn rectangle(rows: usize, cols: usize, row: usize, col: usize, height: usize, width: usize) -> Result<Self> {
        if row + height > rows || col + width > cols {
            return Err(Error::OutOfBounds { row: row + height, col: col + width, rows, cols });
        }
        let mut cells = vec![false; rows * cols];
        for r in row..row + height {
            cells[r * cols + col..r * cols + col + width].fill(true);
        }
        Self::from_cells(rows, cols, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn area(&self) -> u64 {
        self.cells.iter().filter(|&&c| c).count() as u64
    }

    fn member(&self, r: isize, c: isize) -> Option<bool> {
        if r < 0 || c < 0 || r >= self.rows as isize || c >= self.cols as isize {
            None
        } else {
            Some(self.cells[r as usize * self.cols + c as usize])
        }
    }

    /// Member/non-member Moore pairs inside the map.
    pub fn moore_interface_pairs(&self) -> u64 {
        let mut n = 0;
        for r in 0..self.rows as isize {
            for c in 0..self.cols as isize {
                if self.member(r, c) != Some(true) {
                    continue;
                }
                for (dr, dc) in MOORE {
                    if self.member(r + dr, c + dc) == Some(false) {
                        n += 1;
                    }
                }
            }
        }
        n
    }
}

/// Which boundary length enters the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMetric {
    /// Exposed 4-neighbor edges; the map edge counts as exposed.
    EdgeCount,
    /// Moore pairs across the boundary; exact for the compactness objective.
    MoorePairs,
}

impl BoundaryMetric {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryMetric::EdgeCount => "edge",
            BoundaryMetric::MoorePairs => "moore",
        }
    }

    /// Objective cost per unit of this boundary measure (before `P_C`).
    pub fn unit_cost(self) -> f64 {
        match self {
            BoundaryMetric::EdgeCount => EDGE_COST,
            BoundaryMetric::MoorePairs => MOORE_PAIR_COST,
        }
    }

    pub fn length(self, mask: &RegionMask) -> u64 {
        match self {
            BoundaryMetric::EdgeCount => exposed_edges(mask),
            BoundaryMetric::MoorePairs => mask.moore_interface_pairs(),
        }
    }
}

fn exposed_edges(mask: &RegionMask) -> u64 {
    let mut n = 0;
    for r in 0..mask.rows as isize {
        for c in 0..mask.cols as isize {
            if mask.member(r, c) != Some(true) {
                continue;
            }
            for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                if mask.member(r + dr, c + dc) != Some(true) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Boundary length `L` (exposed 4-neighbor edges) and area `A`.
pub fn boundary_and_area(mask: &RegionMask) -> Result<(u64, u64)> {
    let area = mask.area();
    if area == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((exposed_edges(mask), area))
}

/// Minimum per-parcel on-site gain `dE_M L / A` for which flipping pays off.
pub fn flip_threshold(mask: &RegionMask, delta_em: f64) -> Result<f64> {
    if !(delta_em >= 0.0) {
        return Err(Error::InvalidArgument("boundary cost must be >= 0"));
    }
    let (l, a) = boundary_and_area(mask)?;
    Ok(delta_em * l as f64 / a as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NucleationEstimate {
    pub delta_em: f64,
    pub delta_eo: f64,
    pub delta_f: f64,
    pub flips: bool,
}

pub fn nucleation_estimate(boundary: u64, area: u64, delta_em: f64, delta_eo: f64) -> NucleationEstimate {
    let delta_f = delta_em * boundary as f64 - delta_eo * area as f64;
    NucleationEstimate { delta_em, delta_eo, delta_f, flips: delta_f < 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlashpointPrediction {
    pub boundary: u64,
    pub area: u64,
    pub metric: BoundaryMetric,
    /// Objective cost per boundary unit, excluding `P_C`.
    pub delta_em: f64,
    /// Mean suitability margin `c_to - c_from` over the region.
    pub margin: f64,
    pub p_s_star: f64,
}

/// Suitability priority above which flipping the region from `from` to `to`
/// lowers `H`: `P_S* = P_C dE_M L / (m A)`.
pub fn predict_flashpoint_priority(
    mask: &RegionMask,
    field: &SuitabilityField,
    from: LandUseType,
    to: LandUseType,
    compactness_weight: f64,
    metric: BoundaryMetric,
) -> Result<FlashpointPrediction> {
    if field.rows() != mask.rows || field.cols() != mask.cols {
        return Err(Error::InvalidArgument("mask and field dimensions differ"));
    }
    for t in [from, to] {
        if t.code() >= field.types() {
            return Err(Error::TypeOutOfRange { code: t.code(), types: field.types() });
        }
    }
    let area = mask.area();
    if area == 0 {
        return Err(Error::EmptyMask);
    }
    let margin: f64 = mask
        .cells
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(k, _)| field.at(k)[to.code()] - field.at(k)[from.code()])
        .sum::<f64>()
        / area as f64;
    if !(margin > 0.0) {
        return Err(Error::NoOnSiteIncentive(margin));
    }
    let boundary = metric.length(mask);
    let delta_em = metric.unit_cost();
    Ok(FlashpointPrediction {
        boundary,
        area,
        metric,
        delta_em,
        margin,
        p_s_star: compactness_weight * delta_em * boundary as f64 / (margin * area as f64),
    })
}

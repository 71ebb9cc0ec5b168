use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::LandUseGrid;

const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

/// `z = exp(2 pi i (s - 1) / 3)` for `s` in `0..3`, as `(re, im)`.
pub fn z_value(s: u8) -> (f64, f64) {
    match s {
        0 => (-0.5, -HALF_SQRT3),
        1 => (1.0, 0.0),
        _ => (-0.5, HALF_SQRT3),
    }
}

/// Per-parcel type counts over an ensemble of `S = 3` patterns. Pooling two
/// ensembles is adding their tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParcelTally {
    rows: usize,
    cols: usize,
    counts: Vec<[u64; 3]>,
    samples: u64,
}

impl ParcelTally {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, counts: vec![[0; 3]; rows * cols], samples: 0 }
    }

    /// Rebuilds a tally from stored per-parcel counts; each parcel's counts
    /// must add up to `samples`.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<[u64; 3]>) -> Result<Self> {
        if counts.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: counts.len() });
        }
        let samples = counts.first().map_or(0, |c| c.iter().sum());
        if counts.iter().any(|c| c.iter().sum::<u64>() != samples) {
            return Err(Error::InconsistentSamples);
        }
        Ok(Self { rows, cols, counts, samples })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn counts(&self) -> &[[u64; 3]] {
        &self.counts
    }

    pub fn add(&mut self, grid: &LandUseGrid) -> Result<()> {
        if grid.types() != 3 {
            return Err(Error::RequiresThreeTypes(grid.types()));
        }
        if grid.rows() != self.rows || grid.cols() != self.cols {
            return Err(Error::InconsistentSamples);
        }
        for (tally, &s) in self.counts.iter_mut().zip(grid.cells()) {
            tally[s as usize] += 1;
        }
        self.samples += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ParcelTally) -> Result<()> {
        if other.rows != self.rows || other.cols != self.cols {
            return Err(Error::InconsistentSamples);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for s in 0..3 {
                a[s] += b[s];
            }
        }
        self.samples += other.samples;
        Ok(())
    }
}

/// Mean of `z` per parcel over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayAreaMap {
    pub rows: usize,
    pub cols: usize,
    /// `<z>` as `(re, im)`, row-major.
    pub values: Vec<(f64, f64)>,
    /// `|<z>|`, computed from integer counts so unanimity gives exactly 1.
    pub modulus: Vec<f64>,
    pub ensemble_size: u64,
}

impl GrayAreaMap {
    pub fn from_tally(tally: &ParcelTally) -> Result<Self> {
        if tally.samples == 0 {
            return Err(Error::Empty("gray-area ensemble"));
        }
        let n = tally.samples as f64;
        let mut values = Vec::with_capacity(tally.counts.len());
        let mut modulus = Vec::with_capacity(tally.counts.len());
        for c in &tally.counts {
            let [c0, c1, c2] = c.map(|v| v as f64);
            values.push(((c1 - 0.5 * (c0 + c2)) / n, HALF_SQRT3 * (c2 - c0) / n));
            // |sum z|^2 = c0^2 + c1^2 + c2^2 - c0 c1 - c1 c2 - c0 c2, exact in integers
            let [a, b, d] = c.map(u128::from);
            let q = a * a + b * b + d * d - a * b - b * d - a * d;
            modulus.push(libm::sqrt(q as f64) / n);
        }
        Ok(Self { rows: tally.rows, cols: tally.cols, values, modulus, ensemble_size: tally.samples })
    }

    pub fn value(&self, row: usize, col: usize) -> (f64, f64) {
        self.values[row * self.cols + col]
    }

    pub fn modulus_at(&self, row: usize, col: usize) -> f64 {
        self.modulus[row * self.cols + col]
    }

    /// `arg <z>` in `(-pi, pi]`.
    pub fn argument_at(&self, row: usize, col: usize) -> f64 {
        let (re, im) = self.value(row, col);
        libm::atan2(im, re)
    }

    pub fn arguments(&self) -> Vec<f64> {
        self.values.iter().map(|&(re, im)| libm::atan2(im, re)).collect()
    }
}

/// Gray-area map of `ensemble_a`, pooled with `ensemble_b` (equal weight per
/// sample) when given.
pub fn gray_area_map(ensemble_a: &[LandUseGrid], ensemble_b: Option<&[LandUseGrid]>) -> Result<GrayAreaMap> {
    let first = ensemble_a.first().ok_or(Error::Empty("gray-area ensemble"))?;
    if first.types() != 3 {
        return Err(Error::RequiresThreeTypes(first.types()));
    }
    let mut tally = ParcelTally::new(first.rows(), first.cols());
    for g in ensemble_a.iter().chain(ensemble_b.unwrap_or(&[])) {
        tally.add(g)?;
    }
    GrayAreaMap::from_tally(&tally)
}

/// Angle between two arguments, wrapped into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

//! Grids, suitability fields, priorities and exact objective evaluation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Moore neighborhood offsets (row, col).
pub const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// A land-use code in `0..S`. For `S = 3` the canonical labels are
/// agriculture (0), construction (1) and conservation (2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LandUseType(pub u8);

impl LandUseType {
    pub const AGRICULTURE: LandUseType = LandUseType(0);
    pub const CONSTRUCTION: LandUseType = LandUseType(1);
    pub const CONSERVATION: LandUseType = LandUseType(2);

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> Option<&'static str> {
        match self.0 {
            0 => Some("agriculture"),
            1 => Some("construction"),
            2 => Some("conservation"),
            _ => None,
        }
    }
}

/// How the Moore neighborhood treats the map edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Parcels beyond the edge do not exist and contribute nothing.
    #[default]
    Open,
    /// Torus wrap. Only meant for physics cross-checks.
    Periodic,
}

/// Dense `rows x cols` assignment of parcels to use types, stored row-major as
/// type codes. The one-hot `x_ijs` field is available through [`LandUseGrid::one_hot`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LandUseGrid {
    rows: usize,
    cols: usize,
    types: usize,
    boundary: Boundary,
    cells: Vec<u8>,
}

fn check_dims(rows: usize, cols: usize, types: usize) -> Result<()> {
    if rows == 0 || cols == 0 || types < 2 || types > u8::MAX as usize + 1 {
        return Err(Error::InvalidDimensions { rows, cols, types });
    }
    Ok(())
}

impl LandUseGrid {
    /// Grid with every parcel set to `fill`.
    pub fn uniform(rows: usize, cols: usize, types: usize, fill: LandUseType) -> Result<Self> {
        check_dims(rows, cols, types)?;
        if fill.code() >= types {
            return Err(Error::TypeOutOfRange { code: fill.code(), types });
        }
        Ok(Self { rows, cols, types, boundary: Boundary::Open, cells: vec![fill.0; rows * cols] })
    }

    pub fn from_cells(rows: usize, cols: usize, types: usize, cells: Vec<u8>) -> Result<Self> {
        check_dims(rows, cols, types)?;
        if cells.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: cells.len() });
        }
        if let Some(&bad) = cells.iter().find(|&&c| c as usize >= types) {
            return Err(Error::TypeOutOfRange { code: bad as usize, types });
        }
        Ok(Self { rows, cols, types, boundary: Boundary::Open, cells })
    }

    /// Uniformly random assignment.
    pub fn random<R: rand::Rng + ?Sized>(
        rows: usize,
        cols: usize,
        types: usize,
        rng: &mut R,
    ) -> Result<Self> {
        check_dims(rows, cols, types)?;
        let cells = (0..rows * cols).map(|_| rng.random_range(0..types) as u8).collect();
        Ok(Self { rows, cols, types, boundary: Boundary::Open, cells })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self> {
        if boundary == Boundary::Periodic && (self.rows < 3 || self.cols < 3) {
            return Err(Error::PeriodicTooSmall { rows: self.rows, cols: self.cols });
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn types(&self) -> usize {
        self.types
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn index(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::OutOfBounds { row, col, rows: self.rows, cols: self.cols });
        }
        Ok(row * self.cols + col)
    }

    pub fn get(&self, row: usize, col: usize) -> Result<LandUseType> {
        Ok(LandUseType(self.cells[self.index(row, col)?]))
    }

    pub fn set(&mut self, row: usize, col: usize, ty: LandUseType) -> Result<()> {
        if ty.code() >= self.types {
            return Err(Error::TypeOutOfRange { code: ty.code(), types: self.types });
        }
        let idx = self.index(row, col)?;
        self.cells[idx] = ty.0;
        Ok(())
    }

    #[inline]
    pub(crate) fn code_at(&self, idx: usize) -> u8 {
        self.cells[idx]
    }

    #[inline]
    pub(crate) fn set_code(&mut self, idx: usize, code: u8) {
        self.cells[idx] = code;
    }

    /// `x_ijs`: 1 when parcel `(row, col)` is allocated to `ty`.
    pub fn one_hot(&self, row: usize, col: usize, ty: LandUseType) -> Result<u8> {
        Ok(u8::from(self.get(row, col)? == ty))
    }

    /// Number of parcels of each type (`N_X`).
    pub fn use_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.types];
        for &c in &self.cells {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Calls `f` with the flat index of every Moore neighbor of `idx`.
    #[inline]
    pub fn for_each_neighbor(&self, idx: usize, mut f: impl FnMut(usize)) {
        let row = (idx / self.cols) as isize;
        let col = (idx % self.cols) as isize;
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        match self.boundary {
            Boundary::Open => {
                for (dr, dc) in MOORE {
                    let (r, c) = (row + dr, col + dc);
                    if r >= 0 && r < rows && c >= 0 && c < cols {
                        f((r * cols + c) as usize);
                    }
                }
            }
            Boundary::Periodic => {
                for (dr, dc) in MOORE {
                    let r = (row + dr).rem_euclid(rows);
                    let c = (col + dc).rem_euclid(cols);
                    f((r * cols + c) as usize);
                }
            }
        }
    }

    /// Count of Moore neighbors of `idx` holding type code `code`.
    #[inline]
    pub fn neighbors_of_type(&self, idx: usize, code: u8) -> u32 {
        let mut n = 0;
        self.for_each_neighbor(idx, |j| n += u32::from(self.cells[j] == code));
        n
    }

    /// Applies `perm[old] = new` to every parcel.
    pub fn relabel(&mut self, perm: &[u8]) -> Result<()> {
        if perm.len() != self.types {
            return Err(Error::LengthMismatch { expected: self.types, got: perm.len() });
        }
        if let Some(&bad) = perm.iter().find(|&&p| p as usize >= self.types) {
            return Err(Error::TypeOutOfRange { code: bad as usize, types: self.types });
        }
        for c in &mut self.cells {
            *c = perm[*c as usize];
        }
        Ok(())
    }

    /// Mirror left-right.
    pub fn mirror_cols(&mut self) {
        for row in self.cells.chunks_mut(self.cols) {
            row.reverse();
        }
    }

    /// Mirror top-bottom.
    pub fn mirror_rows(&mut self) {
        let cols = self.cols;
        for r in 0..self.rows / 2 {
            let other = self.rows - 1 - r;
            for c in 0..cols {
                self.cells.swap(r * cols + c, other * cols + c);
            }
        }
    }
}

/// Flat-index Moore neighbor lists for one grid shape and boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTable {
    rows: usize,
    cols: usize,
    boundary: Boundary,
    lists: Vec<[u32; 8]>,
    lens: Vec<u8>,
}

impl NeighborTable {
    pub fn new(grid: &LandUseGrid) -> Self {
        let n = grid.len();
        let mut lists = vec![[0u32; 8]; n];
        let mut lens = vec![0u8; n];
        for idx in 0..n {
            let mut k = 0;
            grid.for_each_neighbor(idx, |j| {
                lists[idx][k] = j as u32;
                k += 1;
            });
            lens[idx] = k as u8;
        }
        Self { rows: grid.rows, cols: grid.cols, boundary: grid.boundary, lists, lens }
    }

    pub fn matches(&self, grid: &LandUseGrid) -> bool {
        self.rows == grid.rows && self.cols == grid.cols && self.boundary == grid.boundary
    }

    #[inline]
    pub fn of(&self, idx: usize) -> &[u32] {
        &self.lists[idx][..self.lens[idx] as usize]
    }
}

/// Per-parcel, per-type suitability scores `c_ijs`, row-major with the type
/// index fastest. Scores are arbitrary finite reals and are not normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SuitabilityField {
    rows: usize,
    cols: usize,
    types: usize,
    scores: Vec<f64>,
}

impl SuitabilityField {
    pub fn zeros(rows: usize, cols: usize, types: usize) -> Result<Self> {
        check_dims(rows, cols, types)?;
        Ok(Self { rows, cols, types, scores: vec![0.0; rows * cols * types] })
    }

    pub fn from_scores(rows: usize, cols: usize, types: usize, scores: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, types)?;
        let expected = rows * cols * types;
        if scores.len() != expected {
            return Err(Error::LengthMismatch { expected, got: scores.len() });
        }
        if let Some(k) = scores.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteScore {
                row: k / (cols * types),
                col: (k / types) % cols,
                ty: k % types,
            });
        }
        Ok(Self { rows, cols, types, scores })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn types(&self) -> usize {
        self.types
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, row: usize, col: usize, ty: usize) -> f64 {
        self.scores[(row * self.cols + col) * self.types + ty]
    }

    pub fn set(&mut self, row: usize, col: usize, ty: usize, value: f64) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::OutOfBounds { row, col, rows: self.rows, cols: self.cols });
        }
        if ty >= self.types {
            return Err(Error::TypeOutOfRange { code: ty, types: self.types });
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteScore { row, col, ty });
        }
        self.scores[(row * self.cols + col) * self.types + ty] = value;
        Ok(())
    }

    /// Scores of every type at flat parcel index `idx`.
    #[inline]
    pub fn at(&self, idx: usize) -> &[f64] {
        &self.scores[idx * self.types..(idx + 1) * self.types]
    }

    pub fn check_compatible(&self, grid: &LandUseGrid) -> Result<()> {
        if self.rows != grid.rows || self.cols != grid.cols || self.types != grid.types {
            return Err(Error::IncompatibleField {
                grid_rows: grid.rows,
                grid_cols: grid.cols,
                grid_types: grid.types,
                field_rows: self.rows,
                field_cols: self.cols,
                field_types: self.types,
            });
        }
        Ok(())
    }

    pub fn mirror_cols(&mut self) {
        let (cols, types) = (self.cols, self.types);
        for row in self.scores.chunks_mut(cols * types) {
            for c in 0..cols / 2 {
                for t in 0..types {
                    row.swap(c * types + t, (cols - 1 - c) * types + t);
                }
            }
        }
    }

    pub fn mirror_rows(&mut self) {
        let stride = self.cols * self.types;
        for r in 0..self.rows / 2 {
            let other = self.rows - 1 - r;
            for k in 0..stride {
                self.scores.swap(r * stride + k, other * stride + k);
            }
        }
    }
}

/// Objective weights and annealing threshold (`k_B = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrioritySet {
    pub compactness: f64,
    pub suitability: f64,
    pub threshold: f64,
}

impl PrioritySet {
    pub fn new(compactness: f64, suitability: f64, threshold: f64) -> Result<Self> {
        let p = Self { compactness, suitability, threshold };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.compactness.is_finite() && self.compactness >= 0.0) {
            return Err(Error::InvalidPriorities("compactness weight must be finite and >= 0"));
        }
        if !(self.suitability.is_finite() && self.suitability >= 0.0) {
            return Err(Error::InvalidPriorities("suitability weight must be finite and >= 0"));
        }
        if self.compactness == 0.0 && self.suitability == 0.0 {
            return Err(Error::InvalidPriorities("weights cannot both be zero"));
        }
        if !(self.threshold > 0.0) || self.threshold.is_nan() {
            return Err(Error::InvalidPriorities("threshold must be > 0"));
        }
        Ok(())
    }

    pub fn at_threshold(self, threshold: f64) -> Self {
        Self { threshold, ..self }
    }
}

/// Objective values of one pattern. `total = P_C * compactness + P_S * suitability`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub compactness: f64,
    pub suitability: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(compactness: f64, suitability: f64, priorities: &PrioritySet) -> Self {
        Self {
            compactness,
            suitability,
            total: priorities.compactness * compactness + priorities.suitability * suitability,
        }
    }
}

/// `O1`: minus the number of same-type Moore neighbors summed over all parcels.
/// Each matching unordered pair contributes -2.
pub fn compactness_objective(grid: &LandUseGrid) -> i64 {
    let matches: u64 = (0..grid.len())
        .map(|idx| u64::from(grid.neighbors_of_type(idx, grid.code_at(idx))))
        .sum();
    -(matches as i64)
}

/// `O2`: minus the suitability of the assigned type summed over all parcels.
pub fn suitability_objective(grid: &LandUseGrid, field: &SuitabilityField) -> Result<f64> {
    field.check_compatible(grid)?;
    Ok(-grid
        .cells()
        .iter()
        .enumerate()
        .map(|(idx, &c)| field.at(idx)[c as usize])
        .sum::<f64>())
}

pub fn total_energy(
    grid: &LandUseGrid,
    field: &SuitabilityField,
    priorities: &PrioritySet,
) -> Result<EnergyBreakdown> {
    let o2 = suitability_objective(grid, field)?;
    Ok(EnergyBreakdown::new(compactness_objective(grid) as f64, o2, priorities))
}

/// Change of `(O1, O2)` when the parcel at flat index `idx` becomes `new_code`.
#[inline]
pub(crate) fn flip_delta_parts(
    grid: &LandUseGrid,
    neighbors: &NeighborTable,
    field: &SuitabilityField,
    idx: usize,
    new_code: u8,
) -> (i64, f64) {
    let old_code = grid.code_at(idx);
    if old_code == new_code {
        return (0, 0.0);
    }
    let (mut n_old, mut n_new) = (0i64, 0i64);
    for &j in neighbors.of(idx) {
        let c = grid.cells[j as usize];
        n_old += i64::from(c == old_code);
        n_new += i64::from(c == new_code);
    }
    let scores = field.at(idx);
    (-2 * (n_new - n_old), -(scores[new_code as usize] - scores[old_code as usize]))
}

/// `H(flipped) - H(grid)` evaluated from the parcel's neighborhood and
/// suitability row only.
pub fn delta_energy_flip(
    grid: &LandUseGrid,
    field: &SuitabilityField,
    priorities: &PrioritySet,
    cell: (usize, usize),
    new_type: LandUseType,
) -> Result<f64> {
    field.check_compatible(grid)?;
    let idx = grid.index(cell.0, cell.1)?;
    if new_type.code() >= grid.types() {
        return Err(Error::TypeOutOfRange { code: new_type.code(), types: grid.types() });
    }
    let old = grid.code_at(idx);
    if old == new_type.0 {
        return Ok(0.0);
    }
    let (mut n_old, mut n_new) = (0i64, 0i64);
    grid.for_each_neighbor(idx, |j| {
        n_old += i64::from(grid.cells[j] == old);
        n_new += i64::from(grid.cells[j] == new_type.0);
    });
    let scores = field.at(idx);
    let d1 = -2 * (n_new - n_old);
    let d2 = -(scores[new_type.code()] - scores[old as usize]);
    Ok(priorities.compactness * d1 as f64 + priorities.suitability * d2)
}

//! Wolff cluster moves with a ghost site.
//!
//! A move picks a seed parcel of type `a` and a second label `b != a`, which
//! embeds an Ising model on the parcels holding `a` or `b`. Parcels of other
//! types are unaffected by swapping `a <-> b`, so they drop out. Same-type Moore
//! bonds are activated with probability `1 - exp(-2 P_C / T)` (each matching
//! pair carries `-2 P_C` in `H`). The suitability field couples every parcel to
//! a ghost site: a cluster parcel whose current type is the favored one of the
//! pair bonds to the ghost with probability `1 - exp(-dE / T)`, where `dE > 0`
//! is the energy cost of swapping it. A cluster that reaches the ghost stays put.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::Result;
use crate::lattice::{LandUseGrid, NeighborTable, PrioritySet, SuitabilityField};

/// Result of a single cluster move.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClusterMove {
    /// Parcels in the cluster when growth stopped; the ghost is not counted.
    pub cluster_size: usize,
    pub ghost_attached: bool,
    pub flipped: bool,
    pub from: u8,
    pub to: u8,
    pub delta_compactness: i64,
    pub delta_suitability: f64,
}

/// Reusable buffers for cluster growth.
#[derive(Debug, Clone)]
pub struct WolffWorkspace {
    stamp: Vec<u32>,
    generation: u32,
    stack: Vec<usize>,
    members: Vec<usize>,
}

impl WolffWorkspace {
    pub fn new(sites: usize) -> Self {
        Self { stamp: vec![0; sites], generation: 0, stack: Vec::new(), members: Vec::new() }
    }

    fn reset(&mut self, sites: usize) {
        if self.stamp.len() != sites {
            self.stamp = vec![0; sites];
            self.generation = 0;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.stack.clear();
        self.members.clear();
    }

    #[inline]
    fn contains(&self, idx: usize) -> bool {
        self.stamp[idx] == self.generation
    }

    #[inline]
    fn insert(&mut self, idx: usize) {
        self.stamp[idx] = self.generation;
        self.members.push(idx);
        self.stack.push(idx);
    }
}

/// One ghost-site Wolff move. Allocates a fresh workspace; use [`crate::sampler::Chain`]
/// for repeated moves.
pub fn wolff_step<R: Rng + ?Sized>(
    grid: &mut LandUseGrid,
    field: &SuitabilityField,
    priorities: &PrioritySet,
    rng: &mut R,
) -> Result<ClusterMove> {
    field.check_compatible(grid)?;
    priorities.validate()?;
    let mut ws = WolffWorkspace::new(grid.len());
    let neighbors = NeighborTable::new(grid);
    Ok(step(grid, &neighbors, field, priorities, rng, &mut ws))
}

pub(crate) fn step<R: Rng + ?Sized>(
    grid: &mut LandUseGrid,
    neighbors: &NeighborTable,
    field: &SuitabilityField,
    priorities: &PrioritySet,
    rng: &mut R,
    ws: &mut WolffWorkspace,
) -> ClusterMove {
    let n = grid.len();
    ws.reset(n);
    let beta = 1.0 / priorities.threshold;
    let p_bond = 1.0 - libm::exp(-2.0 * priorities.compactness * beta);

    let seed = rng.random_range(0..n);
    let from = grid.code_at(seed);
    let mut to = rng.random_range(0..grid.types() as u8 - 1);
    if to >= from {
        to += 1;
    }
    let (fa, fb) = (from as usize, to as usize);
    let mut mv = ClusterMove { from, to, ..ClusterMove::default() };

    ws.insert(seed);
    while let Some(site) = ws.stack.pop() {
        // Ghost bond: only when staying on `from` is favored.
        let scores = field.at(site);
        let cost = priorities.suitability * (scores[fa] - scores[fb]);
        if cost > 0.0 && rng.random::<f64>() < 1.0 - libm::exp(-cost * beta) {
            mv.ghost_attached = true;
            mv.cluster_size = ws.members.len();
            return mv;
        }
        if p_bond > 0.0 {
            for &j in neighbors.of(site) {
                let j = j as usize;
                if grid.code_at(j) == from && !ws.contains(j) && rng.random::<f64>() < p_bond {
                    ws.insert(j);
                }
            }
        }
    }

    mv.cluster_size = ws.members.len();
    let mut d1 = 0i64;
    let mut d2 = 0.0;
    for &site in &ws.members {
        for &j in neighbors.of(site) {
            let j = j as usize;
            if !ws.contains(j) {
                let c = grid.code_at(j);
                if c == from {
                    d1 += 2;
                } else if c == to {
                    d1 -= 2;
                }
            }
        }
        let scores = field.at(site);
        d2 += scores[fa] - scores[fb];
    }
    for &site in &ws.members {
        grid.set_code(site, to);
    }
    mv.flipped = true;
    mv.delta_compactness = d1;
    mv.delta_suitability = d2;
    mv
}

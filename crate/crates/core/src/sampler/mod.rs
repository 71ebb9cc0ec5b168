//! Markov chain samplers for `exp(-H/T)` and the annealing driver.
//!
//! Two kernels share the same stationary distribution: single-parcel
//! Metropolis ([`metropolis_sweep`]) and a Wolff cluster move with a ghost site
//! that carries the suitability field ([`wolff_step`]). [`Chain`] keeps the
//! objective values up to date as moves are accepted, and [`run_anneal`] drives
//! a chain through thermalize / cool / equilibrate / measure phases.

mod anneal;
mod metropolis;
mod wolff;

pub use anneal::{run_anneal, AnnealOptions, AnnealRun, AnnealSchedule, SampleRecord};
pub use metropolis::metropolis_sweep;
pub use wolff::{wolff_step, ClusterMove, WolffWorkspace};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lattice::{
    compactness_objective, suitability_objective, EnergyBreakdown, LandUseGrid, NeighborTable,
    PrioritySet, SuitabilityField,
};

/// Outcome of one Metropolis sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub proposals: usize,
    pub accepted: usize,
    /// Change in `O1` (exact).
    pub delta_compactness: i64,
    /// Change in `O2`.
    pub delta_suitability: f64,
}

/// Which kernel advances the chain. One Wolff "sweep" is a single cluster move,
/// followed by one Metropolis sweep when `interleave_metropolis` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Metropolis,
    Wolff { interleave_metropolis: bool },
}

impl SamplerKind {
    pub const WOLFF: SamplerKind = SamplerKind::Wolff { interleave_metropolis: true };

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Metropolis => "metropolis",
            SamplerKind::Wolff { interleave_metropolis: true } => "wolff",
            SamplerKind::Wolff { interleave_metropolis: false } => "wolff-pure",
        }
    }
}

/// Replicate seed. Together with the master seed it selects an independent
/// ChaCha stream, so replicates never share generator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self, master: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(self.0);
        rng
    }
}

/// A grid under a sampler with incrementally tracked objectives.
pub struct Chain<'f, R> {
    grid: LandUseGrid,
    field: &'f SuitabilityField,
    priorities: PrioritySet,
    kind: SamplerKind,
    rng: R,
    neighbors: NeighborTable,
    workspace: WolffWorkspace,
    compactness: i64,
    suitability: f64,
    sweeps: u64,
}

impl<'f, R: rand::Rng> Chain<'f, R> {
    pub fn new(
        grid: LandUseGrid,
        field: &'f SuitabilityField,
        priorities: PrioritySet,
        kind: SamplerKind,
        rng: R,
    ) -> Result<Self> {
        priorities.validate()?;
        let suitability = suitability_objective(&grid, field)?;
        let compactness = compactness_objective(&grid);
        let workspace = WolffWorkspace::new(grid.len());
        let neighbors = NeighborTable::new(&grid);
        Ok(Self { grid, field, priorities, kind, rng, neighbors, workspace, compactness, suitability, sweeps: 0 })
    }

    pub fn grid(&self) -> &LandUseGrid {
        &self.grid
    }

    pub fn into_grid(self) -> LandUseGrid {
        self.grid
    }

    pub fn priorities(&self) -> &PrioritySet {
        &self.priorities
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        self.priorities.threshold = threshold;
    }

    /// Objectives as tracked through accepted moves.
    pub fn energy(&self) -> EnergyBreakdown {
        EnergyBreakdown::new(self.compactness as f64, self.suitability, &self.priorities)
    }

    /// Recomputes `O2` from scratch to drop accumulated rounding.
    pub fn resync(&mut self) {
        self.suitability = suitability_objective(&self.grid, self.field)
            .expect("field checked at construction");
    }

    /// One sweep of the configured kernel.
    pub fn sweep(&mut self) {
        match self.kind {
            SamplerKind::Metropolis => self.metropolis(),
            SamplerKind::Wolff { interleave_metropolis } => {
                let mv = wolff::step(
                    &mut self.grid,
                    &self.neighbors,
                    self.field,
                    &self.priorities,
                    &mut self.rng,
                    &mut self.workspace,
                );
                self.compactness += mv.delta_compactness;
                self.suitability += mv.delta_suitability;
                if interleave_metropolis {
                    self.metropolis();
                }
            }
        }
        self.sweeps += 1;
    }

    fn metropolis(&mut self) {
        let st = metropolis::sweep(&mut self.grid, &self.neighbors, self.field, &self.priorities, &mut self.rng);
        self.compactness += st.delta_compactness;
        self.suitability += st.delta_suitability;
    }
}

//! Lattice model, samplers and analysis for multi-objective land allocation.
//!
//! Land-use patterns live on an `N x M` raster where every parcel carries one of
//! `S` discrete use types. The compactness objective rewards same-type Moore
//! adjacency, the suitability objective rewards parcel-level preferences, and the
//! weighted sum of both is sampled at an annealing threshold `T` with Metropolis
//! or ghost-site Wolff cluster moves.
//!
//! The crate is `no_std` (with `alloc`). File formats, configuration, replicate
//! scheduling and the command line live in the companion `mola` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod lattice;
pub mod nucleation;
pub mod sampler;

pub use error::{Error, Result};
pub use lattice::{
    NeighborTable,
    Boundary, EnergyBreakdown, LandUseGrid, LandUseType, PrioritySet, SuitabilityField,
};

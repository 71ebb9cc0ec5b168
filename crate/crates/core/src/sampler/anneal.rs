use alloc::vec::Vec;
use rand::Rng;

use super::{Chain, RngSeed, SamplerKind};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, EnergyBreakdown, LandUseGrid, PrioritySet, SuitabilityField};

/// Thermalize at `t_start`, ramp linearly (per sweep) down to `t_target`,
/// equilibrate, then record one sample every `measure_interval` sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_target: f64,
    pub thermalize_sweeps: u64,
    pub cool_sweeps: u64,
    pub equilibrate_sweeps: u64,
    pub measure_sweeps: u64,
    pub measure_interval: u64,
}

impl Default for AnnealSchedule {
    /// `T = 15` for 10^3 sweeps, cool to `T = 1` over 3.5x10^4 sweeps,
    /// equilibrate 10^4 sweeps, measure every 50 sweeps for 10^4 sweeps.
    fn default() -> Self {
        Self {
            t_start: 15.0,
            t_target: 1.0,
            thermalize_sweeps: 1_000,
            cool_sweeps: 35_000,
            equilibrate_sweeps: 10_000,
            measure_sweeps: 10_000,
            measure_interval: 50,
        }
    }
}

impl AnnealSchedule {
    /// Hold a single temperature throughout (no ramp).
    pub fn fixed(t: f64, equilibrate_sweeps: u64, measure_sweeps: u64, measure_interval: u64) -> Self {
        Self {
            t_start: t,
            t_target: t,
            thermalize_sweeps: 0,
            cool_sweeps: 0,
            equilibrate_sweeps,
            measure_sweeps,
            measure_interval,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_target > 0.0) || !self.t_target.is_finite() {
            return Err(Error::InvalidSchedule("t_target must be finite and > 0"));
        }
        if !(self.t_start >= self.t_target) || !self.t_start.is_finite() {
            return Err(Error::InvalidSchedule("t_start must be finite and >= t_target"));
        }
        if self.measure_interval == 0 {
            return Err(Error::InvalidSchedule("measure_interval must be >= 1"));
        }
        Ok(())
    }

    pub fn total_sweeps(&self) -> u64 {
        self.thermalize_sweeps + self.cool_sweeps + self.equilibrate_sweeps + self.measure_sweeps
    }

    pub fn record_count(&self) -> u64 {
        self.measure_sweeps / self.measure_interval
    }

    /// Temperature used for 0-based sweep `k` of the cooling ramp; the last
    /// ramp sweep runs at `t_target`.
    pub fn cooling_temperature(&self, k: u64) -> f64 {
        let frac = (k + 1) as f64 / self.cool_sweeps as f64;
        self.t_start + (self.t_target - self.t_start) * frac
    }
}

/// One measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    /// Sweeps completed when the sample was taken.
    pub sweep_index: u64,
    /// `N_X` per type; sums to `N*M`.
    pub use_counts: Vec<usize>,
    pub energy: EnergyBreakdown,
    pub snapshot: Option<LandUseGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnealOptions {
    pub boundary: Boundary,
    pub keep_snapshots: bool,
    pub master_seed: u64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self { boundary: Boundary::Open, keep_snapshots: false, master_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealRun {
    pub seed: RngSeed,
    pub initial_grid: LandUseGrid,
    pub final_grid: LandUseGrid,
    pub records: Vec<SampleRecord>,
}

/// Anneals a uniformly random initial pattern. The threshold in `priorities`
/// is ignored; temperatures come from `schedule`. Deterministic in
/// `(options.master_seed, seed)`.
pub fn run_anneal(
    field: &SuitabilityField,
    priorities: &PrioritySet,
    schedule: &AnnealSchedule,
    seed: RngSeed,
    kind: SamplerKind,
    options: &AnnealOptions,
) -> Result<AnnealRun> {
    schedule.validate()?;
    let mut rng = seed.rng(options.master_seed);
    let initial = LandUseGrid::random(field.rows(), field.cols(), field.types(), &mut rng)?
        .with_boundary(options.boundary)?;
    anneal_from(initial, field, priorities, schedule, seed, kind, options.keep_snapshots, rng)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn anneal_from<R: Rng>(
    initial: LandUseGrid,
    field: &SuitabilityField,
    priorities: &PrioritySet,
    schedule: &AnnealSchedule,
    seed: RngSeed,
    kind: SamplerKind,
    keep_snapshots: bool,
    rng: R,
) -> Result<AnnealRun> {
    let start = priorities.at_threshold(schedule.t_start);
    let mut chain = Chain::new(initial.clone(), field, start, kind, rng)?;

    for _ in 0..schedule.thermalize_sweeps {
        chain.sweep();
    }
    for k in 0..schedule.cool_sweeps {
        chain.set_threshold(schedule.cooling_temperature(k));
        chain.sweep();
    }
    chain.set_threshold(schedule.t_target);
    for _ in 0..schedule.equilibrate_sweeps {
        chain.sweep();
    }
    let mut records = Vec::with_capacity(schedule.record_count() as usize);
    for m in 1..=schedule.measure_sweeps {
        chain.sweep();
        if m % schedule.measure_interval == 0 {
            chain.resync();
            records.push(SampleRecord {
                sweep_index: chain.sweeps(),
                use_counts: chain.grid().use_counts(),
                energy: chain.energy(),
                snapshot: keep_snapshots.then(|| chain.grid().clone()),
            });
        }
    }
    Ok(AnnealRun { seed, initial_grid: initial, final_grid: chain.into_grid(), records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::total_energy;

    fn small_schedule() -> AnnealSchedule {
        AnnealSchedule {
            t_start: 5.0,
            t_target: 1.5,
            thermalize_sweeps: 10,
            cool_sweeps: 20,
            equilibrate_sweeps: 10,
            measure_sweeps: 40,
            measure_interval: 5,
        }
    }

    #[test]
    fn default_schedule_is_the_reference_protocol() {
        let s = AnnealSchedule::default();
        assert_eq!((s.t_start, s.t_target), (15.0, 1.0));
        assert_eq!(
            (s.thermalize_sweeps, s.cool_sweeps, s.equilibrate_sweeps, s.measure_sweeps, s.measure_interval),
            (1_000, 35_000, 10_000, 10_000, 50)
        );
        assert_eq!(s.record_count(), 200);
    }

    #[test]
    fn cooling_ramp_is_linear_and_ends_at_target() {
        let s = AnnealSchedule::default();
        assert_eq!(s.cooling_temperature(s.cool_sweeps - 1), 1.0);
        let step = s.cooling_temperature(0) - s.cooling_temperature(1);
        assert!((step - 14.0 / 35_000.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        let mut s = small_schedule();
        s.measure_interval = 0;
        assert!(s.validate().is_err());
        let mut s = small_schedule();
        s.t_start = 1.0;
        assert!(s.validate().is_err());
        let mut s = small_schedule();
        s.t_target = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn empty_schedule_leaves_grid_unchanged() {
        let field = SuitabilityField::zeros(4, 4, 3).unwrap();
        let p = PrioritySet::new(1.0, 0.0, 1.0).unwrap();
        let s = AnnealSchedule::fixed(1.0, 0, 0, 1);
        let run = run_anneal(&field, &p, &s, RngSeed(3), SamplerKind::WOLFF, &AnnealOptions::default()).unwrap();
        assert!(run.records.is_empty());
        assert_eq!(run.initial_grid, run.final_grid);
    }

    #[test]
    fn records_are_deterministic_and_consistent() {
        let scores = (0..6 * 5 * 3).map(|k| ((k * 5) % 4) as f64 - 1.0).collect();
        let field = SuitabilityField::from_scores(6, 5, 3, scores).unwrap();
        let p = PrioritySet::new(1.0, 1.0, 1.0).unwrap();
        let opts = AnnealOptions { keep_snapshots: true, ..AnnealOptions::default() };
        for kind in [SamplerKind::Metropolis, SamplerKind::WOLFF] {
            let a = run_anneal(&field, &p, &small_schedule(), RngSeed(42), kind, &opts).unwrap();
            let b = run_anneal(&field, &p, &small_schedule(), RngSeed(42), kind, &opts).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.records.len(), 8);
            for r in &a.records {
                assert_eq!(r.use_counts.iter().sum::<usize>(), 30);
                let snap = r.snapshot.as_ref().unwrap();
                let e = total_energy(snap, &field, &p.at_threshold(1.5)).unwrap();
                assert_eq!(e, r.energy);
            }
            assert_eq!(a.records[0].sweep_index, 45);
            let c = run_anneal(&field, &p, &small_schedule(), RngSeed(43), kind, &opts).unwrap();
            assert_ne!(a.records, c.records);
        }
    }
}

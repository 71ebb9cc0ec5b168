//! Independent annealing replicates on a worker pool.

use mola_core::sampler::{run_anneal, AnnealOptions, AnnealRun, AnnealSchedule, RngSeed, SampleRecord, SamplerKind};
use mola_core::{PrioritySet, SuitabilityField};
use rayon::prelude::*;

use crate::error::{MolaError, Result};

/// Runs of one priority setting, in the order the seeds were given.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSet {
    pub priorities: PrioritySet,
    pub schedule: AnnealSchedule,
    pub kind: SamplerKind,
    pub runs: Vec<AnnealRun>,
}

impl ReplicateSet {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        self.runs.iter().map(|r| r.seed.0)
    }

    /// `(seed, record)` for every record.
    pub fn records(&self) -> impl Iterator<Item = (u64, &SampleRecord)> + '_ {
        self.runs.iter().flat_map(|r| r.records.iter().map(move |rec| (r.seed.0, rec)))
    }

    /// Records without snapshots, pooled over seeds.
    pub fn pooled(&self) -> Vec<SampleRecord> {
        self.records()
            .map(|(_, r)| SampleRecord { snapshot: None, ..r.clone() })
            .collect()
    }

    pub fn record_count(&self) -> usize {
        self.runs.iter().map(|r| r.records.len()).sum()
    }
}

/// Worker pool with `parallelism` threads; 0 picks the machine default.
pub fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| MolaError::Pool(e.to_string()))
}

/// One [`run_anneal`] per seed. The result does not depend on `parallelism`
/// or on completion order.
pub fn run_replicates(
    field: &SuitabilityField,
    priorities: &PrioritySet,
    schedule: &AnnealSchedule,
    seeds: &[u64],
    kind: SamplerKind,
    options: &AnnealOptions,
    parallelism: usize,
) -> Result<ReplicateSet> {
    if seeds.is_empty() {
        return Err(MolaError::NoSeeds);
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(MolaError::DuplicateSeed(w[0]));
    }
    schedule.validate()?;
    priorities.validate()?;
    let runs = pool(parallelism)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| run_anneal(field, priorities, schedule, RngSeed(s), kind, options))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(ReplicateSet { priorities: *priorities, schedule: *schedule, kind, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> AnnealSchedule {
        AnnealSchedule {
            t_start: 10.0,
            t_target: 1.0,
            thermalize_sweeps: 5,
            cool_sweeps: 20,
            equilibrate_sweeps: 10,
            measure_sweeps: 20,
            measure_interval: 5,
        }
    }

    #[test]
    fn independent_of_parallelism() {
        let field = SuitabilityField::zeros(6, 6, 3).unwrap();
        let p = PrioritySet::new(1.0, 0.0, 1.0).unwrap();
        let opts = AnnealOptions { keep_snapshots: true, ..Default::default() };
        let seeds = [3, 1, 4, 15, 9];
        let a = run_replicates(&field, &p, &short(), &seeds, SamplerKind::WOLFF, &opts, 1).unwrap();
        let b = run_replicates(&field, &p, &short(), &seeds, SamplerKind::WOLFF, &opts, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seeds().collect::<Vec<_>>(), seeds);
        assert_eq!(a.record_count(), 5 * 4);
    }

    #[test]
    fn one_record_list_per_seed() {
        let field = SuitabilityField::zeros(4, 4, 3).unwrap();
        let p = PrioritySet::new(1.0, 0.0, 1.0).unwrap();
        let seeds: Vec<u64> = (0..300).collect();
        let set = run_replicates(&field, &p, &short(), &seeds, SamplerKind::Metropolis, &AnnealOptions::default(), 0)
            .unwrap();
        assert_eq!(set.runs.len(), 300);
        assert!(set.runs.iter().all(|r| r.records.len() == 4));
    }

    #[test]
    fn duplicate_and_empty_seeds_rejected() {
        let field = SuitabilityField::zeros(4, 4, 3).unwrap();
        let p = PrioritySet::new(1.0, 0.0, 1.0).unwrap();
        let o = AnnealOptions::default();
        let r = run_replicates(&field, &p, &short(), &[7, 7], SamplerKind::Metropolis, &o, 1);
        assert!(matches!(r, Err(MolaError::DuplicateSeed(7))));
        let r = run_replicates(&field, &p, &short(), &[], SamplerKind::Metropolis, &o, 1);
        assert!(matches!(r, Err(MolaError::NoSeeds)));
    }
}

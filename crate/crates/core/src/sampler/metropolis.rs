use rand::Rng;

use super::SweepStats;
use crate::error::Result;
use crate::lattice::{flip_delta_parts, LandUseGrid, NeighborTable, PrioritySet, SuitabilityField};

/// `N*M` single-parcel proposals, each to a uniformly chosen different type,
/// accepted with probability `min(1, exp(-dH/T))`.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    grid: &mut LandUseGrid,
    field: &SuitabilityField,
    priorities: &PrioritySet,
    rng: &mut R,
) -> Result<SweepStats> {
    field.check_compatible(grid)?;
    priorities.validate()?;
    let neighbors = NeighborTable::new(grid);
    Ok(sweep(grid, &neighbors, field, priorities, rng))
}

pub(crate) fn sweep<R: Rng + ?Sized>(
    grid: &mut LandUseGrid,
    neighbors: &NeighborTable,
    field: &SuitabilityField,
    priorities: &PrioritySet,
    rng: &mut R,
) -> SweepStats {
    let n = grid.len();
    let types = grid.types() as u8;
    let beta = 1.0 / priorities.threshold;
    // Boltzmann factors of pure compactness changes, O1 delta in -16..=16
    let mut compact_factor = [0.0f64; 17];
    for (k, w) in compact_factor.iter_mut().enumerate() {
        let d1 = 2 * k as i64 - 16;
        *w = libm::exp(-beta * priorities.compactness * d1 as f64);
    }
    let mut stats = SweepStats { proposals: n, ..SweepStats::default() };
    for _ in 0..n {
        let idx = rng.random_range(0..n);
        let old = grid.code_at(idx);
        let mut new = rng.random_range(0..types - 1);
        if new >= old {
            new += 1;
        }
        let (d1, d2) = flip_delta_parts(grid, neighbors, field, idx, new);
        let dh = priorities.compactness * d1 as f64 + priorities.suitability * d2;
        let ok = if dh > 0.0 && (d2 == 0.0 || priorities.suitability == 0.0) {
            rng.random::<f64>() < compact_factor[((d1 + 16) / 2) as usize]
        } else {
            accept(dh, beta, rng)
        };
        if ok {
            grid.set_code(idx, new);
            stats.accepted += 1;
            stats.delta_compactness += d1;
            stats.delta_suitability += d2;
        }
    }
    stats
}

#[inline]
pub(crate) fn accept<R: Rng + ?Sized>(dh: f64, beta: f64, rng: &mut R) -> bool {
    dh <= 0.0 || rng.random::<f64>() < libm::exp(-dh * beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{total_energy, LandUseType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_delta_always_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(accept(0.0, 1.0, &mut rng));
        }
    }

    #[test]
    fn near_zero_temperature_limit() {
        // One parcel away from the P_S = 0 ground state.
        let field = SuitabilityField::zeros(3, 3, 3).unwrap();
        let p = PrioritySet::new(1.0, 0.0, 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);

        let ground = LandUseGrid::uniform(3, 3, 3, LandUseType(0)).unwrap();
        for _ in 0..50 {
            let mut g = ground.clone();
            let st = metropolis_sweep(&mut g, &field, &p, &mut rng).unwrap();
            assert_eq!(st.accepted, 0);
            assert_eq!(g, ground);
        }

        // Downhill flips back to the ground state are always taken.
        let beta = 1.0 / p.threshold;
        assert!((0..1000).all(|_| accept(-16.0, beta, &mut rng)));
        assert!((0..1000).all(|_| !accept(16.0, beta, &mut rng)));
        let mut g = ground.clone();
        g.set(1, 1, LandUseType(2)).unwrap();
        for _ in 0..20 {
            metropolis_sweep(&mut g, &field, &p, &mut rng).unwrap();
        }
        assert_eq!(g, ground);
    }

    #[test]
    fn sweep_stats_track_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let scores = (0..5 * 6 * 3).map(|k| ((k * 7) % 5) as f64 - 2.0).collect();
        let field = SuitabilityField::from_scores(5, 6, 3, scores).unwrap();
        let p = PrioritySet::new(1.0, 0.7, 1.3).unwrap();
        let mut g = LandUseGrid::random(5, 6, 3, &mut rng).unwrap();
        let e0 = total_energy(&g, &field, &p).unwrap();
        let mut d1 = 0;
        let mut d2 = 0.0;
        for _ in 0..200 {
            let st = metropolis_sweep(&mut g, &field, &p, &mut rng).unwrap();
            assert_eq!(st.proposals, 30);
            d1 += st.delta_compactness;
            d2 += st.delta_suitability;
        }
        let e1 = total_energy(&g, &field, &p).unwrap();
        assert_eq!(e0.compactness + d1 as f64, e1.compactness);
        assert_eq!(e0.suitability + d2, e1.suitability);
    }
}

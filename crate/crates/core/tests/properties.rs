use std::f64::consts::PI;

use mola_core::analysis::{
    build_histogram, detect_flashpoints, gray_area_map, landau_surface, ternary_project, wrap_angle, Axis,
    JointHistogram, UseCountSeries,
};
use mola_core::lattice::{compactness_objective, delta_energy_flip, suitability_objective, total_energy};
use mola_core::nucleation::{flip_threshold, predict_flashpoint_priority, BoundaryMetric, RegionMask};
use mola_core::sampler::SampleRecord;
use mola_core::{EnergyBreakdown, LandUseGrid, LandUseType, PrioritySet, SuitabilityField};
use proptest::prelude::*;

fn grid_and_field() -> impl Strategy<Value = (LandUseGrid, SuitabilityField)> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        (
            prop::collection::vec(0u8..3, r * c),
            prop::collection::vec(-8i32..8, r * c * 3),
        )
            .prop_map(move |(cells, scores)| {
                (
                    LandUseGrid::from_cells(r, c, 3, cells).unwrap(),
                    SuitabilityField::from_scores(r, c, 3, scores.into_iter().map(|v| v as f64 / 4.0).collect()).unwrap(),
                )
            })
    })
}

/// Matching Moore pairs counted pair by pair.
fn matching_pairs(g: &LandUseGrid) -> i64 {
    let (r, c) = (g.rows() as isize, g.cols() as isize);
    let mut n = 0;
    for i in 0..r {
        for j in 0..c {
            for (di, dj) in [(0, 1), (1, -1), (1, 0), (1, 1)] {
                let (a, b) = (i + di, j + dj);
                if a >= 0 && a < r && b >= 0 && b < c && g.get(i as usize, j as usize).unwrap() == g.get(a as usize, b as usize).unwrap() {
                    n += 1;
                }
            }
        }
    }
    n
}

fn permuted_field(f: &SuitabilityField, perm: &[u8; 3]) -> SuitabilityField {
    let mut out = f.clone();
    for i in 0..f.rows() {
        for j in 0..f.cols() {
            for s in 0..3 {
                out.set(i, j, perm[s] as usize, f.score(i, j, s)).unwrap();
            }
        }
    }
    out
}

const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

proptest! {
    #[test]
    fn compactness_counts_each_pair_twice((g, _) in grid_and_field()) {
        prop_assert_eq!(compactness_objective(&g), -2 * matching_pairs(&g));
    }

    #[test]
    fn energy_invariant_under_relabeling((g, f) in grid_and_field(), k in 0usize..6) {
        let p = PrioritySet::new(1.0, 0.7, 1.0).unwrap();
        let mut g2 = g.clone();
        g2.relabel(&PERMS[k]).unwrap();
        let f2 = permuted_field(&f, &PERMS[k]);
        prop_assert_eq!(total_energy(&g, &f, &p).unwrap(), total_energy(&g2, &f2, &p).unwrap());
        prop_assert_eq!(g.use_counts().iter().sum::<usize>(), g2.use_counts().iter().sum::<usize>());
    }

    #[test]
    fn energy_is_linear_in_weights((g, f) in grid_and_field(), pc in 0.0f64..5.0, ps in 0.0f64..5.0) {
        prop_assume!(pc > 0.0 || ps > 0.0);
        let e = total_energy(&g, &f, &PrioritySet::new(pc, ps, 1.0).unwrap()).unwrap();
        let o1 = compactness_objective(&g) as f64;
        let o2 = suitability_objective(&g, &f).unwrap();
        prop_assert_eq!(e, EnergyBreakdown { compactness: o1, suitability: o2, total: pc * o1 + ps * o2 });
    }

    #[test]
    fn mirror_invariance((g, f) in grid_and_field()) {
        let p = PrioritySet::new(1.0, 1.3, 1.0).unwrap();
        let e = total_energy(&g, &f, &p).unwrap();
        let (mut g1, mut f1) = (g.clone(), f.clone());
        g1.mirror_cols();
        f1.mirror_cols();
        prop_assert_eq!(total_energy(&g1, &f1, &p).unwrap(), e);
        g1.mirror_rows();
        f1.mirror_rows();
        prop_assert_eq!(total_energy(&g1, &f1, &p).unwrap(), e);
    }

    #[test]
    fn flip_delta_matches_recompute((g, f) in grid_and_field(), pick in any::<prop::sample::Index>(), s in 0u8..3) {
        let p = PrioritySet::new(1.0, 0.9, 1.0).unwrap();
        let idx = pick.index(g.len());
        let cell = (idx / g.cols(), idx % g.cols());
        let d = delta_energy_flip(&g, &f, &p, cell, LandUseType(s)).unwrap();
        let mut g2 = g.clone();
        g2.set(cell.0, cell.1, LandUseType(s)).unwrap();
        let want = total_energy(&g2, &f, &p).unwrap().total - total_energy(&g, &f, &p).unwrap().total;
        prop_assert!((d - want).abs() < 1e-9, "{} vs {}", d, want);
    }

    #[test]
    fn gray_area_modulus_bounded_and_relabel_rotates(cells in prop::collection::vec(prop::collection::vec(0u8..3, 12), 1..20)) {
        let grids: Vec<_> = cells.iter().map(|c| LandUseGrid::from_cells(3, 4, 3, c.clone()).unwrap()).collect();
        let map = gray_area_map(&grids, None).unwrap();
        prop_assert!(map.modulus.iter().all(|&m| (0.0..=1.0).contains(&m)));
        let shifted: Vec<_> = grids.iter().map(|g| { let mut g = g.clone(); g.relabel(&[1, 2, 0]).unwrap(); g }).collect();
        let rot = gray_area_map(&shifted, None).unwrap();
        let (a0, a1) = (map.arguments(), rot.arguments());
        for k in 0..12 {
            prop_assert!((map.modulus[k] - rot.modulus[k]).abs() < 1e-12);
            if map.modulus[k] > 1e-9 {
                prop_assert!(wrap_angle(a1[k] - a0[k] - 2.0 * PI / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ternary_round_trip(n0 in 0usize..500, n1 in 0usize..500, n2 in 0usize..500) {
        let n = n0 + n1 + n2;
        prop_assume!(n > 0);
        let p = ternary_project(&[n0, n1, n2], n).unwrap();
        // inverse written out independently
        let w2 = p.y / (3f64.sqrt() / 2.0);
        let w1 = p.x - w2 / 2.0;
        for (w, c) in [1.0 - w1 - w2, w1, w2].iter().zip([n0, n1, n2]) {
            prop_assert!((w - c as f64 / n as f64).abs() < 1e-12);
        }
        prop_assert!(p.y >= 0.0 && p.y <= 3f64.sqrt() * p.x.min(1.0 - p.x) + 1e-12);
    }

    #[test]
    fn flashpoints_scale_invariant(rows in prop::collection::vec(prop::collection::vec(0u32..200, 3), 2..10), k in 1u32..50) {
        let ps: Vec<f64> = (0..rows.len()).map(|i| i as f64).collect();
        let a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let b: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| (v * k) as f64).collect()).collect();
        let reps = vec![1; rows.len()];
        let sa = detect_flashpoints(&UseCountSeries::new(ps.clone(), a, reps.clone()).unwrap(), 0.1).unwrap();
        let sb = detect_flashpoints(&UseCountSeries::new(ps, b, reps).unwrap(), 0.1).unwrap();
        let key = |s: &mola_core::analysis::FlashpointScan| s.flashpoints.iter().map(|f| (f.index, f.triggers.iter().map(|t| t.ty).collect::<Vec<_>>())).collect::<Vec<_>>();
        prop_assert_eq!(key(&sa), key(&sb));
        prop_assert_eq!(sa.warnings, sb.warnings);
    }

    #[test]
    fn landau_gap_is_log_ratio(a in 1u64..400, b in 1u64..400) {
        let rec = |n: usize| SampleRecord { sweep_index: 0, use_counts: vec![n, 10 - n], energy: EnergyBreakdown::default(), snapshot: None };
        let records: Vec<_> = (0..a).map(|_| rec(3)).chain((0..b).map(|_| rec(7))).collect();
        let s = landau_surface(&build_histogram(&records, Axis::Type(0)).unwrap()).unwrap();
        let gap = s.get(7).unwrap() - s.get(3).unwrap();
        prop_assert!((gap - (a as f64 / b as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn marginal_equals_direct_histogram(counts in prop::collection::vec((0usize..20, 0usize..20), 1..60), x in 0usize..3) {
        let records: Vec<_> = counts
            .iter()
            .filter(|(a, b)| a + b <= 20)
            .map(|&(a, b)| SampleRecord { sweep_index: 0, use_counts: vec![a, b, 20 - a - b], energy: EnergyBreakdown::default(), snapshot: None })
            .collect();
        prop_assume!(!records.is_empty());
        let joint = JointHistogram::from_records(&records).unwrap();
        prop_assert_eq!(joint.marginal(x).unwrap(), build_histogram(&records, Axis::Type(x)).unwrap());
    }

    #[test]
    fn rectangle_prediction_matches_direct_energy(
        (rows, cols, r0, c0, h, w) in (3usize..12, 3usize..12).prop_flat_map(|(rows, cols)| {
            (Just(rows), Just(cols), 0..rows, 0..cols).prop_flat_map(|(rows, cols, r0, c0)| {
                (Just(rows), Just(cols), Just(r0), Just(c0), 1..=rows - r0, 1..=cols - c0)
            })
        }),
        margin in 1u32..8,
        pc in 1u32..4,
        ps in 0.0f64..20.0,
    ) {
        prop_assume!(h * w < rows * cols);
        let m = margin as f64 / 2.0;
        let mut field = SuitabilityField::zeros(rows, cols, 3).unwrap();
        let mask = RegionMask::rectangle(rows, cols, r0, c0, h, w).unwrap();
        for i in 0..rows {
            for j in 0..cols {
                field.set(i, j, 0, 1.0).unwrap();
                if mask.contains(i, j) {
                    field.set(i, j, 1, 1.0 + m).unwrap();
                }
            }
        }
        let pc = pc as f64;
        let pred = predict_flashpoint_priority(&mask, &field, LandUseType(0), LandUseType(1), pc, BoundaryMetric::MoorePairs).unwrap();
        let bg = LandUseGrid::uniform(rows, cols, 3, LandUseType(0)).unwrap();
        let mut fl = bg.clone();
        for i in r0..r0 + h {
            for j in c0..c0 + w {
                fl.set(i, j, LandUseType(1)).unwrap();
            }
        }
        let p = PrioritySet::new(pc, ps, 1.0).unwrap();
        let dh = total_energy(&fl, &field, &p).unwrap().total - total_energy(&bg, &field, &p).unwrap().total;
        // sign of the direct comparison agrees with the threshold, away from the tie
        if (ps - pred.p_s_star).abs() > 1e-9 {
            prop_assert_eq!(dh < 0.0, ps > pred.p_s_star, "dh {} ps {} star {}", dh, ps, pred.p_s_star);
        }
        // scale covariance in the margin
        let mut field2 = field.clone();
        for i in r0..r0 + h {
            for j in c0..c0 + w {
                field2.set(i, j, 1, 1.0 + 2.0 * m).unwrap();
            }
        }
        let pred2 = predict_flashpoint_priority(&mask, &field2, LandUseType(0), LandUseType(1), pc, BoundaryMetric::MoorePairs).unwrap();
        prop_assert!((pred2.p_s_star - pred.p_s_star / 2.0).abs() < 1e-12);
    }

    #[test]
    fn larger_squares_flip_more_easily(a in 1usize..10, dem in 0.5f64..10.0) {
        let small = RegionMask::rectangle(24, 24, 2, 2, a, a).unwrap();
        let big = RegionMask::rectangle(24, 24, 2, 2, a + 1, a + 1).unwrap();
        prop_assert!(flip_threshold(&big, dem).unwrap() < flip_threshold(&small, dem).unwrap());
        prop_assert!((flip_threshold(&small, 3.0 * dem).unwrap() - 3.0 * flip_threshold(&small, dem).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn strong_suitability_recovers_argmax_counts() {
    use mola_core::analysis::optimal_counts;
    use mola_core::sampler::{run_anneal, AnnealOptions, AnnealSchedule, RngSeed, SamplerKind};
    use rand::Rng;

    let mut rng = RngSeed(4).rng(0);
    // a random ordering of 0, 1, 2 per parcel: every gap is at least 1
    let mut scores = Vec::with_capacity(300);
    for _ in 0..100 {
        let top = rng.random_range(0..3usize);
        let mid = (top + rng.random_range(1..3usize)) % 3;
        let mut row = [0.0; 3];
        row[top] = 2.0;
        row[mid] = 1.0;
        scores.extend(row);
    }
    let field = SuitabilityField::from_scores(10, 10, 3, scores).unwrap();
    let mut want = vec![0usize; 3];
    for k in 0..100 {
        let row = field.at(k);
        let best = (0..3).max_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap()).unwrap();
        want[best] += 1;
    }
    let p = PrioritySet::new(1.0, 200.0, 1.0).unwrap();
    let schedule = AnnealSchedule { t_start: 20.0, t_target: 1.0, thermalize_sweeps: 20, cool_sweeps: 200, equilibrate_sweeps: 50, measure_sweeps: 100, measure_interval: 10 };
    let mut records = Vec::new();
    for seed in 0..4 {
        records.extend(run_anneal(&field, &p, &schedule, RngSeed(seed), SamplerKind::Metropolis, &AnnealOptions::default()).unwrap().records);
    }
    let opt = optimal_counts(&records, 3).unwrap();
    assert_eq!(opt.per_type, want);
    assert!(!opt.degenerate);
}

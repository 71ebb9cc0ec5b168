use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::histogram::JointHistogram;
use super::landau::{find_minima, landau_surface};
use crate::error::{Error, Result};
use crate::sampler::SampleRecord;

/// A peak of the joint use-count distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMode {
    /// Most frequent exact count vector inside the peak cell.
    pub counts: Vec<usize>,
    /// `F` of the coarse cell relative to the most populated cell.
    pub f: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalCounts {
    /// Global minimum of the smoothed Landau surface of each `N_X`.
    pub per_type: Vec<usize>,
    /// Peaks of the joint distribution within the degeneracy tolerance of the
    /// deepest one, deepest first.
    pub modes: Vec<CountMode>,
    /// More than one peak qualifies: the minimum is symmetry-degenerate and
    /// `per_type` alone is not a pattern.
    pub degenerate: bool,
}

impl OptimalCounts {
    /// Count vector representing the optimum: the deepest joint peak when
    /// degenerate, otherwise the per-type minima.
    pub fn representative(&self) -> &[usize] {
        if self.degenerate {
            &self.modes[0].counts
        } else {
            &self.per_type
        }
    }
}

/// Options for [`optimal_counts`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalOptions {
    pub smoothing_window: usize,
    /// Cell width (parcels) used to coarse-grain the joint distribution.
    pub mode_width: usize,
    /// Peaks with `F` at most this far above the deepest are reported.
    pub degeneracy_tolerance: f64,
}

impl OptimalOptions {
    pub fn for_sites(sites: usize) -> Self {
        Self {
            smoothing_window: super::DEFAULT_SMOOTHING_WINDOW,
            mode_width: (sites / 30).max(1),
            degeneracy_tolerance: core::f64::consts::LN_2,
        }
    }
}

/// Optimal use counts of a pooled ensemble of samples.
pub fn optimal_counts(records: &[SampleRecord], smoothing_window: usize) -> Result<OptimalCounts> {
    let first = records.first().ok_or(Error::Empty("ensemble has no samples"))?;
    let sites = first.use_counts.iter().sum();
    let opts = OptimalOptions { smoothing_window, ..OptimalOptions::for_sites(sites) };
    optimal_counts_with(records, &opts)
}

pub fn optimal_counts_with(records: &[SampleRecord], opts: &OptimalOptions) -> Result<OptimalCounts> {
    let joint = JointHistogram::from_records(records)?;
    let per_type = (0..joint.types)
        .map(|x| {
            let surface = landau_surface(&joint.marginal(x)?)?;
            Ok(find_minima(&surface, opts.smoothing_window)[0].bin)
        })
        .collect::<Result<Vec<_>>>()?;
    let modes = joint_modes(&joint, opts.mode_width.max(1), opts.degeneracy_tolerance);
    let degenerate = modes.len() > 1;
    Ok(OptimalCounts { per_type, modes, degenerate })
}

fn joint_modes(joint: &JointHistogram, width: usize, tolerance: f64) -> Vec<CountMode> {
    let dims = joint.types - 1;
    let mut cells: BTreeMap<Vec<usize>, (u64, Vec<usize>, u64)> = BTreeMap::new();
    for (counts, &n) in &joint.bins {
        let key: Vec<usize> = counts[..dims].iter().map(|c| c / width).collect();
        let cell = cells.entry(key).or_insert((0, counts.clone(), 0));
        cell.0 += n;
        if n > cell.2 {
            cell.1 = counts.clone();
            cell.2 = n;
        }
    }
    let offsets = neighbor_offsets(dims);
    let mut peaks: Vec<(&Vec<usize>, u64, &Vec<usize>)> = Vec::new();
    for (key, (n, best, _)) in &cells {
        let is_peak = offsets.iter().all(|off| {
            let mut nb = Vec::with_capacity(dims);
            for (k, o) in key.iter().zip(off) {
                let v = *k as isize + o;
                if v < 0 {
                    return true;
                }
                nb.push(v as usize);
            }
            match cells.get(&nb) {
                Some((m, _, _)) => *n > *m || (*n == *m && key < &nb),
                None => true,
            }
        });
        if is_peak {
            peaks.push((key, *n, best));
        }
    }
    let max = peaks.iter().map(|p| p.1).max().unwrap_or(1) as f64;
    peaks.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    // Peaks closer than three cells are treated as one.
    let mut kept: Vec<(&Vec<usize>, CountMode)> = Vec::new();
    for (key, n, best) in peaks {
        let f = libm::log(max / n as f64);
        if f > tolerance {
            continue;
        }
        let close = kept
            .iter()
            .any(|(k, _)| k.iter().zip(key).all(|(a, b)| a.abs_diff(*b) < 3));
        if !close {
            kept.push((key, CountMode { counts: best.clone(), f, samples: n }));
        }
    }
    kept.into_iter().map(|(_, m)| m).collect()
}

fn neighbor_offsets(dims: usize) -> Vec<Vec<isize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1isize, 0, 1].into_iter().map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&d| d != 0));
    out
}

/// Indices of records whose counts lie within `tolerance` (max-norm) of
/// `target`; falls back to the nearest records when none do.
pub fn samples_near(records: &[SampleRecord], target: &[usize], tolerance: usize) -> Vec<usize> {
    let dist = |r: &SampleRecord| {
        r.use_counts.iter().zip(target).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0)
    };
    let within: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| dist(r) <= tolerance)
        .map(|(k, _)| k)
        .collect();
    if !within.is_empty() {
        return within;
    }
    let best = records.iter().map(dist).min().unwrap_or(0);
    records.iter().enumerate().filter(|(_, r)| dist(r) == best).map(|(k, _)| k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::EnergyBreakdown;

    fn rec(counts: &[usize]) -> SampleRecord {
        SampleRecord { sweep_index: 0, use_counts: counts.to_vec(), energy: EnergyBreakdown::default(), snapshot: None }
    }

    #[test]
    fn point_mass() {
        let records: Vec<_> = (0..20).map(|_| rec(&[500, 300, 100])).collect();
        let opt = optimal_counts(&records, 3).unwrap();
        assert_eq!(opt.per_type, [500, 300, 100]);
        assert!(!opt.degenerate);
        assert_eq!(opt.representative(), [500, 300, 100]);
    }

    #[test]
    fn three_fold_symmetric_ensemble_is_degenerate() {
        // Each single-use basin holds a third of the samples with small jitter.
        let mut records = Vec::new();
        for k in 0..300usize {
            let j = k % 5;
            let major = 890 + j;
            let (a, b) = (j, 900 - major - j);
            records.push(match k % 3 {
                0 => rec(&[major, a, b]),
                1 => rec(&[b, major, a]),
                _ => rec(&[a, b, major]),
            });
        }
        let opt = optimal_counts(&records, 3).unwrap();
        assert!(opt.degenerate);
        assert_eq!(opt.modes.len(), 3);
        let mut majors: Vec<usize> = opt
            .modes
            .iter()
            .map(|m| m.counts.iter().position(|&c| c >= 890).unwrap())
            .collect();
        majors.sort();
        assert_eq!(majors, [0, 1, 2]);
        // per-type minima sit at the minority side and do not form a pattern
        assert!(opt.per_type.iter().sum::<usize>() < 900);
    }

    #[test]
    fn empty_ensemble_rejected() {
        assert!(matches!(optimal_counts(&[], 3), Err(Error::Empty(_))));
    }

    #[test]
    fn nearest_samples() {
        let records = vec![rec(&[10, 0]), rec(&[7, 3]), rec(&[2, 8])];
        assert_eq!(samples_near(&records, &[9, 1], 1), [0]);
        assert_eq!(samples_near(&records, &[9, 1], 2), [0, 1]);
        assert_eq!(samples_near(&records, &[5, 5], 0), [1]);
    }

    #[test]
    fn offsets_cover_chebyshev_ball() {
        assert_eq!(neighbor_offsets(1).len(), 2);
        assert_eq!(neighbor_offsets(2).len(), 8);
    }
}

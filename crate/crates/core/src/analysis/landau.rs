use alloc::vec::Vec;

use super::histogram::{Axis, UseCountHistogram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauPoint {
    pub bin: usize,
    pub f: f64,
    pub count: u64,
}

/// `F(bin) = -ln(count / total) - offset` on observed bins, ordered by bin.
/// The offset makes `min F = 0`. Unobserved bins carry no value.
#[derive(Debug, Clone, PartialEq)]
pub struct LandauSurface {
    pub axis: Axis,
    pub points: Vec<LandauPoint>,
    pub offset: f64,
    pub total_samples: u64,
}

impl LandauSurface {
    pub fn get(&self, bin: usize) -> Option<f64> {
        self.points.binary_search_by_key(&bin, |p| p.bin).ok().map(|k| self.points[k].f)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn landau_surface(hist: &UseCountHistogram) -> Result<LandauSurface> {
    if hist.total_samples == 0 || hist.bins.is_empty() {
        return Err(Error::Empty("histogram has no samples"));
    }
    let max = hist.bins.values().copied().max().unwrap_or(1);
    let total = hist.total_samples as f64;
    let points = hist
        .bins
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&bin, &count)| LandauPoint { bin, f: libm::log(max as f64 / count as f64), count })
        .collect();
    Ok(LandauSurface {
        axis: hist.axis,
        points,
        offset: -libm::log(max as f64 / total),
        total_samples: hist.total_samples,
    })
}

/// Centered moving average; the window is truncated at the ends. A window of
/// 0 or 1 returns the input unchanged.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let left = (window - 1) / 2;
    let right = window - 1 - left;
    (0..values.len())
        .map(|k| {
            let lo = k.saturating_sub(left);
            let hi = (k + right + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// A local minimum of a (smoothed) surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub bin: usize,
    pub f: f64,
    /// Height of the lowest barrier separating this minimum from a lower one;
    /// infinite for the global minimum.
    pub prominence: f64,
}

/// Moving average of `F` over the observed bins lying within a window of
/// `window` consecutive bin values centered on each point. Gaps in the
/// histogram are skipped rather than filled.
pub fn smooth_surface(surface: &LandauSurface, window: usize) -> Vec<f64> {
    let pts = &surface.points;
    if window <= 1 {
        return pts.iter().map(|p| p.f).collect();
    }
    let left = (window - 1) / 2;
    let right = window - 1 - left;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut out = Vec::with_capacity(pts.len());
    for p in pts {
        while hi < pts.len() && pts[hi].bin <= p.bin + right {
            hi += 1;
        }
        while pts[lo].bin + left < p.bin {
            lo += 1;
        }
        let sum: f64 = pts[lo..hi].iter().map(|q| q.f).sum();
        out.push(sum / (hi - lo) as f64);
    }
    out
}

/// Local minima of the surface after [`smooth_surface`] with
/// `smoothing_window`, ordered by `F` ascending and then by bin. A flat run of
/// equal values counts once, at its lowest bin. A run of unobserved bins
/// wider than the window acts as an infinite barrier.
pub fn find_minima(surface: &LandauSurface, smoothing_window: usize) -> Vec<Minimum> {
    let f = smooth_surface(surface, smoothing_window);
    let n = f.len();
    let max_gap = smoothing_window.max(1);
    // gap[k]: points k and k+1 are separated by unobserved territory
    let gap: Vec<bool> = surface.points.windows(2).map(|w| w[1].bin - w[0].bin > max_gap).collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        let mut end = k;
        while end + 1 < n && !gap[end] && f[end + 1] == f[k] {
            end += 1;
        }
        let left_ok = k == 0 || gap[k - 1] || f[k - 1] > f[k];
        let right_ok = end + 1 == n || gap[end] || f[end + 1] > f[k];
        if left_ok && right_ok {
            out.push(Minimum { bin: surface.points[k].bin, f: f[k], prominence: prominence(&f, &gap, k, end) });
        }
        k = end + 1;
    }
    out.sort_by(|a, b| a.f.total_cmp(&b.f).then(a.bin.cmp(&b.bin)));
    if let Some(first) = out.first_mut() {
        first.prominence = f64::INFINITY;
    }
    out
}

fn prominence(f: &[f64], gap: &[bool], start: usize, end: usize) -> f64 {
    let v = f[start];
    let mut best = f64::INFINITY;
    // walk each way until something strictly lower appears
    let mut barrier = v;
    for k in (0..start).rev() {
        if gap[k] {
            barrier = f64::INFINITY;
        }
        barrier = barrier.max(f[k]);
        if f[k] < v {
            best = best.min(barrier - v);
            break;
        }
    }
    let mut barrier = v;
    for k in end + 1..f.len() {
        if gap[k - 1] {
            barrier = f64::INFINITY;
        }
        barrier = barrier.max(f[k]);
        if f[k] < v {
            best = best.min(barrier - v);
            break;
        }
    }
    best
}

/// Minima whose prominence is at least `min_depth`.
pub fn significant_minima(surface: &LandauSurface, smoothing_window: usize, min_depth: f64) -> Vec<Minimum> {
    find_minima(surface, smoothing_window)
        .into_iter()
        .filter(|m| m.prominence >= min_depth)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    fn hist(bins: &[(usize, u64)]) -> UseCountHistogram {
        let bins: BTreeMap<usize, u64> = bins.iter().copied().collect();
        let total_samples = bins.values().sum();
        UseCountHistogram { axis: Axis::Type(0), sites: 900, types: 3, bins, total_samples }
    }

    #[test]
    fn two_bin_arithmetic() {
        let s = landau_surface(&hist(&[(100, 500), (200, 1500)])).unwrap();
        assert_eq!(s.get(200), Some(0.0));
        assert!((s.get(100).unwrap() - libm::log(3.0)).abs() < 1e-15);
        assert_eq!(s.get(150), None);
    }

    #[test]
    fn degenerate_and_uniform() {
        let s = landau_surface(&hist(&[(42, 7)])).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.get(42), Some(0.0));
        let s = landau_surface(&hist(&[(1, 4), (5, 4), (9, 4), (11, 4)])).unwrap();
        assert!(s.points.iter().all(|p| p.f == 0.0));
    }

    #[test]
    fn empty_histogram_rejected() {
        assert!(landau_surface(&hist(&[])).is_err());
    }

    #[test]
    fn convex_surface_has_one_minimum() {
        let s = LandauSurface {
            axis: Axis::Type(0),
            points: (0..50)
                .map(|b| LandauPoint { bin: b, f: 0.01 * (b as f64 - 20.3) * (b as f64 - 20.3), count: 1 })
                .collect(),
            offset: 0.0,
            total_samples: 50,
        };
        for w in [1, 3, 5] {
            let m = find_minima(&s, w);
            assert_eq!(m.len(), 1);
            assert_eq!(m[0].bin, 20);
        }
    }

    #[test]
    fn symmetric_double_well() {
        // F = -ln of two equal-weight Gaussians at 30 and 70.
        let g = |x: f64, mu: f64| libm::exp(-(x - mu) * (x - mu) / (2.0 * 36.0));
        let points: Vec<_> = (0..=100)
            .map(|b| {
                let x = b as f64;
                LandauPoint { bin: b, f: -libm::log(g(x, 30.0) + g(x, 70.0)), count: 1 }
            })
            .collect();
        let s = LandauSurface { axis: Axis::Type(0), points, offset: 0.0, total_samples: 101 };
        let m = significant_minima(&s, 3, 0.5);
        assert_eq!(m.len(), 2);
        let mut bins = [m[0].bin, m[1].bin];
        bins.sort();
        assert_eq!(bins, [30, 70]);
        assert!((m[0].f - m[1].f).abs() < 1e-9);
        // equal depths: the lower bin wins the tie
        assert_eq!(m[0].bin, 30);
    }

    #[test]
    fn flat_run_reports_lowest_bin() {
        let s = landau_surface(&hist(&[(1, 2), (2, 5), (3, 5), (4, 1)])).unwrap();
        let m = find_minima(&s, 1);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].bin, 2);
    }

    #[test]
    fn prominence_separates_noise_from_wells() {
        let f = [3.0, 0.0, 1.0, 0.9, 1.2, 5.0, 0.5, 4.0];
        let points = f.iter().enumerate().map(|(b, &f)| LandauPoint { bin: b, f, count: 1 }).collect();
        let s = LandauSurface { axis: Axis::Type(0), points, offset: 0.0, total_samples: 8 };
        let all = find_minima(&s, 1);
        assert_eq!(all.iter().map(|m| m.bin).collect::<Vec<_>>(), [1, 6, 3]);
        assert!((all[1].prominence - 4.5).abs() < 1e-12);
        assert!((all[2].prominence - 0.1).abs() < 1e-12);
        assert_eq!(significant_minima(&s, 1, 1.0).len(), 2);
    }

    #[test]
    fn unobserved_gap_separates_wells() {
        let s = landau_surface(&hist(&[(0, 50), (1, 60), (2, 40), (40, 20), (41, 30), (42, 10)])).unwrap();
        let m = find_minima(&s, 3);
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].prominence, f64::INFINITY);
    }

    #[test]
    fn smoothing_window() {
        assert_eq!(smooth(&[3.0, 0.0, 3.0, 6.0], 3), [1.5, 2.0, 3.0, 4.5]);
        assert_eq!(smooth(&[1.0, 2.0], 1), [1.0, 2.0]);
    }
}

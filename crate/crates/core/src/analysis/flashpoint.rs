use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Optimal use counts along an increasing sequence of suitability priorities.
#[derive(Debug, Clone, PartialEq)]
pub struct UseCountSeries {
    pub priorities: Vec<f64>,
    /// `counts[n][x]` is `N_X` at `priorities[n]`.
    pub counts: Vec<Vec<f64>>,
    /// Replicates behind each point.
    pub replicates: Vec<usize>,
}

impl UseCountSeries {
    pub fn new(priorities: Vec<f64>, counts: Vec<Vec<f64>>, replicates: Vec<usize>) -> Result<Self> {
        if priorities.len() != counts.len() || priorities.len() != replicates.len() {
            return Err(Error::InvalidArgument("series columns differ in length"));
        }
        if priorities.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("priorities must be strictly increasing"));
        }
        let types = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|c| c.len() != types || c.iter().any(|v| !(*v >= 0.0))) {
            return Err(Error::InvalidArgument("counts must be non-negative with one entry per type"));
        }
        Ok(Self { priorities, counts, replicates })
    }

    pub fn len(&self) -> usize {
        self.priorities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priorities.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trigger {
    pub ty: usize,
    pub rel_change: f64,
}

/// Interval `(P_S^n, P_S^{n+1})` where at least one type changed by more than
/// the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct Flashpoint {
    pub index: usize,
    pub p_low: f64,
    pub p_high: f64,
    pub triggers: Vec<Trigger>,
}

/// A type absent on both sides of an interval; it was skipped there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroDenominator {
    pub index: usize,
    pub ty: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlashpointScan {
    pub flashpoints: Vec<Flashpoint>,
    pub warnings: Vec<ZeroDenominator>,
}

/// Symmetric relative change `|b - a| / ((a + b) / 2)`, `None` when both are 0.
pub fn relative_change(a: f64, b: f64) -> Option<f64> {
    let mean = 0.5 * (a + b);
    (mean != 0.0).then(|| (b - a).abs() / mean)
}

/// Flags every interval where some `N_X` changes by a symmetric relative
/// amount strictly greater than `alpha`.
pub fn detect_flashpoints(series: &UseCountSeries, alpha: f64) -> Result<FlashpointScan> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("flashpoint detection needs at least two priorities"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument("alpha must be finite and > 0"));
    }
    let mut scan = FlashpointScan::default();
    for n in 0..series.len() - 1 {
        let (lo, hi) = (&series.counts[n], &series.counts[n + 1]);
        let mut triggers = Vec::new();
        for ty in 0..lo.len() {
            match relative_change(lo[ty], hi[ty]) {
                None => scan.warnings.push(ZeroDenominator { index: n, ty }),
                Some(r) if r > alpha => triggers.push(Trigger { ty, rel_change: r }),
                Some(_) => {}
            }
        }
        if !triggers.is_empty() {
            scan.flashpoints.push(Flashpoint {
                index: n,
                p_low: series.priorities[n],
                p_high: series.priorities[n + 1],
                triggers,
            });
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(values: &[f64]) -> UseCountSeries {
        let p = (0..values.len()).map(|k| 0.1 * (k + 1) as f64).collect();
        let counts = values.iter().map(|&v| vec![v, 900.0 - v]).collect();
        UseCountSeries::new(p, counts, vec![300; values.len()]).unwrap()
    }

    #[test]
    fn unit_cases() {
        let s = UseCountSeries::new(vec![1.0, 1.1], vec![vec![100.0], vec![112.0]], vec![1, 1]).unwrap();
        let scan = detect_flashpoints(&s, 0.1).unwrap();
        assert_eq!(scan.flashpoints.len(), 1);
        assert!((scan.flashpoints[0].triggers[0].rel_change - 12.0 / 106.0).abs() < 1e-15);

        let s = UseCountSeries::new(vec![1.0, 1.1], vec![vec![100.0], vec![109.0]], vec![1, 1]).unwrap();
        assert!(detect_flashpoints(&s, 0.1).unwrap().flashpoints.is_empty());
    }

    #[test]
    fn constant_series_is_quiet() {
        assert!(detect_flashpoints(&series(&[300.0; 10]), 0.1).unwrap().flashpoints.is_empty());
    }

    #[test]
    fn one_flashpoint_lists_all_triggering_types() {
        let scan = detect_flashpoints(&series(&[300.0, 305.0, 600.0, 601.0]), 0.1).unwrap();
        assert_eq!(scan.flashpoints.len(), 1);
        let fp = &scan.flashpoints[0];
        assert_eq!(fp.index, 1);
        assert_eq!(fp.triggers.iter().map(|t| t.ty).collect::<Vec<_>>(), [0, 1]);
        assert!((fp.p_low - 0.2).abs() < 1e-12 && (fp.p_high - 0.3).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_is_a_warning() {
        let s = UseCountSeries::new(
            vec![1.0, 2.0, 3.0],
            vec![vec![0.0, 10.0], vec![0.0, 10.0], vec![5.0, 5.0]],
            vec![1; 3],
        )
        .unwrap();
        let scan = detect_flashpoints(&s, 0.1).unwrap();
        assert_eq!(scan.warnings, [ZeroDenominator { index: 0, ty: 0 }]);
        assert_eq!(scan.flashpoints.len(), 1);
        assert_eq!(scan.flashpoints[0].index, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(detect_flashpoints(&series(&[1.0]), 0.1).is_err());
        assert!(detect_flashpoints(&series(&[1.0, 2.0]), 0.0).is_err());
        assert!(UseCountSeries::new(vec![1.0, 1.0], vec![vec![1.0], vec![1.0]], vec![1, 1]).is_err());
    }
}

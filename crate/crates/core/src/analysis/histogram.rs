use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sampler::SampleRecord;

/// Projection of a use-count vector onto one histogram axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `N_X` for a single type `X`.
    Type(usize),
    /// `N_X` of every type, each sample contributing `S` entries. Only
    /// meaningful when the model is symmetric under relabeling.
    Pooled,
}

/// One-dimensional histogram of use counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UseCountHistogram {
    pub axis: Axis,
    pub sites: usize,
    pub types: usize,
    pub bins: BTreeMap<usize, u64>,
    pub total_samples: u64,
}

impl UseCountHistogram {
    pub fn new(axis: Axis, sites: usize, types: usize) -> Self {
        Self { axis, sites, types, bins: BTreeMap::new(), total_samples: 0 }
    }

    pub fn add_counts(&mut self, counts: &[usize]) -> Result<()> {
        if counts.len() != self.types || counts.iter().sum::<usize>() != self.sites {
            return Err(Error::InconsistentSamples);
        }
        match self.axis {
            Axis::Type(x) => {
                if x >= self.types {
                    return Err(Error::TypeOutOfRange { code: x, types: self.types });
                }
                *self.bins.entry(counts[x]).or_default() += 1;
                self.total_samples += 1;
            }
            Axis::Pooled => {
                for &n in counts {
                    *self.bins.entry(n).or_default() += 1;
                }
                self.total_samples += counts.len() as u64;
            }
        }
        Ok(())
    }

    /// Adds another histogram over the same axis. Associative and commutative.
    pub fn merge(&mut self, other: &UseCountHistogram) -> Result<()> {
        if self.axis != other.axis || self.sites != other.sites || self.types != other.types {
            return Err(Error::InconsistentSamples);
        }
        for (&k, &v) in &other.bins {
            *self.bins.entry(k).or_default() += v;
        }
        self.total_samples += other.total_samples;
        Ok(())
    }

    pub fn count(&self, bin: usize) -> u64 {
        self.bins.get(&bin).copied().unwrap_or(0)
    }
}

/// Builds a histogram of `records` projected on `axis`.
pub fn build_histogram(records: &[SampleRecord], axis: Axis) -> Result<UseCountHistogram> {
    let first = records.first().ok_or(Error::Empty("no sample records"))?;
    let types = first.use_counts.len();
    let sites = first.use_counts.iter().sum();
    let mut h = UseCountHistogram::new(axis, sites, types);
    for r in records {
        h.add_counts(&r.use_counts)?;
    }
    Ok(h)
}

/// Histogram over full use-count vectors `(N_0, ..., N_{S-1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointHistogram {
    pub sites: usize,
    pub types: usize,
    pub bins: BTreeMap<Vec<usize>, u64>,
    pub total_samples: u64,
}

impl JointHistogram {
    pub fn new(sites: usize, types: usize) -> Self {
        Self { sites, types, bins: BTreeMap::new(), total_samples: 0 }
    }

    pub fn from_records(records: &[SampleRecord]) -> Result<Self> {
        let first = records.first().ok_or(Error::Empty("no sample records"))?;
        let mut h = Self::new(first.use_counts.iter().sum(), first.use_counts.len());
        for r in records {
            h.add_counts(&r.use_counts)?;
        }
        Ok(h)
    }

    pub fn add_counts(&mut self, counts: &[usize]) -> Result<()> {
        if counts.len() != self.types || counts.iter().sum::<usize>() != self.sites {
            return Err(Error::InconsistentSamples);
        }
        *self.bins.entry(counts.to_vec()).or_default() += 1;
        self.total_samples += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &JointHistogram) -> Result<()> {
        if self.sites != other.sites || self.types != other.types {
            return Err(Error::InconsistentSamples);
        }
        for (k, &v) in &other.bins {
            *self.bins.entry(k.clone()).or_default() += v;
        }
        self.total_samples += other.total_samples;
        Ok(())
    }

    /// Marginal over every type but `x`.
    pub fn marginal(&self, x: usize) -> Result<UseCountHistogram> {
        if x >= self.types {
            return Err(Error::TypeOutOfRange { code: x, types: self.types });
        }
        let mut h = UseCountHistogram::new(Axis::Type(x), self.sites, self.types);
        for (k, &v) in &self.bins {
            *h.bins.entry(k[x]).or_default() += v;
        }
        h.total_samples = self.total_samples;
        Ok(h)
    }

    /// `-ln p` for every observed count vector, shifted so the minimum is 0.
    pub fn landau(&self) -> Result<BTreeMap<Vec<usize>, f64>> {
        if self.total_samples == 0 {
            return Err(Error::Empty("histogram has no samples"));
        }
        let max = self.bins.values().copied().max().unwrap_or(1) as f64;
        Ok(self.bins.iter().map(|(k, &v)| (k.clone(), -libm::log(v as f64 / max))).collect())
    }
}

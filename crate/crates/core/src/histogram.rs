//! Integer-valued histograms: project sizes and developer degrees.

use std::collections::BTreeMap;
use std::ops::Deref;

/// Counts of items per positive integer class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: BTreeMap<u64, u64>,
    total_count: u64,
    total_mass: u64,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a histogram from `(class, count)` pairs; zero counts are dropped
    /// and repeated classes accumulate. Class 0 is ignored.
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        let mut h = Self::new();
        for (x, c) in pairs {
            h.add(x, c);
        }
        h
    }

    /// One observation per element of `values`.
    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut h = Self::new();
        for x in values {
            h.add(x, 1);
        }
        h
    }

    pub fn add(&mut self, class: u64, count: u64) {
        if class == 0 || count == 0 {
            return;
        }
        *self.counts.entry(class).or_insert(0) += count;
        self.total_count += count;
        self.total_mass += class * count;
    }

    pub fn count(&self, class: u64) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    /// Σ n(x).
    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Σ x·n(x).
    pub fn total_mass(&self) -> u64 {
        self.total_mass
    }

    pub fn max_class(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn distinct_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total_count == 0
    }

    /// Normalized frequencies f(x) = n(x) / Σ n.
    pub fn frequencies(&self) -> BTreeMap<u64, f64> {
        let n = self.total_count as f64;
        self.counts.iter().map(|(&x, &c)| (x, c as f64 / n)).collect()
    }

    /// Copy restricted to classes `>= min_class`.
    pub fn restricted_from(&self, min_class: u64) -> Self {
        Self::from_counts(self.counts.range(min_class..).map(|(&x, &c)| (x, c)))
    }

    /// Expands into one value per observation, ascending.
    pub fn to_values(&self) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.total_count as usize);
        for (&x, &c) in &self.counts {
            v.extend(std::iter::repeat_n(x, c as usize));
        }
        v
    }
}

/// n(x): number of projects with exactly `x` developers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SizeDistribution(Histogram);

impl SizeDistribution {
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        Self(Histogram::from_counts(pairs))
    }

    pub fn from_sizes<I: IntoIterator<Item = u64>>(sizes: I) -> Self {
        Self(Histogram::from_values(sizes))
    }

    pub fn from_histogram(h: Histogram) -> Self {
        Self(h)
    }

    pub fn add(&mut self, size: u64, count: u64) {
        self.0.add(size, count);
    }

    pub fn total_projects(&self) -> u64 {
        self.0.total_count()
    }

    pub fn total_developers(&self) -> u64 {
        self.0.total_mass()
    }

    pub fn restricted_from(&self, min_size: u64) -> Self {
        Self(self.0.restricted_from(min_size))
    }

    pub fn histogram(&self) -> &Histogram {
        &self.0
    }
}

impl Deref for SizeDistribution {
    type Target = Histogram;
    fn deref(&self) -> &Histogram {
        &self.0
    }
}

/// Number of developers per degree (number of projects joined).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeDistribution(Histogram);

impl DegreeDistribution {
    pub fn from_degrees<I: IntoIterator<Item = u64>>(degrees: I) -> Self {
        Self(Histogram::from_values(degrees))
    }

    pub fn total_developers(&self) -> u64 {
        self.0.total_count()
    }

    pub fn total_links(&self) -> u64 {
        self.0.total_mass()
    }

    /// Reinterprets the degree histogram as a distribution over sizes, e.g. to
    /// test it against the same Yule-Simon hypothesis.
    pub fn as_size_distribution(&self) -> SizeDistribution {
        SizeDistribution(self.0.clone())
    }
}

impl Deref for DegreeDistribution {
    type Target = Histogram;
    fn deref(&self) -> &Histogram {
        &self.0
    }
}

/// Replica-averaged size counts (real-valued).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeanSizeDistribution {
    pub counts: BTreeMap<u64, f64>,
    pub replicas: usize,
}

impl MeanSizeDistribution {
    pub fn average<'a, I: IntoIterator<Item = &'a SizeDistribution>>(dists: I) -> Self {
        let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
        let mut replicas = 0;
        for d in dists {
            replicas += 1;
            for (x, c) in d.iter() {
                *counts.entry(x).or_insert(0.0) += c as f64;
            }
        }
        if replicas > 0 {
            for v in counts.values_mut() {
                *v /= replicas as f64;
            }
        }
        Self { counts, replicas }
    }

    pub fn total_projects(&self) -> f64 {
        self.counts.values().sum()
    }

    pub fn frequencies(&self) -> BTreeMap<u64, f64> {
        let n = self.total_projects();
        self.counts.iter().map(|(&x, &c)| (x, c / n)).collect()
    }
}

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::site::{Site, SiteCodec};
use crate::stats::ExactSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Continuous,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sparse occupation map over visited sites.
#[derive(Debug, Clone)]
pub struct LocalTimeField {
    mode: Mode,
    codec: SiteCodec,
    counts: FxHashMap<u128, u64>,
    times: FxHashMap<u128, Compensated>,
    total_count: u64,
    total_time: Compensated,
}

impl LocalTimeField {
    pub fn new(mode: Mode, codec: SiteCodec) -> Self {
        Self {
            mode,
            codec,
            counts: FxHashMap::default(),
            times: FxHashMap::default(),
            total_count: 0,
            total_time: Compensated::default(),
        }
    }

    /// Empties the field, keeping its allocation.
    pub fn reset(&mut self, mode: Mode, codec: SiteCodec) {
        self.mode = mode;
        self.codec = codec;
        self.counts.clear();
        self.times.clear();
        self.total_count = 0;
        self.total_time = Compensated::default();
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn codec(&self) -> &SiteCodec {
        &self.codec
    }

    pub fn dim(&self) -> usize {
        self.codec.dim()
    }

    /// Number of distinct sites with positive occupation.
    pub fn len(&self) -> usize {
        match self.mode {
            Mode::Discrete => self.counts.len(),
            Mode::Continuous => self.times.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adds one visit and returns the new count at `key`.
    #[inline]
    pub fn add_visit(&mut self, key: u128) -> u64 {
        debug_assert_eq!(self.mode, Mode::Discrete);
        self.total_count += 1;
        let c = self.counts.entry(key).or_insert(0);
        *c += 1;
        *c
    }

    /// Adds `dt > 0` of occupation and returns the new value at `key`.
    #[inline]
    pub fn add_time(&mut self, key: u128, dt: f64) -> f64 {
        debug_assert_eq!(self.mode, Mode::Continuous);
        debug_assert!(dt > 0.0);
        self.total_time.add(dt);
        let c = self.times.entry(key).or_default();
        c.add(dt);
        c.value()
    }

    pub fn count_at(&self, key: u128) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn time_at(&self, key: u128) -> f64 {
        self.times.get(&key).map_or(0.0, Compensated::value)
    }

    pub fn get_key(&self, key: u128) -> f64 {
        match self.mode {
            Mode::Discrete => self.count_at(key) as f64,
            Mode::Continuous => self.time_at(key),
        }
    }

    pub fn get(&self, site: &Site) -> f64 {
        self.codec.encode(site).map_or(0.0, |k| self.get_key(k))
    }

    pub fn contains_key(&self, key: u128) -> bool {
        match self.mode {
            Mode::Discrete => self.counts.contains_key(&key),
            Mode::Continuous => self.times.contains_key(&key),
        }
    }

    /// Running total: the visit count in discrete mode, the compensated
    /// accumulated time in continuous mode.
    pub fn total(&self) -> f64 {
        match self.mode {
            Mode::Discrete => self.total_count as f64,
            Mode::Continuous => self.total_time.value(),
        }
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Exactly rounded sum of the stored occupations.
    pub fn entry_sum(&self) -> f64 {
        let mut s = ExactSum::new();
        for (_, v) in self.iter_keys() {
            s.add(v);
        }
        s.value()
    }

    pub fn iter_keys(&self) -> Box<dyn Iterator<Item = (u128, f64)> + '_> {
        match self.mode {
            Mode::Discrete => Box::new(self.counts.iter().map(|(&k, &c)| (k, c as f64))),
            Mode::Continuous => Box::new(self.times.iter().map(|(&k, c)| (k, c.value()))),
        }
    }

    pub fn iter_counts(&self) -> impl Iterator<Item = (u128, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// Entries sorted by site.
    pub fn entries(&self) -> Vec<(Site, f64)> {
        let mut v: Vec<_> = self.iter_keys().map(|(k, x)| (self.codec.decode(k), x)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn max(&self) -> f64 {
        self.iter_keys().map(|(_, v)| v).fold(0.0, f64::max)
    }

    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// Number of sites with occupation strictly above `level`.
    pub fn count_above(&self, level: f64) -> usize {
        self.iter_keys().filter(|&(_, v)| v > level).count()
    }

    /// Same support and bit-identical occupations.
    pub fn identical(&self, other: &LocalTimeField) -> bool {
        self.mode == other.mode
            && self.len() == other.len()
            && self
                .iter_keys()
                .all(|(k, v)| other.contains_key(k) && other.get_key(k).to_bits() == v.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_is_tight() {
        let mut c = Compensated::default();
        c.add(1e16);
        for _ in 0..1000 {
            c.add(1.0);
        }
        c.add(-1e16);
        assert_eq!(c.value(), 1000.0);
    }

    #[test]
    fn discrete_bookkeeping() {
        let codec = SiteCodec::new(3).unwrap();
        let mut f = LocalTimeField::new(Mode::Discrete, codec);
        let o = codec.origin();
        assert_eq!(f.add_visit(o), 1);
        assert_eq!(f.add_visit(codec.step(o, 0)), 1);
        assert_eq!(f.add_visit(o), 2);
        assert_eq!(f.total(), 3.0);
        assert_eq!(f.max(), 2.0);
        assert_eq!(f.get(&Site::origin(3)), 2.0);
        assert_eq!(f.get(&Site::axis(3, 5)), 0.0);
        assert_eq!(f.count_above(1.0), 1);
        f.reset(Mode::Continuous, codec);
        assert!(f.is_empty());
        f.add_time(o, 0.25);
        assert_eq!(f.total(), 0.25);
    }
}

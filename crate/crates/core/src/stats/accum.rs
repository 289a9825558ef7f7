//! Mergeable moment accumulators.
//!
//! Sums are kept as exact floating-point expansions (non-overlapping
//! partials), so the reported sum is the correctly rounded exact sum of the
//! inputs regardless of the order in which they were pushed or merged.
//! Squares enter as an exact two-product. This makes [`Accumulator::merge`]
//! associative and commutative bit-for-bit, which the replicate reductions
//! rely on for determinism under any thread schedule.

use serde::{Deserialize, Serialize};

use super::rng::StreamKey;
use crate::error::{Error, Result};

/// Exact sum of `f64` values as a Shewchuk expansion.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        debug_assert!(value.is_finite());
        let mut x = value;
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn add_sum(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Correctly rounded value of the exact sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // half-way correction, as in CPython's fsum
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl PartialEq for ExactSum {
    fn eq(&self, other: &Self) -> bool {
        self.value().to_bits() == other.value().to_bits()
    }
}

/// Bottom-k sample by a priority derived from the replicate key. Keeping the
/// `capacity` smallest priorities is order independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    capacity: usize,
    items: Vec<(u64, f64)>,
}

impl Reservoir {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn insert(&mut self, priority: u64, value: f64) {
        let item = (priority, value);
        let pos = self
            .items
            .partition_point(|probe| (probe.0, probe.1.to_bits()) < (item.0, item.1.to_bits()));
        if pos >= self.capacity {
            return;
        }
        self.items.insert(pos, item);
        self.items.truncate(self.capacity);
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Accumulator {
    count: u64,
    sum: ExactSum,
    sum_sq: ExactSum,
    #[serde(with = "empty_as_null::pos")]
    min: f64,
    #[serde(with = "empty_as_null::neg")]
    max: f64,
    reservoir: Option<Reservoir>,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for Accumulator {
    fn eq(&self, other: &Self) -> bool {
        self.count == other.count
            && self.sum == other.sum
            && self.sum_sq == other.sum_sq
            && self.min.to_bits() == other.min.to_bits()
            && self.max.to_bits() == other.max.to_bits()
            && self.reservoir == other.reservoir
    }
}

impl Accumulator {
    pub fn new() -> Self {
        Self {
            count: 0,
            sum: ExactSum::new(),
            sum_sq: ExactSum::new(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            reservoir: None,
        }
    }

    pub fn with_reservoir(capacity: usize) -> Self {
        Self {
            reservoir: Some(Reservoir::new(capacity)),
            ..Self::new()
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        let sq = x * x;
        self.sum_sq.add(sq);
        self.sum_sq.add(x.mul_add(x, -sq));
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Push a value produced by the replicate identified by `key`; the
    /// reservoir (if any) keeps it according to `key.priority()`.
    pub fn push_keyed(&mut self, x: f64, key: StreamKey) {
        self.push(x);
        if let Some(r) = self.reservoir.as_mut() {
            r.insert(key.priority(), x);
        }
    }

    pub fn merge(&self, other: &Accumulator) -> Result<Accumulator> {
        let reservoir = match (&self.reservoir, &other.reservoir) {
            (None, None) => None,
            (Some(a), Some(b)) if a.capacity == b.capacity => {
                let mut r = a.clone();
                for &(p, v) in &b.items {
                    r.insert(p, v);
                }
                Some(r)
            }
            (a, b) => {
                return Err(Error::AccumulatorMismatch(format!(
                    "reservoir capacities {:?} vs {:?}",
                    a.as_ref().map(|r| r.capacity),
                    b.as_ref().map(|r| r.capacity)
                )))
            }
        };
        let mut sum = self.sum.clone();
        sum.add_sum(&other.sum);
        let mut sum_sq = self.sum_sq.clone();
        sum_sq.add_sum(&other.sum_sq);
        Ok(Accumulator {
            count: self.count + other.count,
            sum,
            sum_sq,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
            reservoir,
        })
    }

    /// In-place merge; panics on kind mismatch, which is a programming error
    /// inside a reduction where both sides come from the same constructor.
    pub fn absorb(&mut self, other: &Accumulator) {
        *self = self.merge(other).expect("accumulator kinds are fixed per reduction");
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq.value()
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn reservoir(&self) -> Option<&Reservoir> {
        self.reservoir.as_ref()
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum() / self.count as f64
    }

    pub fn second_moment(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum_sq() / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let mean = self.mean();
        ((self.sum_sq() - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

// An empty accumulator has min = +inf and max = -inf, which JSON cannot hold.
mod empty_as_null {
    macro_rules! side {
        ($name:ident, $empty:expr) => {
            pub mod $name {
                use serde::{Deserialize, Deserializer, Serializer};

                pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
                    if x.is_finite() {
                        s.serialize_some(x)
                    } else {
                        s.serialize_none()
                    }
                }

                pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                    Ok(Option::<f64>::deserialize(d)?.unwrap_or($empty))
                }
            }
        };
    }
    side!(pos, f64::INFINITY);
    side!(neg, f64::NEG_INFINITY);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_sum_beats_naive_cancellation() {
        let mut s = ExactSum::new();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
        let mut t = ExactSum::new();
        for _ in 0..10 {
            t.add(0.1);
        }
        assert_eq!(t.value(), 1.0);
    }

    #[test]
    fn empty_is_identity() {
        let mut a = Accumulator::new();
        for x in [1.0, 2.5, -3.0] {
            a.push(x);
        }
        assert_eq!(a.merge(&Accumulator::new()).unwrap(), a);
        assert_eq!(Accumulator::new().merge(&a).unwrap(), a);
    }

    #[test]
    fn mismatched_kinds_are_rejected() {
        let a = Accumulator::with_reservoir(4);
        let b = Accumulator::new();
        assert!(matches!(a.merge(&b), Err(Error::AccumulatorMismatch(_))));
        let c = Accumulator::with_reservoir(5);
        assert!(a.merge(&c).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut a = Accumulator::with_reservoir(3);
        for r in 0..10 {
            a.push_keyed(0.1 * r as f64 + 1e-17, StreamKey::new(1, r));
        }
        for acc in [a, Accumulator::new()] {
            let text = serde_json::to_string(&acc).unwrap();
            let back: Accumulator = serde_json::from_str(&text).unwrap();
            assert_eq!(back, acc);
        }
    }

    #[test]
    fn moments() {
        let mut a = Accumulator::new();
        for x in 1..=5 {
            a.push(x as f64);
        }
        assert_eq!(a.mean(), 3.0);
        assert_eq!(a.variance(), 2.5);
        assert_eq!(a.second_moment(), 11.0);
        assert_eq!((a.min(), a.max()), (1.0, 5.0));
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_split_invariant(
            xs in prop::collection::vec(-1e6f64..1e6, 0..200),
            split in 0usize..200,
        ) {
            let split = split.min(xs.len());
            let mut whole = Accumulator::with_reservoir(16);
            let mut left = Accumulator::with_reservoir(16);
            let mut right = Accumulator::with_reservoir(16);
            for (i, &x) in xs.iter().enumerate() {
                let key = StreamKey::new(9, i as u64);
                whole.push_keyed(x, key);
                if i < split { left.push_keyed(x, key) } else { right.push_keyed(x, key) }
            }
            let lr = left.merge(&right).unwrap();
            let rl = right.merge(&left).unwrap();
            prop_assert_eq!(&lr, &rl);
            prop_assert_eq!(&lr, &whole);
        }

        #[test]
        fn merge_is_associative(
            a in prop::collection::vec(-1e3f64..1e3, 0..50),
            b in prop::collection::vec(-1e9f64..1e9, 0..50),
            c in prop::collection::vec(-1e-3f64..1e-3, 0..50),
        ) {
            let fill = |xs: &[f64]| { let mut acc = Accumulator::new(); xs.iter().for_each(|&x| acc.push(x)); acc };
            let (a, b, c) = (fill(&a), fill(&b), fill(&c));
            let left = a.merge(&b).unwrap().merge(&c).unwrap();
            let right = a.merge(&b.merge(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}

//! Counter-based random streams.
//!
//! Every random number in the crate is a pure function of a [`StreamKey`]
//! `(seed, replicate_index, draw_counter)`. The mixer is Philox4x32 with 10
//! rounds: the 64-bit seed is the Philox key, and the 128-bit counter is
//! `(draw_counter, replicate_index)` laid out as four little-endian 32-bit
//! words `[draw_lo, draw_hi, rep_lo, rep_hi]`. One block yields four `u32`
//! words, consumed in order. This layout is part of the checkpoint format:
//! changing it changes every stored result.

use rand_core::{impls, RngCore};
use serde::{Deserialize, Serialize};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;
const PHILOX_ROUNDS: usize = 10;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32-10 block function.
#[inline]
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut k = key;
    for round in 0..PHILOX_ROUNDS {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// Position in the counter space. `draw_counter` indexes 128-bit blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub replicate_index: u64,
    pub draw_counter: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replicate_index: u64) -> Self {
        Self {
            seed,
            replicate_index,
            draw_counter: 0,
        }
    }

    /// A 64-bit digest of `(seed, replicate_index)`, independent of the
    /// draw counter. Used as the priority in deterministic reservoirs.
    pub fn priority(&self) -> u64 {
        let block = philox4x32(
            [u32::MAX, u32::MAX, self.replicate_index as u32, (self.replicate_index >> 32) as u32],
            [self.seed as u32, (self.seed >> 32) as u32],
        );
        (u64::from(block[0]) << 32) | u64::from(block[1])
    }
}

/// A replayable random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    key: [u32; 2],
    replicate: u64,
    counter: u64,
    buf: [u32; 4],
    pos: usize,
}

impl Stream {
    pub fn new(seed: u64, replicate_index: u64) -> Self {
        Self::at(StreamKey::new(seed, replicate_index))
    }

    pub fn at(key: StreamKey) -> Self {
        Self {
            key: [key.seed as u32, (key.seed >> 32) as u32],
            replicate: key.replicate_index,
            counter: key.draw_counter,
            buf: [0; 4],
            pos: 4,
        }
    }

    /// The key of the next block that has not been started yet.
    pub fn frontier(&self) -> StreamKey {
        StreamKey {
            seed: u64::from(self.key[0]) | (u64::from(self.key[1]) << 32),
            replicate_index: self.replicate,
            draw_counter: self.counter,
        }
    }

    #[inline]
    fn refill(&mut self) {
        let c = self.counter;
        let r = self.replicate;
        self.buf = philox4x32([c as u32, (c >> 32) as u32, r as u32, (r >> 32) as u32], self.key);
        self.counter = self.counter.wrapping_add(1);
        self.pos = 0;
    }

    #[inline]
    pub fn next_word(&mut self) -> u32 {
        if self.pos == 4 {
            self.refill();
        }
        let w = self.buf[self.pos];
        self.pos += 1;
        w
    }

    #[inline]
    pub fn next_u64_word(&mut self) -> u64 {
        let lo = u64::from(self.next_word());
        let hi = u64::from(self.next_word());
        (hi << 32) | lo
    }

    /// Uniform integer in `0..n` (Lemire's multiply-and-reject; exact).
    #[inline]
    pub fn below(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        let mut m = u64::from(self.next_word()) * u64::from(n);
        let mut low = m as u32;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u64::from(self.next_word()) * u64::from(n);
                low = m as u32;
            }
        }
        (m >> 32) as u32
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64_word() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unit-rate exponential by inversion; strictly positive.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.open01().ln()
    }

    /// Unit exponential conditioned on `[0, cap)`, by inversion: draw `v`
    /// uniform in `(0, 1 - e^{-cap})` and return `-log(1 - v)`.
    #[inline]
    pub fn truncated_exp1(&mut self, cap: f64) -> f64 {
        debug_assert!(cap > 0.0);
        let mass = -(-cap).exp_m1();
        let v = self.open01() * mass;
        let x = -(-v).ln_1p();
        if x < cap {
            x
        } else {
            // rounding landed on the cap
            f64::from_bits(cap.to_bits() - 1)
        }
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.next_word()
    }

    fn next_u64(&mut self) -> u64 {
        self.next_u64_word()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors published with the Random123 reference suite.
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32([0, 0, 0, 0], [0, 0]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn same_key_same_stream() {
        let mut a = Stream::new(7, 3);
        let mut b = Stream::new(7, 3);
        for _ in 0..1000 {
            assert_eq!(a.next_word(), b.next_word());
        }
        let mut c = Stream::new(7, 4);
        let mut a = Stream::new(7, 3);
        let same = (0..64).filter(|_| a.next_word() == c.next_word()).count();
        assert!(same < 2);
    }

    #[test]
    fn resume_from_frontier() {
        let mut a = Stream::new(11, 0);
        for _ in 0..8 {
            a.next_word();
        }
        let mut b = Stream::at(a.frontier());
        for _ in 0..100 {
            assert_eq!(a.next_word(), b.next_word());
        }
    }

    #[test]
    fn below_is_in_range_and_balanced() {
        let mut s = Stream::new(1, 0);
        let mut hits = [0u32; 6];
        for _ in 0..60_000 {
            hits[s.below(6) as usize] += 1;
        }
        for h in hits {
            assert!((h as f64 - 10_000.0).abs() < 5.0 * (10_000.0f64 * 5.0 / 6.0).sqrt());
        }
    }

    #[test]
    fn truncated_exponential_respects_cap() {
        let mut s = Stream::new(5, 5);
        for cap in [1e-6, 0.075, 0.5, 3.0] {
            for _ in 0..10_000 {
                let x = s.truncated_exp1(cap);
                assert!(x > 0.0 && x < cap);
            }
        }
    }

    #[test]
    fn open_uniform_never_hits_endpoints() {
        let mut s = Stream::new(2, 9);
        for _ in 0..100_000 {
            let u = s.open01();
            assert!(u > 0.0 && u < 1.0);
            assert!(s.exp1() > 0.0);
        }
    }
}

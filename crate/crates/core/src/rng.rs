//! Deterministic random streams.
//!
//! The generator is SplitMix64 with its state initialized to the seed. A
//! bounded draw uses rejection: with `zone = 2⁶⁴ - (2⁶⁴ mod b)`, words
//! `x ≥ zone` are discarded and the result is `x mod b`. Named sub-streams
//! use the seed `splitmix_finalize(seed ^ fnv1a64(label))`. These rules are
//! simple to reproduce in any language, which keeps corpora portable.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::exactalg::{Field, FieldElement};

pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: SplitMix64::from_seed(seed.to_le_bytes()),
        }
    }

    /// Independent stream for a labelled purpose.
    pub fn derived(seed: u64, label: &str) -> Self {
        Self::new(finalize(seed ^ fnv1a64(label.as_bytes())))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        lo + self.below((hi - lo) as u64 + 1) as i64
    }

    /// Uniform element of 𝔽_p, or an integer in `[-3, 3]` over ℚ.
    pub fn field_element(&mut self, field: Field) -> FieldElement {
        match field {
            Field::Rational => field.from_i64(self.range_i64(-3, 3)),
            Field::Prime(p) => FieldElement::from_u64(field, self.below(p as u64)),
        }
    }

    /// Fisher–Yates shuffle driven by [`Self::below`].
    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            v.swap(i, j);
        }
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

//! Portable deterministic random number generation.
//!
//! Every random artifact (interleavers, payloads, noise, clock skews) is drawn
//! from [`XorShift64Star`] so that outputs can be reproduced from a single
//! master seed in any language.

use rand::RngCore;

const MULTIPLIER: u64 = 0x2545_F491_4F6C_DD1D;
/// Substitute state for the (invalid) all-zero seed.
const ZERO_SEED_STATE: u64 = 0x9E37_79B9_7F4A_7C15;

/// xorshift64* generator (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        Self {
            state: if seed == 0 { ZERO_SEED_STATE } else { seed },
        }
    }

    /// Generator for a named sub-stream of a master seed.
    pub fn derived(master: u64, stream: u64) -> Self {
        Self::new(mix(master ^ mix(stream)))
    }

    #[inline]
    pub fn next(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(MULTIPLIER)
    }

    /// Uniform in `[0, bound)`. Modulo bias is below 2^-50 for the bounds used here.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next() % bound
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// splitmix64 finalizer, used to decorrelate derived seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngCore for XorShift64Star {
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let v = self.next().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}

//! SplitMix64, a 64-bit counter-based generator.
//!
//! The stream is fully specified so other implementations can reproduce it:
//!
//! ```text
//! state  <- state + 0x9E3779B97F4A7C15          (wrapping)
//! z      <- state
//! z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (wrapping)
//! z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB (wrapping)
//! output <- z ^ (z >> 31)
//! ```
//!
//! Independent streams are derived with [`SplitMix64::stream`]: the initial
//! state is `mix(seed ^ mix(stream_id + 0x632BE59BD9B4E019))`, where `mix` is
//! the output finalizer above applied to its argument.
//!
//! Floats: `next_f64` returns `((x >> 11) + 0.5) * 2^-53`, which lies in the
//! open interval (0, 1). Exponential samples use `-ln(u) / rate`.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0x632B_E59B_D9B4_E019;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic 64-bit generator with a single word of state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream `stream_id` of the family selected by `seed`.
    pub fn stream(seed: u64, stream_id: u64) -> Self {
        Self::new(mix(seed ^ mix(stream_id.wrapping_add(STREAM_SALT))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw from the open interval (0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Index in `0..m` by multiply-high; no rejection loop, so every call
    /// consumes exactly one word.
    #[inline]
    pub fn below(&mut self, m: u64) -> u64 {
        ((self.next_u64() as u128 * m as u128) >> 64) as u64
    }

    /// Exponential variate with the given rate via inverse CDF.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.next_f64().ln() / rate
    }

    /// Uniform draw from `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

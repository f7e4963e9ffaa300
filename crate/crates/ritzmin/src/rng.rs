//! Seeded, splittable random number generation.
//!
//! Everything downstream (parameter initialization, trial seeding, coordinate
//! subsampling) must be reproducible bit-for-bit from a single run seed, on any
//! platform and at any thread count. A self-contained SplitMix64 stream keeps
//! that guarantee independent of external crate version bumps.

/// SplitMix64 generator (Steele, Lea, Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform in the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        // 53 mantissa bits, offset by half an ulp so 0 is never produced.
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Finalizer of SplitMix64; a good 64-bit mixer in its own right.
fn mix64(z: u64) -> u64 {
    let z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from `(seed, stream)`.
///
/// Distinct stream indices give statistically unrelated subsequences, so per
/// state, per trial, and per purpose streams can be drawn without coordination.
pub fn subseed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Gaussian sampler on top of [`SplitMix64`] (Box-Muller, cached spare).
#[derive(Debug, Clone)]
pub struct NormalSampler {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            spare: None,
        }
    }

    /// One draw from N(0, sigma^2).
    pub fn next(&mut self, sigma: f64) -> f64 {
        sigma * self.next_standard()
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.rng.next_open01();
        let u2 = self.rng.next_open01();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

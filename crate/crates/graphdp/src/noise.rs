//! Seedable noise primitives for the two release mechanisms.
//!
//! Both samplers draw from a [`RandomStream`], a ChaCha8 generator keyed by
//! `(seed, stream)`. Identical keys reproduce identical sequences; distinct
//! stream ids give statistically independent sequences, which is how the
//! harness hands one stream to every trial.
//!
//! The uniform-to-noise transforms are fixed and documented here so that a
//! given `(seed, stream)` pins the exact noise values:
//!
//! * uniform doubles take the top 53 bits of a ChaCha8 word, `u64 >> 11`
//!   scaled by 2^-53;
//! * standard normals use the Marsaglia polar method (rejection on the unit
//!   disk, two normals per accepted pair);
//! * standard Laplace inverts the CDF, `z = -sign(v) * ln(1 - 2|v|)` for
//!   `v = u - 1/2`;
//! * Student t with 3 degrees of freedom is `X / sqrt((Y1^2+Y2^2+Y3^2)/3)`
//!   for four independent standard normals.
//!
//! Bit-identical replay across platforms additionally assumes `ln`/`sqrt`
//! round identically; `sqrt` is IEEE-exact everywhere, `ln` is in practice
//! identical on mainstream libms but is not formally guaranteed.
//!
//! **Privacy caveat**: seeded noise exists for simulation and audit. A
//! deployed differentially private release must draw from non-deterministic
//! entropy; replaying the seed reveals the noise and voids the guarantee.
//! These samplers also make no attempt to close floating-point side channels
//! of real-valued noise (Mironov-style attacks), which are out of scope.

use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Deterministic random stream: a ChaCha8 generator keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: rand_chacha::ChaCha8Rng,
}

impl RandomStream {
    /// Stream 0 of the given seed.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// The `(seed, stream)` generator. Streams of the same seed are
    /// independent of one another.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Derives an independent child stream of the same seed.
    pub fn child(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform double in `[0, 1)` from the top 53 bits of one word.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by rejection from the top bits.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// One standard normal pair via the Marsaglia polar method.
    fn normal_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.uniform01() - 1.0;
            let v = 2.0 * self.uniform01() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let mult = (-2.0 * s.ln() / s).sqrt();
                return (u * mult, v * mult);
            }
        }
    }
}

/// Draws `scale * Z` where `Z` is standard Laplace (density proportional to
/// `exp(-|z|)`, so `E[Z] = 0` and `E[Z^2] = 2`).
pub fn sample_laplace(rng: &mut RandomStream, scale: f64) -> Result<f64> {
    if scale <= 0.0 || scale.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "laplace scale must be positive, got {scale}"
        )));
    }
    // u == 0 would put v at exactly -1/2 and send the quantile to infinity.
    let u = loop {
        let u = rng.uniform01();
        if u > 0.0 {
            break u;
        }
    };
    let v = u - 0.5;
    let z = -v.signum() * (1.0 - 2.0 * v.abs()).ln();
    Ok(scale * z)
}

/// Draws a Student t variate with 3 degrees of freedom:
/// `X / sqrt((Y1^2 + Y2^2 + Y3^2) / 3)` for four independent standard
/// normals, so `E[Z] = 0` and `E[Z^2] = 3`.
///
/// The zero-denominator event has probability zero; it is re-drawn if it
/// ever occurs in floating point.
pub fn sample_student_t3(rng: &mut RandomStream) -> f64 {
    loop {
        let (x, y1) = rng.normal_pair();
        let (y2, y3) = rng.normal_pair();
        let chi2 = y1 * y1 + y2 * y2 + y3 * y3;
        if chi2 > 0.0 {
            return x / (chi2 / 3.0).sqrt();
        }
    }
}

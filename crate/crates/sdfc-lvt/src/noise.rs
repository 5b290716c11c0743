//! Seeded complex Gaussian noise.
//!
//! All randomness in the crate flows from one 64-bit seed through a
//! counter-based derivation: the seed keys a ChaCha8 generator and every
//! independent consumer (matrix fill, Monte Carlo trial, …) selects its own
//! stream number. Identical (seed, stream, length) always reproduces the
//! same draw regardless of execution order or thread count.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

/// Independent noise stream derived from `(seed, stream)`.
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// One zero-mean circular complex Gaussian with `E|z|² = variance`
    /// (V²/2 in each quadrature component), via Box-Muller.
    pub fn complex_gaussian(&mut self, variance: f64) -> C64 {
        if variance <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let u1: f64 = self.rng.random::<f64>().max(1e-300);
        let u2: f64 = self.rng.random();
        let radius = (-u1.ln() * variance).sqrt();
        let angle = std::f64::consts::TAU * u2;
        C64::from_polar(radius, angle)
    }

    pub fn fill_complex_gaussian(&mut self, out: &mut [C64], variance: f64) {
        for v in out.iter_mut() {
            *v = self.complex_gaussian(variance);
        }
    }
}

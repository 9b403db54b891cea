//! Seeded Gaussian variates for data generation.
//!
//! ChaCha8 is the word generator: it is a fixed, portable stream cipher, so a
//! (seed, stream) pair pins every dataset bit for bit on any platform. Each
//! generated array draws from its own stream, which keeps arrays independent
//! and insulates them from changes in how many values other arrays consume.
//! Normals come from the Box-Muller transform applied to 53-bit uniforms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cos, log, sin, sqrt};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct NormalSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on (0, 1]: top 53 bits of a word, shifted off zero so the
    /// logarithm below is always finite.
    pub fn uniform_open_closed(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// One standard normal draw. Box-Muller produces pairs; the second
    /// variate is cached and handed out on the next call, so single draws
    /// and batch fills see the same sequence.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform_open_closed();
        let r = sqrt(-2.0 * log(u1));
        let angle = 2.0 * PI * u2;
        self.spare = Some(r * sin(angle));
        r * cos(angle)
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for v in out.iter_mut() {
            *v = self.next_normal();
        }
        out
    }
}

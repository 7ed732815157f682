//! Counter-derived random streams.
//!
//! Every (seed, trial, role) triple maps to its own ChaCha8 stream, so the
//! numbers a trial sees do not depend on which worker runs it or in what
//! order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Beam1 = 0,
    Beam2 = 1,
    Clicks = 2,
    /// Anything outside the per-trial pipeline (tests, oracles).
    Auxiliary = 3,
}

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, trial: u64, role: StreamRole) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(4).wrapping_add(role as u64));
    rng
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Circular complex Gaussian with E|z|² = `variance`.
pub fn complex_normal(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let sd = (0.5 * variance).sqrt();
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    Complex64::new(sd * re, sd * im)
}

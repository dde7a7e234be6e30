//! Seeded randomness. Everything stochastic in this crate flows through
//! ChaCha8 so that a (seed, purpose) pair pins down the exact output on
//! every platform.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Root generator for a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for one sub-task (one shot setting, one scan draw).
///
/// Streams of the same seed never overlap, so sub-tasks can run in parallel
/// and still reproduce the serial result bit for bit.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = seeded(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex Gaussian entries; normalizing such a vector samples the
/// Haar measure on pure states.
pub fn complex_gaussians<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// Flat Dirichlet weights: normalized unit exponentials.
pub fn dirichlet_flat<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..len)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            // u in [0, 1); shift away from 0 so the log is finite.
            -(1.0 - u).ln()
        })
        .collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|d| d / total).collect()
}

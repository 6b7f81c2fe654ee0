//! Shared fixtures for the criterion benchmarks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Deterministic right-hand side with entries uniform in `[-1, 1)`.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Problem sizes used by the smoothing benchmarks.
pub const SIZES: [usize; 4] = [16, 128, 1024, 8192];

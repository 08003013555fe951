//! Benchmark fixtures shared by the criterion targets in `benches/`.

use az_core::linalg::{gaussian_vector, seeded_rng};
use az_core::CVector;

/// Deterministic complex Gaussian vector of length `n`.
pub fn probe(n: usize, seed: u64) -> CVector {
    gaussian_vector(n, &mut seeded_rng(seed))
}

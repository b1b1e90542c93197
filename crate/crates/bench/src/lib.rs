//! Fixed benchmark inputs.

use sphfold::{random_chain, SphericalChain};

/// A seeded random chain with `n` edges and total length `alpha`.
pub fn fixture(n: usize, alpha: f64, seed: u64) -> SphericalChain {
    random_chain(n, alpha, seed).expect("benchmark fixture samples")
}

//! Deterministic derivation of independent random streams.
//!
//! Every trial, chunk or sub-task draws from its own stream keyed by the
//! master seed and a path of indices, so serial and parallel runs agree.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Real;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with an index path into a single 64-bit key.
pub fn derive_key(seed: u64, path: &[u64]) -> u64 {
    let mut key = splitmix64(seed);
    for (depth, &p) in path.iter().enumerate() {
        key = splitmix64(key ^ splitmix64(p.wrapping_add((depth as u64 + 1) << 56)));
    }
    key
}

/// Random stream for `(seed, path…)`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, path));
    rng.set_stream(path.len() as u64);
    rng
}

/// One draw from `N(0, 1)`.
#[inline]
pub fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// `rows × cols` matrix of iid `N(0, std²)` entries, drawn in row-major order.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    std: T,
    rng: &mut R,
) -> DMatrix<T> {
    let data: Vec<T> = (0..rows * cols)
        .map(|_| standard_normal::<T, _>(rng) * std)
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

//! Exhaustive search over all `2ᴰ` sign vectors.
//!
//! `Σ vₙ xₙxₙᵀ` is split as a sum over the low and high halves of the
//! indices; each half is tabulated once, so every candidate costs one `r × r`
//! addition per matrix plus the eigenvalue checks.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{
    check_pair, check_quadratic, definiteness_verdict, project_row, CertifyOptions, SignVector,
};
use crate::error::{Error, Result};
use crate::features::RandomFeatureMap;
use crate::subspace::Subspace;
use crate::Real;

pub const MAX_EXHAUSTIVE_WIDTH: usize = 24;

/// `table[mask] = Σₙ sₙ Pₙ` with `sₙ = +1` iff bit `n` of `mask` is set.
fn signed_sums<T: Real>(outer: &[DMatrix<T>]) -> Vec<DMatrix<T>> {
    let r = outer.first().map_or(0, |m| m.nrows());
    let mut base = DMatrix::<T>::zeros(r, r);
    for p in outer {
        base -= p;
    }
    let mut table = Vec::with_capacity(1 << outer.len());
    table.push(base);
    for (n, p) in outer.iter().enumerate() {
        let twice = p * T::lit(2.0);
        for mask in 0..(1usize << n) {
            let next = &table[mask] + &twice;
            table.push(next);
        }
    }
    table
}

fn outer_products<T: Real>(map: &RandomFeatureMap<T>, s: &Subspace<T>) -> Vec<DMatrix<T>> {
    let mut x = vec![T::zero(); s.dim()];
    (0..map.width())
        .map(|n| {
            project_row(s.basis(), map.row(n), &mut x);
            let v = nalgebra::DVector::from_column_slice(&x);
            &v * v.transpose()
        })
        .collect()
}

/// First sign vector (in mask order) with `Q₁ ≻ 0` and `Q₂ ≺ 0`, if any.
pub fn find_separating_signs<T: Real>(
    map: &RandomFeatureMap<T>,
    s1: &Subspace<T>,
    s2: &Subspace<T>,
    opts: &CertifyOptions,
) -> Result<Option<SignVector>> {
    check_quadratic(map)?;
    check_pair(map, s1, s2)?;
    let width = map.width();
    if width > MAX_EXHAUSTIVE_WIDTH {
        return Err(Error::TooCostly {
            width,
            max: MAX_EXHAUSTIVE_WIDTH,
        });
    }
    let px = outer_products(map, s1);
    let py = outer_products(map, s2);
    let low = width / 2;
    let (lx, ly) = (signed_sums(&px[..low]), signed_sums(&py[..low]));
    let (hx, hy) = (signed_sums(&px[low..]), signed_sums(&py[low..]));
    let r = s1.dim();

    let found = (0..hx.len()).into_par_iter().find_map_first(|hi| {
        (0..lx.len()).find_map(|lo| {
            let q1 = &hx[hi] + &lx[lo];
            // A positive definite matrix has a positive diagonal.
            if (0..r).any(|i| q1[(i, i)] <= T::zero()) {
                return None;
            }
            let q2 = &hy[hi] + &ly[lo];
            if (0..r).any(|i| q2[(i, i)] >= T::zero()) {
                return None;
            }
            let (.., ok) = definiteness_verdict(&q1, &q2, opts.rel_tol);
            ok.then_some((hi << low) | lo)
        })
    });
    Ok(found.map(|mask| {
        SignVector::new(
            (0..width)
                .map(|n| if mask >> n & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }))
}

/// Whether any `v ∈ {±1}ᴰ` separates `f(S₁)` from `f(S₂)` (quadratic activation, `D ≤ 24`).
pub fn brute_force_separable<T: Real>(
    map: &RandomFeatureMap<T>,
    s1: &Subspace<T>,
    s2: &Subspace<T>,
) -> Result<bool> {
    Ok(find_separating_signs(map, s1, s2, &CertifyOptions::default())?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{sample_feature_map, Activation};
    use crate::rng::stream;
    use crate::subspace::sample_stiefel;

    #[test]
    fn table_matches_direct_sums() {
        let ps: Vec<DMatrix<f64>> = (1..=3)
            .map(|k| DMatrix::from_element(1, 1, k as f64))
            .collect();
        let t = signed_sums(&ps);
        assert_eq!(t.len(), 8);
        for (mask, sum) in t.iter().enumerate() {
            let direct: f64 = (0..3)
                .map(|n| {
                    if mask >> n & 1 == 1 {
                        (n + 1) as f64
                    } else {
                        -((n + 1) as f64)
                    }
                })
                .sum();
            assert_eq!(sum[(0, 0)], direct);
        }
    }

    #[test]
    fn lines_with_opposite_preferences() {
        let s1 = Subspace::<f64>::line(&[1.0, 0.0]).unwrap();
        let s2 = Subspace::<f64>::line(&[0.0, 1.0]).unwrap();
        let w = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let map = RandomFeatureMap::from_weights(w, Activation::Quadratic, 1.0).unwrap();
        let v = find_separating_signs(&map, &s1, &s2, &CertifyOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(v.as_slice(), &[1, -1]);
    }

    #[test]
    fn too_narrow_for_rank_is_never_separable() {
        let mut rng = stream(1, &[]);
        let s1: Subspace<f64> = sample_stiefel(6, 3, &mut rng).unwrap();
        let s2: Subspace<f64> = sample_stiefel(6, 3, &mut rng).unwrap();
        let map = sample_feature_map(2, 6, Activation::Quadratic, 1.0, &mut rng).unwrap();
        assert!(!brute_force_separable(&map, &s1, &s2).unwrap());
    }

    #[test]
    fn refuses_wide_maps() {
        let mut rng = stream(2, &[]);
        let s1: Subspace<f64> = sample_stiefel(4, 1, &mut rng).unwrap();
        let s2: Subspace<f64> = sample_stiefel(4, 1, &mut rng).unwrap();
        let map = sample_feature_map(25, 4, Activation::Quadratic, 1.0, &mut rng).unwrap();
        assert!(matches!(
            brute_force_separable(&map, &s1, &s2),
            Err(Error::TooCostly { width: 25, max: 24 })
        ));
    }
}

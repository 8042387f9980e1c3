use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Real;

fn unit_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    m.row_iter()
        .map(|row| {
            let norm = row.norm();
            if norm > T::zero() {
                row.iter().map(|&x| x / norm).collect()
            } else {
                row.iter().copied().collect()
            }
        })
        .collect()
}

/// Perceptron test for homogeneous linear separability of two point sets
/// (rows of `positive` and `negative`).
///
/// Runs up to `max_epochs` passes over unit-normalized points with no bias.
/// `true` means a full pass made no mistake, so the sampled points are
/// strictly separated through the origin. `false` is inconclusive.
pub fn empirical_separable<T: Real>(
    positive: &DMatrix<T>,
    negative: &DMatrix<T>,
    max_epochs: usize,
) -> Result<bool> {
    if positive.ncols() != negative.ncols() {
        return Err(Error::Dimension(format!(
            "point sets differ in dimension ({} vs {})",
            positive.ncols(),
            negative.ncols()
        )));
    }
    let points: Vec<(Vec<T>, bool)> = unit_rows(positive)
        .into_iter()
        .map(|p| (p, true))
        .chain(unit_rows(negative).into_iter().map(|p| (p, false)))
        .collect();
    let mut v = vec![T::zero(); positive.ncols()];
    for _ in 0..max_epochs {
        let mut mistakes = 0usize;
        for (x, is_pos) in &points {
            let score = v.iter().zip(x).fold(T::zero(), |a, (&w, &xi)| a + w * xi);
            let margin = if *is_pos { score } else { -score };
            if margin <= T::zero() {
                mistakes += 1;
                for (w, &xi) in v.iter_mut().zip(x) {
                    if *is_pos {
                        *w += xi;
                    } else {
                        *w -= xi;
                    }
                }
            }
        }
        if mistakes == 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

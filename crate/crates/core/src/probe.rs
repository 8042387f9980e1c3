//! Linear probes on random features: synthetic union-of-subspaces data,
//! softmax regression trained by full-batch gradient descent, and accuracy.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::RandomFeatureMap;
use crate::rng::standard_normal;
use crate::subspace::UnionOfSubspaces;
use crate::Real;

pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_EPOCHS: usize = 500;

const ROW_CHUNK: usize = 64;

/// Rows of `features` with class labels in `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T: Real> {
    features: DMatrix<T>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(features: DMatrix<T>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if n_classes < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        let mut counts = vec![0usize; n_classes];
        for &y in &labels {
            if y >= n_classes {
                return Err(Error::Domain(format!("label {y} outside 0..{n_classes}")));
            }
            counts[y] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Domain(format!("class {empty} has no samples")));
        }
        Ok(Self {
            features,
            labels,
            n_classes,
        })
    }

    pub fn features(&self) -> &DMatrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Rows belonging to `class`, as a matrix.
    pub fn class_rows(&self, class: usize) -> DMatrix<T> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.labels[i] == class)
            .collect();
        self.features.select_rows(&idx)
    }

    /// Same labels, features replaced by `σ(Wx)`.
    pub fn map_features(&self, map: &RandomFeatureMap<T>) -> Result<Self> {
        Ok(Self {
            features: map.apply_batch(&self.features)?,
            labels: self.labels.clone(),
            n_classes: self.n_classes,
        })
    }

    /// Dataset with rows reordered by `perm` (`perm[i]` is the source row of row `i`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(perm),
            labels: perm.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
        }
    }
}

/// `n_per_class` points `U_k z` per class with `z ~ N(0, I_r)`, class by class.
pub fn generate_uos_dataset<T: Real, R: Rng + ?Sized>(
    union: &UnionOfSubspaces<T>,
    n_per_class: usize,
    rng: &mut R,
) -> Result<LabeledDataset<T>> {
    if n_per_class == 0 {
        return Err(Error::Domain("n_per_class must be at least 1".into()));
    }
    let (k, d) = (union.len(), union.ambient_dim());
    let mut features = DMatrix::<T>::zeros(k * n_per_class, d);
    let mut labels = Vec::with_capacity(k * n_per_class);
    for (class, s) in union.members().iter().enumerate() {
        for i in 0..n_per_class {
            let z = DVector::<T>::from_fn(s.dim(), |_, _| standard_normal(rng));
            let x = s.point(&z);
            features
                .row_mut(class * n_per_class + i)
                .copy_from(&x.transpose());
            labels.push(class);
        }
    }
    LabeledDataset::new(features, labels, k)
}

/// Bias-free multiclass linear classifier `x ↦ argmax_k (Vx)_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe<T: Real> {
    weights: DMatrix<T>,
}

impl<T: Real> LinearProbe<T> {
    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        Self {
            weights: DMatrix::zeros(n_classes, dim),
        }
    }

    pub fn from_weights(weights: DMatrix<T>) -> Result<Self> {
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::Domain("probe weights must be finite".into()));
        }
        Ok(Self { weights })
    }

    /// `K × D` weight matrix.
    pub fn weights(&self) -> &DMatrix<T> {
        &self.weights
    }

    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Predicted class; ties go to the lowest index.
    pub fn predict(&self, x: &[T]) -> usize {
        let mut best = 0;
        let mut best_score = T::zero();
        for k in 0..self.n_classes() {
            let score = row_dot(&self.weights, k, x);
            if k == 0 || score > best_score {
                best = k;
                best_score = score;
            }
        }
        best
    }
}

#[inline]
fn row_dot<T: Real>(m: &DMatrix<T>, k: usize, x: &[T]) -> T {
    x.iter()
        .enumerate()
        .fold(T::zero(), |acc, (j, &xj)| acc + m[(k, j)] * xj)
}

fn check_shapes<T: Real>(probe: &LinearProbe<T>, data: &LabeledDataset<T>) -> Result<()> {
    if probe.dim() != data.dim() || probe.n_classes() != data.n_classes() {
        return Err(Error::Dimension(format!(
            "probe is {}×{}, data has {} classes of dimension {}",
            probe.n_classes(),
            probe.dim(),
            data.n_classes(),
            data.dim()
        )));
    }
    Ok(())
}

/// Fraction of rows whose predicted class equals the label.
pub fn accuracy<T: Real>(probe: &LinearProbe<T>, data: &LabeledDataset<T>) -> Result<f64> {
    check_shapes(probe, data)?;
    let correct = (0..data.len())
        .into_par_iter()
        .filter(|&i| {
            let x: Vec<T> = data.features.row(i).iter().copied().collect();
            probe.predict(&x) == data.labels[i]
        })
        .count();
    Ok(correct as f64 / data.len() as f64)
}

/// Row-major copy of the data in a canonical row order (by label, then by
/// feature values), so full-batch sums do not depend on the input order.
struct CanonicalRows<T> {
    rows: Vec<T>,
    labels: Vec<usize>,
    dim: usize,
}

impl<T: Real> CanonicalRows<T> {
    fn new(data: &LabeledDataset<T>) -> Self {
        let dim = data.dim();
        let keyed: Vec<Vec<f64>> = data
            .features
            .row_iter()
            .map(|r| r.iter().map(|x| x.as_f64()).collect())
            .collect();
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.sort_by(|&a, &b| {
            data.labels[a].cmp(&data.labels[b]).then_with(|| {
                keyed[a]
                    .iter()
                    .zip(&keyed[b])
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
        });
        let mut rows = Vec::with_capacity(data.len() * dim);
        for &i in &order {
            rows.extend(data.features.row(i).iter().copied());
        }
        Self {
            rows,
            labels: order.iter().map(|&i| data.labels[i]).collect(),
            dim,
        }
    }

    fn row(&self, i: usize) -> &[T] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

/// Mean cross-entropy and its gradient for one chunk of rows (unnormalized sums).
fn chunk_loss_grad<T: Real>(
    weights: &[T],
    n_classes: usize,
    data: &CanonicalRows<T>,
    rows: std::ops::Range<usize>,
) -> (T, Vec<T>) {
    let dim = data.dim;
    let mut grad = vec![T::zero(); n_classes * dim];
    let mut loss = T::zero();
    let mut logits = vec![T::zero(); n_classes];
    for i in rows {
        let x = data.row(i);
        for (k, z) in logits.iter_mut().enumerate() {
            let w = &weights[k * dim..(k + 1) * dim];
            *z = w.iter().zip(x).fold(T::zero(), |a, (&wj, &xj)| a + wj * xj);
        }
        let zmax = logits.iter().copied().fold(logits[0], |a, b| a.max(b));
        let sum_exp = logits.iter().fold(T::zero(), |a, &z| a + (z - zmax).exp());
        let log_norm = zmax + sum_exp.ln();
        let y = data.labels[i];
        loss += log_norm - logits[y];
        for k in 0..n_classes {
            let p = (logits[k] - log_norm).exp();
            let coef = if k == y { p - T::one() } else { p };
            let g = &mut grad[k * dim..(k + 1) * dim];
            for (gj, &xj) in g.iter_mut().zip(x) {
                *gj += coef * xj;
            }
        }
    }
    (loss, grad)
}

fn loss_and_gradient_rows<T: Real>(
    weights: &[T],
    n_classes: usize,
    data: &CanonicalRows<T>,
) -> (T, Vec<T>) {
    let n = data.len();
    let parts: Vec<(T, Vec<T>)> = (0..n.div_ceil(ROW_CHUNK))
        .map(|c| {
            chunk_loss_grad(
                weights,
                n_classes,
                data,
                c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n),
            )
        })
        .collect();
    let mut loss = T::zero();
    let mut grad = vec![T::zero(); weights.len()];
    for (l, g) in parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    let inv_n = T::one() / T::lit(n as f64);
    grad.iter_mut().for_each(|g| *g *= inv_n);
    (loss * inv_n, grad)
}

fn flatten<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    m.transpose().as_slice().to_vec()
}

/// Mean softmax cross-entropy of `probe` on `data` and its gradient w.r.t. the weights.
pub fn cross_entropy_and_gradient<T: Real>(
    probe: &LinearProbe<T>,
    data: &LabeledDataset<T>,
) -> Result<(T, DMatrix<T>)> {
    check_shapes(probe, data)?;
    let rows = CanonicalRows::new(data);
    let (loss, grad) = loss_and_gradient_rows(&flatten(&probe.weights), probe.n_classes(), &rows);
    Ok((
        loss,
        DMatrix::from_row_slice(probe.n_classes(), probe.dim(), &grad),
    ))
}

/// Full-batch gradient descent on mean cross-entropy from zero weights.
pub fn train_probe<T: Real>(
    data: &LabeledDataset<T>,
    epochs: usize,
    learning_rate: T,
) -> Result<LinearProbe<T>> {
    train_probe_traced(data, epochs, learning_rate, |_, _, _| {})
}

/// As [`train_probe`], calling `observe(epoch, probe, loss)` for the weights
/// before each update (epoch `0` is the zero initialization) and once more
/// for the final weights (epoch `epochs`).
pub fn train_probe_traced<T: Real, F>(
    data: &LabeledDataset<T>,
    epochs: usize,
    learning_rate: T,
    mut observe: F,
) -> Result<LinearProbe<T>>
where
    F: FnMut(usize, &LinearProbe<T>, T),
{
    if !(learning_rate > T::zero()) {
        return Err(Error::Domain(format!(
            "learning rate must be positive, got {learning_rate}"
        )));
    }
    if !data.features.iter().all(|x| x.is_finite()) {
        return Err(Error::Domain("training features must be finite".into()));
    }
    let (k, dim) = (data.n_classes(), data.dim());
    let rows = CanonicalRows::new(data);
    let mut weights = vec![T::zero(); k * dim];
    let as_probe = |w: &[T]| LinearProbe {
        weights: DMatrix::from_row_slice(k, dim, w),
    };
    for epoch in 0..=epochs {
        let (loss, grad) = loss_and_gradient_rows(&weights, k, &rows);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        observe(epoch, &as_probe(&weights), loss);
        if epoch == epochs {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= learning_rate * *g;
        }
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
    }
    Ok(as_probe(&weights))
}

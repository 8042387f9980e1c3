//! Separability certificates for quadratic random features of subspaces.
//!
//! With quadratic activation, `vᵀf(Uα) = αᵀ(Σₙ vₙ xₙxₙᵀ)α` where `xₙ = Uᵀwₙ`,
//! so `f(S₁)` and `f(S₂)` are separated by `v` exactly when
//! `Q₁ = Σ vₙ xₙxₙᵀ ≻ 0` and `Q₂ = Σ vₙ yₙyₙᵀ ≺ 0`. The sign vector used is
//! the projection-based one, `vₙ = sign(‖U₁ᵀwₙ‖² − ‖U₂ᵀwₙ‖²)`.

mod bound;
mod exhaustive;
mod perceptron;

pub use bound::{gamma1, gamma2, width_bound_binary, width_bound_multiclass, WidthBoundReport};
pub use exhaustive::{brute_force_separable, find_separating_signs, MAX_EXHAUSTIVE_WIDTH};
pub use perceptron::empirical_separable;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::RandomFeatureMap;
use crate::subspace::{
    concat_span, extend_basis, principal_angles, PrincipalAngles, Subspace, UnionOfSubspaces,
};
use crate::Real;

/// Relative definiteness tolerance: `λ` counts as strictly positive when it
/// exceeds `rel_tol × ‖Q‖₂`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub rel_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// A vector of `±1` entries, one per feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    /// Panics if any entry is not `±1`.
    pub fn new(signs: Vec<i8>) -> Self {
        assert!(signs.iter().all(|&s| s == 1 || s == -1), "signs must be ±1");
        Self(signs)
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `+1` entries.
    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&s| s > 0).count()
    }

    /// `vᵀz`.
    pub fn dot<T: Real>(&self, z: &[T]) -> T {
        self.0.iter().zip(z).fold(
            T::zero(),
            |acc, (&s, &x)| if s > 0 { acc + x } else { acc - x },
        )
    }
}

/// Outcome of checking `Q₁ ≻ 0` and `Q₂ ≺ 0` for one sign vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityCertificate<T: Real> {
    pub v: SignVector,
    pub q1: DMatrix<T>,
    pub q2: DMatrix<T>,
    pub lambda_min_q1: T,
    pub lambda_max_q2: T,
    /// Positivity threshold applied to `λ_min(Q₁)`.
    pub tol_q1: T,
    /// Negativity threshold applied to `λ_max(Q₂)`.
    pub tol_q2: T,
    pub separable: bool,
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub(crate) fn extreme_eigenvalues<T: Real>(q: &DMatrix<T>) -> (T, T) {
    let eig = SymmetricEigen::new(q.clone()).eigenvalues;
    let lo = eig.iter().copied().fold(eig[0], |a, b| a.min(b));
    let hi = eig.iter().copied().fold(eig[0], |a, b| a.max(b));
    (lo, hi)
}

/// Verdict for a pair `(Q₁, Q₂)`: `(λ_min(Q₁), λ_max(Q₂), tol₁, tol₂, separable)`.
pub(crate) fn definiteness_verdict<T: Real>(
    q1: &DMatrix<T>,
    q2: &DMatrix<T>,
    rel_tol: f64,
) -> (T, T, T, T, bool) {
    let (lo1, hi1) = extreme_eigenvalues(q1);
    let (lo2, hi2) = extreme_eigenvalues(q2);
    let rel = T::lit(rel_tol);
    let tol1 = rel * lo1.abs().max(hi1.abs());
    let tol2 = rel * lo2.abs().max(hi2.abs());
    let separable = lo1 > tol1 && hi2 < -tol2;
    (lo1, hi2, tol1, tol2, separable)
}

fn check_pair<T: Real>(
    map: &RandomFeatureMap<T>,
    s1: &Subspace<T>,
    s2: &Subspace<T>,
) -> Result<()> {
    let d = map.input_dim();
    if s1.ambient_dim() != d || s2.ambient_dim() != d {
        return Err(Error::Dimension(format!(
            "map expects inputs in ℝ^{d}, subspaces live in ℝ^{} and ℝ^{}",
            s1.ambient_dim(),
            s2.ambient_dim()
        )));
    }
    if s1.dim() != s2.dim() {
        return Err(Error::AssumptionViolation(format!(
            "subspaces must have equal dimension (r={} vs r={})",
            s1.dim(),
            s2.dim()
        )));
    }
    Ok(())
}

fn check_quadratic<T: Real>(map: &RandomFeatureMap<T>) -> Result<()> {
    if !map.activation().is_quadratic() {
        return Err(Error::UnsupportedActivation(map.activation().to_string()));
    }
    Ok(())
}

/// `Uᵀw` computed with a fixed summation order.
#[inline]
pub(crate) fn project_row<T: Real>(basis: &DMatrix<T>, w: &[T], out: &mut [T]) {
    let d = basis.nrows();
    let cols = basis.as_slice();
    for (j, o) in out.iter_mut().enumerate() {
        let col = &cols[j * d..(j + 1) * d];
        *o = col
            .iter()
            .zip(w)
            .fold(T::zero(), |acc, (&u, &x)| acc + u * x);
    }
}

/// Builds `Q₁`, `Q₂` and the projection-based signs one weight row at a time.
#[derive(Debug, Clone)]
pub(crate) struct QuadraticFormAccumulator<'a, T: Real> {
    u1: &'a DMatrix<T>,
    u2: &'a DMatrix<T>,
    x: Vec<T>,
    y: Vec<T>,
    q1: DMatrix<T>,
    q2: DMatrix<T>,
    signs: Vec<i8>,
}

impl<'a, T: Real> QuadraticFormAccumulator<'a, T> {
    pub(crate) fn new(s1: &'a Subspace<T>, s2: &'a Subspace<T>) -> Self {
        let r = s1.dim();
        Self {
            u1: s1.basis(),
            u2: s2.basis(),
            x: vec![T::zero(); r],
            y: vec![T::zero(); r],
            q1: DMatrix::zeros(r, r),
            q2: DMatrix::zeros(r, r),
            signs: Vec::new(),
        }
    }

    pub(crate) fn push_row(&mut self, w: &[T]) {
        project_row(self.u1, w, &mut self.x);
        project_row(self.u2, w, &mut self.y);
        let nx = self.x.iter().fold(T::zero(), |a, &b| a + b * b);
        let ny = self.y.iter().fold(T::zero(), |a, &b| a + b * b);
        // Ties have probability zero; they go to +1.
        let positive = nx >= ny;
        self.signs.push(if positive { 1 } else { -1 });
        let r = self.x.len();
        for j in 0..r {
            for i in 0..r {
                let px = self.x[i] * self.x[j];
                let py = self.y[i] * self.y[j];
                if positive {
                    self.q1[(i, j)] += px;
                    self.q2[(i, j)] += py;
                } else {
                    self.q1[(i, j)] -= px;
                    self.q2[(i, j)] -= py;
                }
            }
        }
    }

    pub(crate) fn finish(self, rel_tol: f64) -> SeparabilityCertificate<T> {
        let (lambda_min_q1, lambda_max_q2, tol_q1, tol_q2, separable) =
            definiteness_verdict(&self.q1, &self.q2, rel_tol);
        SeparabilityCertificate {
            v: SignVector(self.signs),
            q1: self.q1,
            q2: self.q2,
            lambda_min_q1,
            lambda_max_q2,
            tol_q1,
            tol_q2,
            separable,
        }
    }
}

/// Projection-based classifier: `vₙ = +1` iff `‖U₁ᵀwₙ‖² ≥ ‖U₂ᵀwₙ‖²`.
///
/// Uses only `W` and the bases, so it is defined for any activation.
pub fn projection_classifier<T: Real>(
    map: &RandomFeatureMap<T>,
    s1: &Subspace<T>,
    s2: &Subspace<T>,
) -> Result<SignVector> {
    check_pair(map, s1, s2)?;
    let r = s1.dim();
    let mut x = vec![T::zero(); r];
    let mut y = vec![T::zero(); r];
    let signs = (0..map.width())
        .map(|n| {
            project_row(s1.basis(), map.row(n), &mut x);
            project_row(s2.basis(), map.row(n), &mut y);
            let nx = x.iter().fold(T::zero(), |a, &b| a + b * b);
            let ny = y.iter().fold(T::zero(), |a, &b| a + b * b);
            if nx >= ny {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(SignVector(signs))
}

/// Certificate for the pair `(S₁, S₂)` under a quadratic feature map.
///
/// `separable == true` proves `f(S₁)` and `f(S₂)` are linearly separable;
/// `false` only says the projection-based `v` does not separate them.
pub fn certify_binary<T: Real>(
    map: &RandomFeatureMap<T>,
    s1: &Subspace<T>,
    s2: &Subspace<T>,
) -> Result<SeparabilityCertificate<T>> {
    certify_binary_with(map, s1, s2, &CertifyOptions::default())
}

pub fn certify_binary_with<T: Real>(
    map: &RandomFeatureMap<T>,
    s1: &Subspace<T>,
    s2: &Subspace<T>,
    opts: &CertifyOptions,
) -> Result<SeparabilityCertificate<T>> {
    check_quadratic(map)?;
    check_pair(map, s1, s2)?;
    let mut acc = QuadraticFormAccumulator::new(s1, s2);
    for n in 0..map.width() {
        acc.push_row(map.row(n));
    }
    Ok(acc.finish(opts.rel_tol))
}

/// One-vs-rest certificate for class `k` of a union.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsRestCertificate<T: Real> {
    pub class: usize,
    /// Principal angles between the extended class subspace and the span of the others.
    pub angles: PrincipalAngles<T>,
    pub certificate: SeparabilityCertificate<T>,
}

/// For every class `k`, certifies `S̃ₖ` (a random `(K−1)r`-dimensional
/// extension of `Sₖ`) against `S̄ₖ` (the span of all other classes).
pub fn certify_multiclass<T: Real, R: Rng + ?Sized>(
    map: &RandomFeatureMap<T>,
    union: &UnionOfSubspaces<T>,
    rng: &mut R,
) -> Result<Vec<OneVsRestCertificate<T>>> {
    certify_multiclass_with(map, union, rng, &CertifyOptions::default())
}

pub fn certify_multiclass_with<T: Real, R: Rng + ?Sized>(
    map: &RandomFeatureMap<T>,
    union: &UnionOfSubspaces<T>,
    rng: &mut R,
    opts: &CertifyOptions,
) -> Result<Vec<OneVsRestCertificate<T>>> {
    check_quadratic(map)?;
    let r = union.common_dim().ok_or_else(|| {
        Error::AssumptionViolation("all subspaces of the union must share one dimension".into())
    })?;
    let (k, d) = (union.len(), union.ambient_dim());
    let r_ext = (k - 1) * r;
    if 2 * r_ext >= d {
        return Err(Error::AssumptionViolation(format!(
            "one-vs-rest certification needs (K−1)r < d/2, got K={k}, r={r}, d={d}"
        )));
    }
    let members = union.members();
    (0..k)
        .map(|class| {
            let others: Vec<&Subspace<T>> = members
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != class)
                .map(|(_, s)| s)
                .collect();
            let rest = concat_span(&others)?;
            if rest.dim() != r_ext {
                return Err(Error::AssumptionViolation(format!(
                    "span of the other classes has dimension {} instead of {r_ext}",
                    rest.dim()
                )));
            }
            let extended = extend_basis(&members[class], r_ext, rng)?;
            let angles = principal_angles(&extended, &rest)?;
            let certificate = certify_binary_with(map, &extended, &rest, opts)?;
            Ok(OneVsRestCertificate {
                class,
                angles,
                certificate,
            })
        })
        .collect()
}

//! Linear subspaces of ℝᵈ held as orthonormal bases, unions of them, and the
//! geometry between pairs: principal angles and the spectrum of the
//! difference of their orthogonal projectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::gaussian_matrix;
use crate::Real;

/// Relative singular-value threshold used for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-10;

/// An `r`-dimensional subspace of ℝᵈ, stored as a `d × r` matrix with
/// orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T: Real> {
    basis: DMatrix<T>,
}

impl<T: Real> Subspace<T> {
    /// Wraps a basis that is already orthonormal (checked).
    pub fn from_orthonormal(basis: DMatrix<T>) -> Result<Self> {
        let (d, r) = basis.shape();
        if r == 0 || r > d {
            return Err(Error::Dimension(format!(
                "subspace basis must satisfy 1 ≤ r ≤ d, got {d}×{r}"
            )));
        }
        let deviation = orthonormality_defect(&basis);
        if !(deviation <= T::ORTHO_TOL) {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { basis })
    }

    /// Orthonormalizes the columns of `spanning` (Gram-Schmidt, in column
    /// order, two passes), which must have full column rank.
    pub fn from_spanning(spanning: DMatrix<T>) -> Result<Self> {
        let (d, r) = spanning.shape();
        if r == 0 || r > d {
            return Err(Error::Dimension(format!(
                "spanning set must satisfy 1 ≤ r ≤ d, got {d}×{r}"
            )));
        }
        let mut q = spanning;
        for j in 0..r {
            let original = q.column(j).norm();
            for _ in 0..2 {
                for i in 0..j {
                    let c = q.column(i).dot(&q.column(j));
                    let qi = q.column(i).into_owned();
                    q.column_mut(j).axpy(-c, &qi, T::one());
                }
            }
            let norm = q.column(j).norm();
            if !(norm > T::lit(RANK_REL_TOL) * original) {
                return Err(Error::Dimension(
                    "spanning set is rank deficient".to_string(),
                ));
            }
            q.column_mut(j).unscale_mut(norm);
        }
        Self::from_orthonormal(q)
    }

    /// Span of a single nonzero vector.
    pub fn line(direction: &[T]) -> Result<Self> {
        Self::from_spanning(DMatrix::from_column_slice(direction.len(), 1, direction))
    }

    /// The `d × r` orthonormal basis.
    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn into_basis(self) -> DMatrix<T> {
        self.basis
    }

    /// Ambient dimension `d`.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Intrinsic dimension `r`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector `UUᵀ`.
    pub fn projector(&self) -> DMatrix<T> {
        &self.basis * self.basis.transpose()
    }

    /// `Uᵀx`, the coordinates of the projection of `x`.
    pub fn coordinates(&self, x: &DVector<T>) -> DVector<T> {
        self.basis.tr_mul(x)
    }

    /// `U α`, the point with coordinates `α`.
    pub fn point(&self, coeffs: &DVector<T>) -> DVector<T> {
        &self.basis * coeffs
    }

    /// Norm of the component of `x` orthogonal to the subspace.
    pub fn residual_norm(&self, x: &DVector<T>) -> T {
        (x - &self.basis * self.basis.tr_mul(x)).norm()
    }

    /// Same subspace expressed in a rotated basis `U Q` (`Q` orthogonal `r × r`).
    pub fn rotate_basis(&self, q: &DMatrix<T>) -> Result<Self> {
        if q.shape() != (self.dim(), self.dim()) {
            return Err(Error::Dimension(format!(
                "basis rotation must be {r}×{r}, got {:?}",
                q.shape(),
                r = self.dim()
            )));
        }
        Self::from_orthonormal(&self.basis * q)
    }

    /// Image `G U` of the subspace under an orthogonal map `G` of ℝᵈ.
    pub fn transform(&self, g: &DMatrix<T>) -> Result<Self> {
        if g.shape() != (self.ambient_dim(), self.ambient_dim()) {
            return Err(Error::Dimension(format!(
                "ambient transform must be {d}×{d}, got {:?}",
                g.shape(),
                d = self.ambient_dim()
            )));
        }
        Self::from_orthonormal(g * &self.basis)
    }
}

/// `‖UᵀU − I‖_F` as `f64`.
pub fn orthonormality_defect<T: Real>(basis: &DMatrix<T>) -> f64 {
    let gram = basis.tr_mul(basis);
    let eye = DMatrix::<T>::identity(gram.nrows(), gram.ncols());
    (gram - eye).norm().as_f64()
}

fn sign_fixed_q<T: Real>(mut q: DMatrix<T>, rfac: &DMatrix<T>) -> DMatrix<T> {
    for j in 0..q.ncols().min(rfac.nrows()) {
        if rfac[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormal `Q` from a Householder QR of `m`, with columns flipped so the
/// triangular factor has a nonnegative diagonal.
fn orthonormalize<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    let qr = m.qr();
    let rfac = qr.r();
    sign_fixed_q(qr.q(), &rfac)
}

/// Uniform draw from the Stiefel manifold of `d × r` orthonormal frames.
pub fn sample_stiefel<T: Real, R: Rng + ?Sized>(
    d: usize,
    r: usize,
    rng: &mut R,
) -> Result<Subspace<T>> {
    if r == 0 || r > d {
        return Err(Error::Dimension(format!(
            "Stiefel sample needs 1 ≤ r ≤ d, got d={d}, r={r}"
        )));
    }
    let g = gaussian_matrix::<T, _>(d, r, T::one(), rng);
    Ok(Subspace {
        basis: orthonormalize(g),
    })
}

/// Principal angles between two subspaces, in radians, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngles<T: Real> {
    angles: Vec<T>,
}

impl<T: Real> PrincipalAngles<T> {
    /// Builds from arbitrary angles; each must lie in `[0, π/2]`.
    pub fn new(mut angles: Vec<T>) -> Result<Self> {
        let half_pi = T::frac_pi_2();
        if let Some(bad) = angles.iter().find(|&&a| !(a >= T::zero() && a <= half_pi)) {
            return Err(Error::Domain(format!(
                "principal angle {bad} outside [0, π/2]"
            )));
        }
        angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Smallest angle θ_min.
    pub fn min(&self) -> T {
        self.angles[0]
    }

    pub fn sines(&self) -> Vec<T> {
        self.angles.iter().map(|a| a.sin()).collect()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.angles
    }
}

fn check_same_ambient<T: Real>(s1: &Subspace<T>, s2: &Subspace<T>) -> Result<()> {
    if s1.ambient_dim() != s2.ambient_dim() {
        return Err(Error::Dimension(format!(
            "subspaces live in different ambient spaces (d={} vs d={})",
            s1.ambient_dim(),
            s2.ambient_dim()
        )));
    }
    Ok(())
}

fn sort_descending<T: Real>(xs: &mut [T]) {
    xs.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
}

/// `cos θ_ℓ = σ_ℓ(U₁ᵀU₂)`, singular values clamped to `[0, 1]`.
pub fn principal_angles<T: Real>(s1: &Subspace<T>, s2: &Subspace<T>) -> Result<PrincipalAngles<T>> {
    check_same_ambient(s1, s2)?;
    let cross = s1.basis.tr_mul(&s2.basis);
    let mut sv: Vec<T> = cross.singular_values().iter().copied().collect();
    sort_descending(&mut sv);
    let angles = sv
        .into_iter()
        .take(s1.dim().min(s2.dim()))
        .map(|s| s.clamp(T::zero(), T::one()).acos())
        .collect();
    PrincipalAngles::new(angles)
}

/// Eigenvalues of `U₁U₁ᵀ − U₂U₂ᵀ`, descending.
///
/// For equal-dimensional subspaces with θ_min > 0 these are `±sin θ_ℓ` and
/// `d − 2r` zeros.
pub fn projection_difference_spectrum<T: Real>(
    s1: &Subspace<T>,
    s2: &Subspace<T>,
) -> Result<Vec<T>> {
    check_same_ambient(s1, s2)?;
    if s1.dim() != s2.dim() {
        return Err(Error::AssumptionViolation(format!(
            "subspaces must have equal dimension (r={} vs r={})",
            s1.dim(),
            s2.dim()
        )));
    }
    let diff = s1.projector() - s2.projector();
    let mut eig: Vec<T> = SymmetricEigen::new(diff)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    sort_descending(&mut eig);
    Ok(eig)
}

/// Extends `s` to a `target_r`-dimensional subspace containing it; the new
/// directions are drawn uniformly from the orthogonal complement.
pub fn extend_basis<T: Real, R: Rng + ?Sized>(
    s: &Subspace<T>,
    target_r: usize,
    rng: &mut R,
) -> Result<Subspace<T>> {
    let (d, r) = (s.ambient_dim(), s.dim());
    if target_r > d {
        return Err(Error::Dimension(format!(
            "cannot extend to r={target_r} inside ℝ^{d}"
        )));
    }
    if target_r < r {
        return Err(Error::Dimension(format!(
            "target dimension {target_r} is smaller than current dimension {r}"
        )));
    }
    if target_r == r {
        return Ok(s.clone());
    }
    let u = &s.basis;
    let mut extra = gaussian_matrix::<T, _>(d, target_r - r, T::one(), rng);
    // Project out twice; a single pass loses orthogonality to U in floating point.
    for _ in 0..2 {
        extra -= u * u.tr_mul(&extra);
        extra = orthonormalize(extra);
    }
    let mut basis = DMatrix::<T>::zeros(d, target_r);
    basis.columns_mut(0, r).copy_from(u);
    basis.columns_mut(r, target_r - r).copy_from(&extra);
    Subspace::from_orthonormal(basis)
}

/// Orthonormal basis of the column space of `[U₁ U₂ … U_K]`.
///
/// The dimension is the number of singular values above
/// `RANK_REL_TOL × σ_max`.
pub fn concat_span<T: Real>(subs: &[&Subspace<T>]) -> Result<Subspace<T>> {
    let first = subs
        .first()
        .ok_or_else(|| Error::Dimension("cannot span an empty list of subspaces".into()))?;
    let d = first.ambient_dim();
    for s in subs {
        check_same_ambient(first, s)?;
    }
    let total: usize = subs.iter().map(|s| s.dim()).sum();
    let mut stacked = DMatrix::<T>::zeros(d, total);
    let mut col = 0;
    for s in subs {
        stacked.columns_mut(col, s.dim()).copy_from(&s.basis);
        col += s.dim();
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let thresh = T::lit(RANK_REL_TOL) * smax;
    let mut keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > thresh).collect();
    keep.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).expect("finite").then(a.cmp(&b)));
    let basis = u.select_columns(&keep);
    Subspace::from_orthonormal(basis)
}

/// An ordered collection of `K ≥ 2` subspaces sharing an ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionOfSubspaces<T: Real> {
    members: Vec<Subspace<T>>,
}

impl<T: Real> UnionOfSubspaces<T> {
    pub fn new(members: Vec<Subspace<T>>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::Dimension(format!(
                "a union needs at least 2 subspaces, got {}",
                members.len()
            )));
        }
        let d = members[0].ambient_dim();
        if let Some(bad) = members.iter().find(|s| s.ambient_dim() != d) {
            return Err(Error::Dimension(format!(
                "union members disagree on ambient dimension ({d} vs {})",
                bad.ambient_dim()
            )));
        }
        Ok(Self { members })
    }

    /// `K` independent uniform draws of `d × r` frames.
    pub fn sample<R: Rng + ?Sized>(k: usize, d: usize, r: usize, rng: &mut R) -> Result<Self> {
        let members = (0..k)
            .map(|_| sample_stiefel(d, r, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[Subspace<T>] {
        &self.members
    }

    /// Number of subspaces `K`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.members[0].ambient_dim()
    }

    /// The shared intrinsic dimension, if every member has the same one.
    pub fn common_dim(&self) -> Option<usize> {
        let r = self.members[0].dim();
        self.members.iter().all(|s| s.dim() == r).then_some(r)
    }
}

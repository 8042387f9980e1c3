//! Closed-form network-width bounds.
//!
//! Binary case, with θ_min the smallest principal angle:
//!
//! ```text
//! D ≥ 2π (4r² + √(Σ sin²θ_ℓ)) (r + 1) / sin²θ_min · ln(2r/δ)
//!   = (16r² + 4γ₂r) / γ₁² · ln(2r/δ)
//! γ₁ = √(2/π) sin θ_min / √(r+1),   γ₂ = √(Σ sin²θ_ℓ) / r
//! ```
//!
//! One-vs-rest over `K` classes uses `r̃ = (K−1)r` angles per class, the
//! maximum over classes, and `ln(2Kr̃/δ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WidthBoundReport {
    /// Intrinsic dimension of each class subspace.
    pub r: usize,
    /// Number of classes.
    pub k: usize,
    /// Dimension the bound is evaluated at: `r` for two classes, `(K−1)r` one-vs-rest.
    pub effective_r: usize,
    /// Angles that attain the bound (the maximizing class for `K > 2`).
    pub theta: Vec<f64>,
    /// Index of the maximizing class, one-vs-rest only.
    pub class: Option<usize>,
    pub delta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Unrounded right-hand side.
    pub raw_width: f64,
    pub min_width: u64,
    /// `1 − δ` (binary) or `1 − Kδ` (one-vs-rest).
    pub success_probability: f64,
}

impl WidthBoundReport {
    pub fn theta_min(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `√(2/π) · sin θ_min / √(r+1)`.
pub fn gamma1(r: usize, theta_min: f64) -> f64 {
    (2.0 / PI).sqrt() * theta_min.sin() / ((r + 1) as f64).sqrt()
}

/// `(1/r) · √(Σ sin²θ_ℓ)`.
pub fn gamma2(r: usize, theta: &[f64]) -> f64 {
    theta.iter().map(|t| t.sin().powi(2)).sum::<f64>().sqrt() / r as f64
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_angles(theta: &[f64], expected: usize) -> Result<()> {
    if theta.len() != expected {
        return Err(Error::Dimension(format!(
            "expected {expected} principal angles, got {}",
            theta.len()
        )));
    }
    for &t in theta {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::AssumptionViolation(format!(
                "principal angles must be strictly positive (got {t}); the bound diverges"
            )));
        }
        if t > FRAC_PI_2 + 1e-12 {
            return Err(Error::Domain(format!("principal angle {t} exceeds π/2")));
        }
    }
    Ok(())
}

/// `2π (4r² + √Σsin²θ)(r+1)/sin²θ_min · ln(log_arg)`.
fn raw_width(r: usize, theta: &[f64], log_arg: f64) -> f64 {
    let rf = r as f64;
    let theta_min = theta.iter().copied().fold(f64::INFINITY, f64::min);
    let root = theta.iter().map(|t| t.sin().powi(2)).sum::<f64>().sqrt();
    2.0 * PI * (4.0 * rf * rf + root) * (rf + 1.0) / theta_min.sin().powi(2) * log_arg.ln()
}

fn to_width(raw: f64) -> Result<u64> {
    if !raw.is_finite() || raw >= u64::MAX as f64 {
        return Err(Error::AssumptionViolation(format!(
            "width bound is not representable ({raw:e}); θ_min is too close to 0"
        )));
    }
    Ok((raw.ceil() as u64).max(1))
}

/// Minimum width guaranteeing separability of two `r`-dimensional subspaces
/// with probability at least `1 − δ`.
pub fn width_bound_binary(r: usize, theta: &[f64], delta: f64) -> Result<WidthBoundReport> {
    if r == 0 {
        return Err(Error::Dimension("r must be at least 1".into()));
    }
    check_angles(theta, r)?;
    check_delta(delta)?;
    let raw = raw_width(r, theta, 2.0 * r as f64 / delta);
    let theta_min = theta.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WidthBoundReport {
        r,
        k: 2,
        effective_r: r,
        theta: theta.to_vec(),
        class: None,
        delta,
        gamma1: gamma1(r, theta_min),
        gamma2: gamma2(r, theta),
        raw_width: raw,
        min_width: to_width(raw)?,
        success_probability: 1.0 - delta,
    })
}

/// Minimum width guaranteeing one-vs-rest separability of all `K` classes
/// with probability at least `1 − Kδ`. `per_class_theta[k]` holds the
/// `(K−1)r` principal angles between the extended class-`k` subspace and the
/// span of the other classes.
pub fn width_bound_multiclass(
    r: usize,
    k: usize,
    per_class_theta: &[Vec<f64>],
    delta: f64,
) -> Result<WidthBoundReport> {
    if r == 0 {
        return Err(Error::Dimension("r must be at least 1".into()));
    }
    if k < 2 {
        return Err(Error::Dimension(format!(
            "need at least 2 classes, got {k}"
        )));
    }
    if per_class_theta.len() != k {
        return Err(Error::Dimension(format!(
            "expected {k} angle vectors, got {}",
            per_class_theta.len()
        )));
    }
    check_delta(delta)?;
    let r_ext = (k - 1) * r;
    for theta in per_class_theta {
        check_angles(theta, r_ext)?;
    }
    let log_arg = 2.0 * k as f64 * r_ext as f64 / delta;
    let (class, raw) = per_class_theta
        .iter()
        .map(|theta| raw_width(r_ext, theta, log_arg))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, w)| {
            if w > best.1 {
                (i, w)
            } else {
                best
            }
        });
    let theta = per_class_theta[class].clone();
    let theta_min = theta.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WidthBoundReport {
        r,
        k,
        effective_r: r_ext,
        gamma1: gamma1(r_ext, theta_min),
        gamma2: gamma2(r_ext, &theta),
        theta,
        class: Some(class),
        delta,
        raw_width: raw,
        min_width: to_width(raw)?,
        success_probability: 1.0 - k as f64 * delta,
    })
}

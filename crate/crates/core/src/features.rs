//! Random feature maps `x ↦ σ(Wx)` with Gaussian `W` and an entry-wise activation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::gaussian_matrix;
use crate::Real;

/// Entry-wise nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Quadratic,
    Relu,
    LeakyRelu {
        slope: f64,
    },
    Elu {
        alpha: f64,
    },
    /// Exact form `z·Φ(z)` with the Gaussian CDF.
    Gelu,
    Identity,
}

impl Activation {
    pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
    pub const DEFAULT_ELU_ALPHA: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::LeakyRelu { slope } if !(slope > 0.0 && slope.is_finite()) => Err(
                Error::Domain(format!("leaky_relu slope must be positive, got {slope}")),
            ),
            Activation::Elu { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(Error::Domain(
                format!("elu alpha must be positive, got {alpha}"),
            )),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply<T: Real>(&self, z: T) -> T {
        match *self {
            Activation::Quadratic => z * z,
            Activation::Relu => {
                if z > T::zero() {
                    z
                } else {
                    T::zero()
                }
            }
            Activation::LeakyRelu { slope } => {
                if z > T::zero() {
                    z
                } else {
                    z * T::lit(slope)
                }
            }
            Activation::Elu { alpha } => {
                if z > T::zero() {
                    z
                } else {
                    T::lit(alpha) * (z.exp() - T::one())
                }
            }
            Activation::Gelu => {
                let x = z.as_f64();
                T::lit(0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2)))
            }
            Activation::Identity => z,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, Activation::Quadratic)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Quadratic => write!(f, "quadratic"),
            Activation::Relu => write!(f, "relu"),
            Activation::LeakyRelu { slope } => write!(f, "leaky_relu:{slope}"),
            Activation::Elu { alpha } => write!(f, "elu:{alpha}"),
            Activation::Gelu => write!(f, "gelu"),
            Activation::Identity => write!(f, "identity"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    /// Accepts `quadratic`, `relu`, `leaky_relu[:slope]`, `elu[:alpha]`,
    /// `gelu` and `identity`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let parse_param = |default: f64| -> Result<f64> {
            match param {
                None => Ok(default),
                Some(p) => p
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("bad activation parameter `{p}`"))),
            }
        };
        let act = match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "quadratic" | "square" => Activation::Quadratic,
            "relu" => Activation::Relu,
            "leaky_relu" | "leakyrelu" => Activation::LeakyRelu {
                slope: parse_param(Self::DEFAULT_LEAKY_SLOPE)?,
            },
            "elu" => Activation::Elu {
                alpha: parse_param(Self::DEFAULT_ELU_ALPHA)?,
            },
            "gelu" => Activation::Gelu,
            "identity" | "linear" => Activation::Identity,
            other => return Err(Error::Domain(format!("unknown activation `{other}`"))),
        };
        if param.is_some() && !matches!(act, Activation::LeakyRelu { .. } | Activation::Elu { .. })
        {
            return Err(Error::Domain(format!(
                "activation `{name}` takes no parameter"
            )));
        }
        act.validate()?;
        Ok(act)
    }
}

/// A fixed random layer `f_W(x) = σ(Wx)` with `W ∈ ℝ^{D×d}` and no bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatureMap<T: Real> {
    weights: DMatrix<T>,
    activation: Activation,
    weight_std: T,
    // Wᵀ, so that each row of W is a contiguous column.
    weights_t: DMatrix<T>,
}

impl<T: Real> RandomFeatureMap<T> {
    /// Builds a map from explicit weights.
    pub fn from_weights(
        weights: DMatrix<T>,
        activation: Activation,
        weight_std: T,
    ) -> Result<Self> {
        activation.validate()?;
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "weight matrix must be at least 1×1, got {:?}",
                weights.shape()
            )));
        }
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::Domain("weight matrix has non-finite entries".into()));
        }
        if !(weight_std > T::zero()) {
            return Err(Error::Domain(format!(
                "weight_std must be positive, got {weight_std}"
            )));
        }
        let weights_t = weights.transpose();
        Ok(Self {
            weights,
            activation,
            weight_std,
            weights_t,
        })
    }

    /// Width `D`.
    pub fn width(&self) -> usize {
        self.weights.nrows()
    }

    /// Input dimension `d`.
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &DMatrix<T> {
        &self.weights
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weight_std(&self) -> T {
        self.weight_std
    }

    /// Row `w_n` of `W` as a contiguous slice.
    pub fn row(&self, n: usize) -> &[T] {
        let d = self.input_dim();
        &self.weights_t.as_slice()[n * d..(n + 1) * d]
    }

    /// Same weights under a different activation.
    pub fn with_activation(&self, activation: Activation) -> Result<Self> {
        Self::from_weights(self.weights.clone(), activation, self.weight_std)
    }

    /// All weights multiplied by `c`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::from_weights(
            &self.weights * c,
            self.activation,
            self.weight_std * c.abs(),
        )
    }

    fn features_into(&self, x: &[T], out: &mut [T]) {
        for (n, o) in out.iter_mut().enumerate() {
            let pre = dot(self.row(n), x);
            *o = self.activation.apply(pre);
        }
    }

    /// `σ(Wx)`.
    pub fn apply(&self, x: &DVector<T>) -> Result<DVector<T>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has length {}, map expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut out = DVector::zeros(self.width());
        self.features_into(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// Row-wise [`apply`](Self::apply) of an `N × d` matrix, giving `N × D`.
    pub fn apply_batch(&self, inputs: &DMatrix<T>) -> Result<DMatrix<T>> {
        if inputs.ncols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input batch has {} columns, map expects {}",
                inputs.ncols(),
                self.input_dim()
            )));
        }
        let width = self.width();
        let rows: Vec<Vec<T>> = (0..inputs.nrows())
            .into_par_iter()
            .map(|i| {
                let x: Vec<T> = inputs.row(i).iter().copied().collect();
                let mut out = vec![T::zero(); width];
                self.features_into(&x, &mut out);
                out
            })
            .collect();
        let flat: Vec<T> = rows.into_iter().flatten().collect();
        Ok(DMatrix::from_row_slice(inputs.nrows(), width, &flat))
    }
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Samples `W` with iid `N(0, weight_std²)` entries, row by row.
pub fn sample_feature_map<T: Real, R: Rng + ?Sized>(
    width: usize,
    input_dim: usize,
    activation: Activation,
    weight_std: T,
    rng: &mut R,
) -> Result<RandomFeatureMap<T>> {
    if width == 0 || input_dim == 0 {
        return Err(Error::Dimension(format!(
            "feature map needs D ≥ 1 and d ≥ 1, got D={width}, d={input_dim}"
        )));
    }
    if !(weight_std > T::zero()) {
        return Err(Error::Domain(format!(
            "weight_std must be positive, got {weight_std}"
        )));
    }
    let weights = gaussian_matrix(width, input_dim, weight_std, rng);
    RandomFeatureMap::from_weights(weights, activation, weight_std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::MeanAccumulator;

    fn identity_map(act: Activation) -> RandomFeatureMap<f64> {
        RandomFeatureMap::from_weights(DMatrix::identity(2, 2), act, 1.0).unwrap()
    }

    #[test]
    fn quadratic_squares_entries() {
        let out = identity_map(Activation::Quadratic)
            .apply(&DVector::from_vec(vec![-3.0, 2.0]))
            .unwrap();
        assert_eq!(out.as_slice(), &[9.0, 4.0]);
    }

    #[test]
    fn relu_clips_negatives() {
        let out = identity_map(Activation::Relu)
            .apply(&DVector::from_vec(vec![-3.0, 2.0]))
            .unwrap();
        assert_eq!(out.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn activation_values() {
        let lr = Activation::LeakyRelu { slope: 0.01 };
        assert_eq!(lr.apply(-2.0f64), -0.02);
        let elu = Activation::Elu { alpha: 1.0 };
        assert!((elu.apply(-1.0f64) - ((-1.0f64).exp() - 1.0)).abs() < 1e-15);
        assert_eq!(elu.apply(3.0f64), 3.0);
        // Φ(1) = 0.841344746068543
        assert!((Activation::Gelu.apply(1.0f64) - 0.841_344_746_068_543).abs() < 1e-12);
        assert_eq!(Activation::Gelu.apply(0.0f64), 0.0);
        assert_eq!(Activation::Identity.apply(-1.5f64), -1.5);
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in [
            "quadratic",
            "relu",
            "leaky_relu:0.01",
            "elu:1",
            "gelu",
            "identity",
        ] {
            let a: Activation = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert_eq!(
            "leaky_relu".parse::<Activation>().unwrap(),
            Activation::LeakyRelu { slope: 0.01 }
        );
        assert!("elu:-1".parse::<Activation>().is_err());
        assert!("relu:2".parse::<Activation>().is_err());
        assert!("tanh".parse::<Activation>().is_err());
    }

    #[test]
    fn apply_checks_length() {
        let m = identity_map(Activation::Quadratic);
        assert!(matches!(
            m.apply(&DVector::from_vec(vec![1.0, 2.0, 3.0])),
            Err(Error::Dimension(_))
        ));
        assert!(m.apply_batch(&DMatrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn small_sample_mean_is_near_zero() {
        let m: RandomFeatureMap<f64> =
            sample_feature_map(4, 4, Activation::Quadratic, 1.0, &mut stream(1, &[])).unwrap();
        let mean = m.weights().mean();
        assert!(mean.abs() < 3.0 * 0.25);
    }

    #[test]
    fn entry_variance_matches_weight_std() {
        let m: RandomFeatureMap<f64> =
            sample_feature_map(10_000, 1, Activation::Relu, 0.1, &mut stream(2, &[])).unwrap();
        let mut sq = MeanAccumulator::new();
        m.weights().iter().for_each(|w| sq.push(w * w));
        assert!(
            (sq.mean() - 0.01).abs() < 3.0 * sq.std_error(),
            "{}",
            sq.mean()
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let a: RandomFeatureMap<f64> =
            sample_feature_map(5, 3, Activation::Gelu, 1.0, &mut stream(3, &[1])).unwrap();
        let b: RandomFeatureMap<f64> =
            sample_feature_map(5, 3, Activation::Gelu, 1.0, &mut stream(3, &[1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = stream(0, &[]);
        assert!(sample_feature_map::<f64, _>(0, 3, Activation::Relu, 1.0, &mut rng).is_err());
        assert!(sample_feature_map::<f64, _>(3, 3, Activation::Relu, 0.0, &mut rng).is_err());
        assert!(sample_feature_map::<f64, _>(
            3,
            3,
            Activation::LeakyRelu { slope: 0.0 },
            1.0,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn batch_agrees_with_row_loop() {
        let mut rng = stream(4, &[]);
        let m: RandomFeatureMap<f64> =
            sample_feature_map(16, 5, Activation::Elu { alpha: 1.0 }, 1.0, &mut rng).unwrap();
        let x = crate::rng::gaussian_matrix::<f64, _>(7, 5, 1.0, &mut rng);
        let batch = m.apply_batch(&x).unwrap();
        for i in 0..7 {
            let row = m.apply(&x.row(i).transpose()).unwrap();
            assert_eq!(batch.row(i).transpose(), row);
        }
        let single = m.apply_batch(&x.rows(0, 1).into_owned()).unwrap();
        assert_eq!(single.row(0), batch.row(0));
    }

    #[test]
    fn zero_batch_maps_to_zero_under_quadratic() {
        let m: RandomFeatureMap<f64> =
            sample_feature_map(6, 3, Activation::Quadratic, 1.0, &mut stream(5, &[])).unwrap();
        let out = m.apply_batch(&DMatrix::zeros(4, 3)).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("basis is not orthonormal (‖UᵀU − I‖_F = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error(
        "activation `{0}` is not supported here; the certificate requires the quadratic activation"
    )]
    UnsupportedActivation(String),

    #[error("exhaustive search over 2^{width} sign vectors refused (maximum width is {max})")]
    TooCostly { width: usize, max: usize },

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("conditioned sampler rejected {rejections} consecutive draws")]
    PathologicalGeometry { rejections: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

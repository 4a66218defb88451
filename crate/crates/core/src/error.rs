//! Error types shared across the toolkit.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid squeezer variance {0} (must be > 0)")]
    InvalidVariance(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not symplectic (max deviation {0:.3e})")]
    NotSymplectic(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("grid under-resolves waist {waist}: max spacing {spacing:.3e} exceeds waist/16")]
    Resolution { waist: f64, spacing: f64 },

    #[error("mean field has vanishing norm")]
    ZeroMeanField,

    #[error("mean-field derivative vanishes: theta does not shift the mean field")]
    ZeroDetectionMode,

    #[error("not enough independent candidates to complete the basis (got {got}, need {need})")]
    BasisDeficient { got: usize, need: usize },

    #[error("theta = {theta} outside model domain [{lo}, {hi}]")]
    Domain { theta: f64, lo: f64, hi: f64 },

    #[error("covariance matrix is not symmetric positive definite: {0}")]
    Covariance(String),

    #[error("photon number {0} must be positive")]
    InvalidPhotonNumber(f64),

    #[error("Fisher information is zero: theta is unidentifiable at first order")]
    NoInformation,

    #[error("state is not pure (purity residual {0:.3e})")]
    Purity(f64),

    #[error("phase-space grid integration supports single-mode states only (got M = {0})")]
    UnsupportedDimension(usize),

    #[error("integration box too small: tail mass estimate {0:.3e} exceeds 1e-8")]
    Coverage(f64),

    #[error("finite-difference step too large: overlap deficit {0:.3e} exceeds 0.01")]
    StepTooLarge(f64),

    #[error("allocation certificates require a passive (orthogonal) network")]
    PassiveRequired,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

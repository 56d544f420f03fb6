//! Gaussian-correlation Kriging: designs, hyperparameters, GLS fits.

mod design;
mod model;

pub use design::{denormalize_point, normalize_point, standardize_outputs, Bound, ExperimentalDesign};
pub use model::{
    build_corr_matrix, concentrated_log_likelihood, corr_matrix, gauss_corr, gls_coefficients, sigma2_hat,
    trend_rank, CorrFactor, KrigingModel, LikelihoodObjective, ModelReport, SIGMA2_FLOOR,
};

use crate::error::{Error, Result};

/// Lower bound on each correlation parameter θ_k.
pub const THETA_MIN: f64 = 1e-3;
/// Upper bound on each correlation parameter θ_k.
pub const THETA_MAX: f64 = 1e3;
/// `log10` search interval for θ.
pub const LOG10_THETA_BOUNDS: (f64, f64) = (-3.0, 3.0);
/// Initial diagonal regularization of the correlation matrix.
pub const NUGGET_START: f64 = 1e-12;
/// Largest nugget tried before a fit is declared ill-conditioned.
pub const NUGGET_MAX: f64 = 1e-6;

/// Per-dimension correlation parameters θ, each in `[THETA_MIN, THETA_MAX]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    theta: Vec<f64>,
}

impl Hyperparameters {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidArgument("θ must have at least one component".into()));
        }
        let tol = 1e-9;
        for &t in &theta {
            if !(t >= THETA_MIN * (1.0 - tol) && t <= THETA_MAX * (1.0 + tol)) {
                return Err(Error::Domain { value: t, lower: THETA_MIN, upper: THETA_MAX });
            }
        }
        Ok(Hyperparameters { theta: theta.into_iter().map(|t| t.clamp(THETA_MIN, THETA_MAX)).collect() })
    }

    /// Same θ in every dimension.
    pub fn isotropic(dim: usize, theta: f64) -> Result<Self> {
        Self::new(vec![theta; dim])
    }

    /// Builds θ from `log10` values (clamped to the search interval).
    pub fn from_log10(log_theta: &[f64]) -> Result<Self> {
        if log_theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite log10 θ".into()));
        }
        let (lo, hi) = LOG10_THETA_BOUNDS;
        Self::new(log_theta.iter().map(|v| 10f64.powf(v.clamp(lo, hi))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn to_log10(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.log10()).collect()
    }
}

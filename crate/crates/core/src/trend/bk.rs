use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kriging::{Hyperparameters, KrigingModel};
use crate::poly::{bk_term, MultiIndex, BK_RANGE_FACTOR};

/// Prior variance scale `τ²/σ²` of the candidate coefficients. Ranking by
/// `|β̂|` is invariant to any common positive value.
pub const TAU2_OVER_SIGMA2: f64 = 1.0;

/// Linear and quadratic prior variance factors per dimension for the
/// Gaussian correlation `r_j(h) = exp(-θ'_j h²)` on the `[1, 3]` scale.
pub fn bk_k_factors(theta: &Hyperparameters) -> (Vec<f64>, Vec<f64>) {
    theta
        .values()
        .iter()
        .map(|&t| {
            let t_enc = t / (BK_RANGE_FACTOR * BK_RANGE_FACTOR);
            k_factors_from_corr((-t_enc).exp(), (-4.0 * t_enc).exp())
        })
        .unzip()
}

/// `(k_l, k_q)` from the correlations at lags 1 and 2.
pub fn k_factors_from_corr(r1: f64, r2: f64) -> (f64, f64) {
    let den = 3.0 + 4.0 * r1 + 2.0 * r2;
    ((3.0 - 3.0 * r2) / den, (3.0 - 4.0 * r1 + r2) / den)
}

/// Diagonal entry of `K` for one candidate term.
pub fn k_diag_entry(idx: &MultiIndex, k_l: &[f64], k_q: &[f64]) -> f64 {
    idx.degrees()
        .iter()
        .enumerate()
        .map(|(j, &d)| match d {
            0 => 1.0,
            1 => k_l[j],
            _ => k_q[j],
        })
        .product()
}

/// Posterior summary of the candidate coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BkPosterior {
    pub beta_hat: Vec<f64>,
    pub k_diag: Vec<f64>,
    /// Diagonal of `var(β̂)` in units of `σ²`.
    pub var_beta: Vec<f64>,
    pub tau2_over_sigma2: f64,
}

impl BkPosterior {
    /// Position of the largest `|β̂|` (earliest on ties), or `None` when every
    /// coefficient vanishes.
    pub fn best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, b) in self.beta_hat.iter().enumerate() {
            let a = b.abs();
            if a > 0.0 && best.is_none_or(|(_, v)| a > v) {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Encoded candidate model matrix `M_c` on the model's design points.
pub fn candidate_matrix(model: &KrigingModel, candidates: &[MultiIndex]) -> Result<DMatrix<f64>> {
    let d = model.design();
    let mut mc = DMatrix::zeros(d.n(), candidates.len());
    for i in 0..d.n() {
        let u = d.point(i);
        for (c, idx) in candidates.iter().enumerate() {
            mc[(i, c)] = bk_term(idx, &u)?;
        }
    }
    Ok(mc)
}

/// `β̂ = (τ²/σ²) K M_cᵀ R⁻¹ (y - Mα)` for the candidates, using the fitted
/// model's θ and residual weights.
pub fn bk_posterior_beta(model: &KrigingModel, candidates: &[MultiIndex]) -> Result<BkPosterior> {
    if let Some(bad) = candidates.iter().find(|c| c.dim() != model.design().dim()) {
        return Err(Error::DimensionMismatch { expected: model.design().dim(), got: bad.dim() });
    }
    let mc = candidate_matrix(model, candidates)?;
    let (k_l, k_q) = bk_k_factors(model.theta());
    let k_diag: Vec<f64> = candidates.iter().map(|c| k_diag_entry(c, &k_l, &k_q)).collect();
    let z: &DVector<f64> = model.weights();
    let proj = mc.tr_mul(z);
    let beta_hat = k_diag.iter().zip(proj.iter()).map(|(k, p)| TAU2_OVER_SIGMA2 * k * p).collect();
    let whitened = model.factor().whiten(&mc);
    let var_beta = k_diag
        .iter()
        .zip(whitened.column_iter())
        .map(|(k, w)| TAU2_OVER_SIGMA2 * (k - TAU2_OVER_SIGMA2 * k * k * w.norm_squared()))
        .collect();
    Ok(BkPosterior { beta_hat, k_diag, var_beta, tau2_over_sigma2: TAU2_OVER_SIGMA2 })
}

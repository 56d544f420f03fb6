use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use super::design::ExperimentalDesign;
use super::{Hyperparameters, NUGGET_MAX, NUGGET_START};
use crate::error::{Error, Result};
use crate::poly::BasisSpec;

/// Gaussian correlation `exp(-Σ θ_k (x1_k - x2_k)²)`.
pub fn gauss_corr(x1: &[f64], x2: &[f64], theta: &Hyperparameters) -> f64 {
    let s: f64 = x1
        .iter()
        .zip(x2)
        .zip(theta.values())
        .map(|((a, b), t)| t * (a - b).powi(2))
        .sum();
    (-s).exp()
}

/// Dense correlation matrix with `nugget` on the diagonal.
pub fn corr_matrix(design: &ExperimentalDesign, theta: &Hyperparameters, nugget: f64) -> DMatrix<f64> {
    let n = design.n();
    let m = design.dim();
    let th = theta.values();
    let diffs = design.sq_diffs();
    let mut r = DMatrix::zeros(n, n);
    let mut pair = 0;
    for i in 0..n {
        r[(i, i)] = 1.0 + nugget;
        for j in (i + 1)..n {
            let d = &diffs[pair * m..(pair + 1) * m];
            let s: f64 = d.iter().zip(th).map(|(a, b)| a * b).sum();
            let v = (-s).exp();
            r[(i, j)] = v;
            r[(j, i)] = v;
            pair += 1;
        }
    }
    r
}

/// Cholesky factor of the regularized correlation matrix.
#[derive(Debug, Clone)]
pub struct CorrFactor {
    chol: Cholesky<f64, Dyn>,
    nugget: f64,
}

impl CorrFactor {
    /// Factorizes an arbitrary symmetric positive-definite matrix as-is.
    pub fn from_matrix(r: DMatrix<f64>) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::DimensionMismatch { expected: r.nrows(), got: r.ncols() });
        }
        try_cholesky(r).map(|chol| CorrFactor { chol, nugget: 0.0 }).ok_or(Error::IllConditioned { nugget: 0.0 })
    }

    /// Nugget actually added to the diagonal.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `ln |R|` from the factor's diagonal.
    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
    }

    fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    fn solve_lower_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    fn solve_upper_t_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l_dirty()
            .tr_solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// Solves `R x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// Whitens columns: returns `L⁻¹ B` for `R = LLᵀ`.
    pub fn whiten(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.solve_lower(b)
    }
}

fn try_cholesky(r: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(r)?;
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.is_finite() && d > 1e-150
    });
    ok.then_some(chol)
}

/// Builds and factorizes `R + nugget·I`, escalating the nugget by ×10 (from
/// at least [`NUGGET_START`]) up to [`NUGGET_MAX`] while factorization fails.
pub fn build_corr_matrix(design: &ExperimentalDesign, theta: &Hyperparameters, nugget: f64) -> Result<CorrFactor> {
    if theta.dim() != design.dim() {
        return Err(Error::DimensionMismatch { expected: design.dim(), got: theta.dim() });
    }
    if !(nugget >= 0.0) {
        return Err(Error::InvalidArgument(format!("nugget must be non-negative, got {nugget}")));
    }
    let mut nug = nugget;
    let base = corr_matrix(design, theta, 0.0);
    loop {
        let mut r = base.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += nug;
        }
        if let Some(chol) = try_cholesky(r) {
            return Ok(CorrFactor { chol, nugget: nug });
        }
        let next = if nug < NUGGET_START { NUGGET_START } else { nug * 10.0 };
        if next > NUGGET_MAX * (1.0 + 1e-9) {
            return Err(Error::IllConditioned { nugget: nug });
        }
        nug = next;
    }
}

/// Generalized least-squares state for one `(design, trend, θ)` triple, in
/// whitened coordinates (`L⁻¹F`, `L⁻¹y`).
#[derive(Debug, Clone)]
struct GlsFit {
    factor: CorrFactor,
    /// Thin `Q` of the QR factorization of `L⁻¹F`.
    q: DMatrix<f64>,
    /// Upper-triangular `R` of the QR factorization of `L⁻¹F`.
    r_f: DMatrix<f64>,
    /// `L⁻¹F`.
    ft: DMatrix<f64>,
    alpha: DVector<f64>,
    /// Whitened residual `L⁻¹(y - Fα)`.
    resid_w: DVector<f64>,
    sigma2: f64,
}

fn gls_fit(factor: CorrFactor, f: &DMatrix<f64>, y: &DVector<f64>) -> Result<GlsFit> {
    let n = f.nrows();
    let p = f.ncols();
    if p > n {
        return Err(Error::SingularTrend { rank: n, columns: p });
    }
    let ft = factor.solve_lower(f);
    let yt = factor.solve_lower_vec(y);
    let qr = ft.clone().qr();
    let r_f = qr.r();
    let q = qr.q();
    let scale = (0..p).map(|i| r_f[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..p {
        if !(r_f[(i, i)].abs() > 1e-12 * scale) {
            return Err(Error::SingularTrend { rank: i, columns: p });
        }
    }
    let qty = q.tr_mul(&yt);
    let alpha = r_f
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularTrend { rank: 0, columns: p })?;
    let resid_w = &yt - &ft * &alpha;
    let sigma2 = resid_w.norm_squared() / n as f64;
    Ok(GlsFit { factor, q, r_f, ft, alpha, resid_w, sigma2 })
}

/// Numerical rank of the trend matrix via column-pivoted QR.
pub fn trend_rank(f: &DMatrix<f64>) -> usize {
    let p = f.ncols().min(f.nrows());
    if p == 0 {
        return 0;
    }
    // Column scaling makes the rank test insensitive to term magnitudes.
    let mut fs = f.clone();
    for mut c in fs.column_iter_mut() {
        let nrm = c.norm();
        if nrm > 0.0 {
            c /= nrm;
        }
    }
    let r = fs.col_piv_qr().r();
    let lead = r[(0, 0)].abs();
    if lead == 0.0 {
        return 0;
    }
    (0..p).filter(|&i| r[(i, i)].abs() > 1e-10 * lead).count()
}

fn check_full_rank(f: &DMatrix<f64>) -> Result<()> {
    let rank = trend_rank(f);
    if rank < f.ncols() {
        return Err(Error::SingularTrend { rank, columns: f.ncols() });
    }
    Ok(())
}

/// GLS trend coefficients `(FᵀR⁻¹F)⁻¹FᵀR⁻¹y` from triangular solves.
pub fn gls_coefficients(f: &DMatrix<f64>, factor: &CorrFactor, y: &DVector<f64>) -> Result<DVector<f64>> {
    check_full_rank(f)?;
    Ok(gls_fit(factor.clone(), f, y)?.alpha)
}

/// Maximum-likelihood process variance `(1/n)(y-Fα)ᵀR⁻¹(y-Fα)`.
pub fn sigma2_hat(f: &DMatrix<f64>, factor: &CorrFactor, y: &DVector<f64>, alpha: &DVector<f64>) -> f64 {
    let resid = y - f * alpha;
    let w = factor.solve_lower_vec(&resid);
    w.norm_squared() / y.len() as f64
}

/// Variance threshold below which the concentrated likelihood is rejected.
pub const SIGMA2_FLOOR: f64 = 1e-30;

/// Concentrated log-likelihood of θ for a fixed design and trend matrix.
///
/// Evaluations are total: failures map to `-∞`.
#[derive(Debug, Clone)]
pub struct LikelihoodObjective<'a> {
    design: &'a ExperimentalDesign,
    f: DMatrix<f64>,
}

impl<'a> LikelihoodObjective<'a> {
    pub fn new(design: &'a ExperimentalDesign, basis: &BasisSpec) -> Result<Self> {
        let f = basis.matrix(design.points())?;
        check_full_rank(&f)?;
        Ok(LikelihoodObjective { design, f })
    }

    pub fn design(&self) -> &ExperimentalDesign {
        self.design
    }

    pub fn dim(&self) -> usize {
        self.design.dim()
    }

    /// `-n ln σ̂²(θ) - ln |R(θ)|`, or `-∞` on failure.
    pub fn eval(&self, theta: &Hyperparameters) -> f64 {
        let Ok(factor) = build_corr_matrix(self.design, theta, NUGGET_START) else {
            return f64::NEG_INFINITY;
        };
        let log_det = factor.log_det();
        let Ok(fit) = gls_fit(factor, &self.f, self.design.responses_std()) else {
            return f64::NEG_INFINITY;
        };
        if !(fit.sigma2 > SIGMA2_FLOOR) {
            return f64::NEG_INFINITY;
        }
        let v = -(self.design.n() as f64) * fit.sigma2.ln() - log_det;
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Same as [`eval`](Self::eval) with θ given as `log10` values.
    pub fn eval_log10(&self, log_theta: &[f64]) -> f64 {
        match Hyperparameters::from_log10(log_theta) {
            Ok(t) => self.eval(&t),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Concentrated log-likelihood `-n ln σ̂² - ln |R|` (`-∞` on failure).
pub fn concentrated_log_likelihood(design: &ExperimentalDesign, basis: &BasisSpec, theta: &Hyperparameters) -> f64 {
    match LikelihoodObjective::new(design, basis) {
        Ok(obj) => obj.eval(theta),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// A fitted universal Kriging surrogate. Immutable once built.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    design: ExperimentalDesign,
    basis: BasisSpec,
    theta: Hyperparameters,
    f: DMatrix<f64>,
    gls: GlsFit,
    /// `R⁻¹(y - Fα)` on standardized responses.
    z: DVector<f64>,
    loocv: Option<f64>,
}

impl KrigingModel {
    /// Fits a model with fixed hyperparameters. A constant-only basis gives
    /// ordinary Kriging.
    pub fn fit(design: &ExperimentalDesign, basis: &BasisSpec, theta: &Hyperparameters) -> Result<Self> {
        if basis.dim() != design.dim() {
            return Err(Error::DimensionMismatch { expected: design.dim(), got: basis.dim() });
        }
        if basis.len() > design.n() {
            return Err(Error::InvalidArgument(format!(
                "trend has {} terms but the design only {} points",
                basis.len(),
                design.n()
            )));
        }
        let f = basis.matrix(design.points())?;
        check_full_rank(&f)?;
        let factor = build_corr_matrix(design, theta, NUGGET_START)?;
        let gls = gls_fit(factor, &f, design.responses_std())?;
        if !(gls.sigma2 > SIGMA2_FLOOR) {
            return Err(Error::Degenerate(format!(
                "zero process variance (σ̂² = {:e}); the trend interpolates the data",
                gls.sigma2
            )));
        }
        let z = gls.factor.solve_upper_t_vec(&gls.resid_w);
        let mut model = KrigingModel {
            design: design.clone(),
            basis: basis.clone(),
            theta: theta.clone(),
            f,
            gls,
            z,
            loocv: None,
        };
        if design.n() >= 3 && basis.len() + 2 <= design.n() {
            model.loocv = Some(model.compute_loocv());
        }
        Ok(model)
    }

    pub fn design(&self) -> &ExperimentalDesign {
        &self.design
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn theta(&self) -> &Hyperparameters {
        &self.theta
    }

    /// GLS trend coefficients (standardized response units).
    pub fn alpha(&self) -> &DVector<f64> {
        &self.gls.alpha
    }

    /// Process variance estimate (standardized response units).
    pub fn sigma2(&self) -> f64 {
        self.gls.sigma2
    }

    pub fn nugget(&self) -> f64 {
        self.gls.factor.nugget
    }

    pub fn factor(&self) -> &CorrFactor {
        &self.gls.factor
    }

    pub fn trend_matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// `R⁻¹(y - Fα)` on standardized responses.
    pub fn weights(&self) -> &DVector<f64> {
        &self.z
    }

    /// Concentrated log-likelihood at the fitted θ.
    pub fn log_likelihood(&self) -> f64 {
        -(self.design.n() as f64) * self.gls.sigma2.ln() - self.gls.factor.log_det()
    }

    fn corr_vector(&self, x: &[f64]) -> DVector<f64> {
        let n = self.design.n();
        let pts = self.design.points();
        let th = self.theta.values();
        let nugget = self.gls.factor.nugget;
        DVector::from_fn(n, |i, _| {
            let mut s = 0.0;
            let mut same = true;
            for (k, &xk) in x.iter().enumerate() {
                let d = pts[(i, k)] - xk;
                same &= d == 0.0;
                s += th[k] * d * d;
            }
            // The nugget is part of the kernel: it applies wherever x is a design point.
            if same {
                1.0 + nugget
            } else {
                (-s).exp()
            }
        })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.design.dim() {
            return Err(Error::DimensionMismatch { expected: self.design.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Standardized prediction and unclamped standardized MSE factor
    /// `1 - rᵀR⁻¹r + uᵀ(FᵀR⁻¹F)⁻¹u` (without σ̂²).
    pub fn predict_std(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_point(x)?;
        let psi = DVector::from_vec(self.basis.eval(x)?);
        let r = self.corr_vector(x);
        let mean = psi.dot(&self.gls.alpha) + r.dot(&self.z);
        let rt = self.gls.factor.solve_lower_vec(&r);
        let u = self.gls.ft.tr_mul(&rt) - &psi;
        let w = self
            .gls
            .r_f
            .tr_solve_upper_triangular(&u)
            .expect("trend factor is non-singular");
        let factor = 1.0 + self.gls.factor.nugget - rt.norm_squared() + w.norm_squared();
        Ok((mean, factor))
    }

    /// Prediction in raw response units.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let (m, _) = self.predict_std(x)?;
        Ok(self.design.mean_y() + self.design.std_y() * m)
    }

    /// Prediction mean-squared error in raw units², clamped at zero.
    pub fn predict_mse(&self, x: &[f64]) -> Result<f64> {
        let (_, f) = self.predict_std(x)?;
        Ok(self.gls.sigma2 * f.max(0.0) * self.design.std_y().powi(2))
    }

    /// Raw prediction and raw MSE in one pass.
    pub fn predict_with_mse(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (m, f) = self.predict_std(x)?;
        let sy = self.design.std_y();
        Ok((self.design.mean_y() + sy * m, self.gls.sigma2 * f.max(0.0) * sy * sy))
    }

    /// Leave-one-out residuals (standardized units) with θ frozen, from
    /// `e_i = (Cy)_i / C_ii`, `C = R⁻¹ - R⁻¹F(FᵀR⁻¹F)⁻¹FᵀR⁻¹`.
    pub fn loo_residuals(&self) -> Result<DVector<f64>> {
        let n = self.design.n();
        if n < 3 || self.basis.len() + 2 > n {
            return Err(Error::Degenerate(format!(
                "leave-one-out needs P <= n - 2 (P = {}, n = {n})",
                self.basis.len()
            )));
        }
        Ok(self.loo_residuals_unchecked())
    }

    fn loo_residuals_unchecked(&self) -> DVector<f64> {
        let n = self.design.n();
        // With L⁻¹F = QR_f: C = L⁻ᵀ(I - QQᵀ)L⁻¹ and Cy = R⁻¹(y - Fα).
        let linv = self.gls.factor.solve_lower(&DMatrix::identity(n, n));
        let qt_linv = self.gls.q.tr_mul(&linv);
        DVector::from_fn(n, |i, _| {
            let c_ii = linv.column(i).norm_squared() - qt_linv.column(i).norm_squared();
            self.z[i] / c_ii
        })
    }

    fn compute_loocv(&self) -> f64 {
        let e = self.loo_residuals_unchecked();
        let n = e.len() as f64;
        (e.norm_squared() / n).sqrt() * self.design.std_y()
    }

    /// Leave-one-out RMSE in raw response units.
    pub fn loocv_rmse(&self) -> Result<f64> {
        self.loocv.ok_or_else(|| {
            Error::Degenerate(format!(
                "leave-one-out needs P <= n - 2 (P = {}, n = {})",
                self.basis.len(),
                self.design.n()
            ))
        })
    }

    /// Debug summary of the fitted state.
    pub fn report(&self) -> ModelReport {
        ModelReport {
            theta: self.theta.values().to_vec(),
            alpha: self.gls.alpha.iter().copied().collect(),
            sigma2: self.gls.sigma2,
            nugget: self.gls.factor.nugget,
            family: format!("{:?}", self.basis.family),
            index_set: self.basis.index_set.indices().iter().map(|i| i.to_string()).collect(),
            loocv_rmse: self.loocv,
            design: (0..self.design.n()).map(|i| self.design.point(i)).collect(),
            responses: self.design.responses_raw().iter().copied().collect(),
        }
    }
}

/// Serializable snapshot of a fitted model, for debugging only.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma2: f64,
    pub nugget: f64,
    pub family: String,
    pub index_set: Vec<String>,
    pub loocv_rmse: Option<f64>,
    pub design: Vec<Vec<f64>>,
    pub responses: Vec<f64>,
}

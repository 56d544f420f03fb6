use std::f64::consts::{PI, SQRT_2};

/// Standard normal CDF, `erfc(-u/√2)/2`.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Expected improvement `E[max(y_min - Y, 0)]` for `Y ~ N(f̂, s²)`, in the
/// error-function form `d·(1 + erf(u/√2))/2 + s·exp(-u²/2)/√(2π)` with
/// `d = y_min - f̂`, `u = d/s`. In the lower tail `1 + erf(v)` is replaced by
/// the equal `erfc(-v)` to avoid cancellation. Returns 0 when `s` is not
/// positive.
pub fn expected_improvement(f_hat: f64, s: f64, y_min: f64) -> f64 {
    if !(s > 0.0) || !f_hat.is_finite() {
        return 0.0;
    }
    let d = y_min - f_hat;
    let u = d / s;
    let v = u / SQRT_2;
    let half_one_plus_erf = if v >= 0.0 { 0.5 * (1.0 + libm::erf(v)) } else { 0.5 * libm::erfc(-v) };
    (d * half_one_plus_erf + s * (-v * v).exp() / (2.0 * PI).sqrt()).max(0.0)
}

/// Expected improvement in the normal CDF/PDF form `d·Φ(u) + s·φ(u)`.
pub fn expected_improvement_normal(f_hat: f64, s: f64, y_min: f64) -> f64 {
    if !(s > 0.0) || !f_hat.is_finite() {
        return 0.0;
    }
    let u = (y_min - f_hat) / s;
    ((y_min - f_hat) * normal_cdf(u) + s * normal_pdf(u)).max(0.0)
}

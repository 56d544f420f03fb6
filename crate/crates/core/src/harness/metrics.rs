//! Performance metrics and boxplot statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::Problem;

/// Relative distance of `best` to a known nonzero `optimum`.
pub fn improvement(best: f64, optimum: f64) -> Result<f64> {
    if optimum == 0.0 || !optimum.is_finite() {
        return Err(Error::InvalidArgument(format!("improvement needs a finite nonzero optimum, got {optimum}")));
    }
    Ok((optimum - best).abs() / optimum.abs())
}

/// `n_v` uniform random points in the problem box (raw coordinates).
pub fn validation_points(problem: Problem, n_v: usize, seed: u64) -> Vec<Vec<f64>> {
    let bounds = problem.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_v)
        .map(|_| bounds.iter().map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo)).collect())
        .collect()
}

/// Root-mean-square error of `predict` against the optimized objective
/// (transformed where the problem transforms) on `n_v` uniform random points.
pub fn validation_rmse<F>(problem: Problem, n_v: usize, seed: u64, predict: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if n_v == 0 {
        return Err(Error::InvalidArgument("validation needs at least one point".into()));
    }
    let mut sse = 0.0;
    for x in validation_points(problem, n_v, seed) {
        sse += (predict(&x)? - problem.objective(&x)?).powi(2);
    }
    Ok((sse / n_v as f64).sqrt())
}

/// Quartiles, whiskers, outliers and mean of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub mean: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Boxplot statistics with whiskers at the most extreme data inside the
/// `1.5·IQR` fences; values beyond the fences are outliers.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("boxplot of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("boxplot sample contains NaN".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&s, 0.25);
    let median = quantile_sorted(&s, 0.5);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = s.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v));
    let whisker_low = inside.clone().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.fold(f64::NEG_INFINITY, f64::max);
    let outliers = s.iter().copied().filter(|v| !(lo_fence..=hi_fence).contains(v)).collect();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    Ok(BoxplotStats { q1, median, q3, whisker_low, whisker_high, outliers, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn improvement_values() {
        assert_eq!(improvement(0.39788, 0.39788).unwrap(), 0.0);
        assert_abs_diff_eq!(improvement(0.45, 0.39788).unwrap(), 0.130994269629034, epsilon = 1e-12);
        assert_abs_diff_eq!(improvement(7.9, 7.8198).unwrap(), 0.010256016777922712, epsilon = 1e-12);
        assert!(improvement(1.0, 0.0).is_err());
    }

    #[test]
    fn boxplot_examples() {
        let b = boxplot_stats(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3, b.mean), (2.0, 3.0, 4.0, 3.0));
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));
        assert!(b.outliers.is_empty());
        let flat = boxplot_stats(&[2.0; 4]).unwrap();
        assert_eq!((flat.q1, flat.q3, flat.whisker_low, flat.whisker_high), (2.0, 2.0, 2.0, 2.0));
        assert!(flat.outliers.is_empty());
        let o = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(o.outliers, vec![100.0]);
        assert_eq!(o.whisker_high, 4.0);
        assert!(boxplot_stats(&[]).is_err());
    }

    #[test]
    fn rmse_of_exact_and_constant_models() {
        let exact = validation_rmse(Problem::Hosaki, 500, 1, |x| Problem::Hosaki.objective(x)).unwrap();
        assert_eq!(exact, 0.0);
        let pts = validation_points(Problem::Hosaki, 500, 1);
        let ys: Vec<f64> = pts.iter().map(|x| Problem::Hosaki.objective(x).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / 500.0;
        let std = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / 500.0).sqrt();
        let rmse = validation_rmse(Problem::Hosaki, 500, 1, |_| Ok(mean)).unwrap();
        assert_abs_diff_eq!(rmse, std, epsilon = 1e-12);
        assert_eq!(rmse, validation_rmse(Problem::Hosaki, 500, 1, |_| Ok(mean)).unwrap());
    }
}

use nalgebra::{DMatrix, DVector};
use crate::error::{Error, Result};

/// Lower and upper bound of one raw input coordinate.
pub type Bound = (f64, f64);

const BOUND_TOL: f64 = 1e-12;

fn check_bounds(bounds: &[Bound]) -> Result<()> {
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("invalid bound [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Affine map of a raw point onto `[-1, 1]^m`.
pub fn normalize_point(x: &[f64], bounds: &[Bound]) -> Result<Vec<f64>> {
    if x.len() != bounds.len() {
        return Err(Error::DimensionMismatch { expected: bounds.len(), got: x.len() });
    }
    check_bounds(bounds)?;
    x.iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| {
            let tol = BOUND_TOL * (hi - lo).max(1.0);
            if v < lo - tol || v > hi + tol || !v.is_finite() {
                return Err(Error::Domain { value: v, lower: lo, upper: hi });
            }
            Ok((2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
        })
        .collect()
}

/// Inverse of [`normalize_point`].
pub fn denormalize_point(u: &[f64], bounds: &[Bound]) -> Result<Vec<f64>> {
    if u.len() != bounds.len() {
        return Err(Error::DimensionMismatch { expected: bounds.len(), got: u.len() });
    }
    check_bounds(bounds)?;
    u.iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| {
            if !(-1.0 - BOUND_TOL..=1.0 + BOUND_TOL).contains(&v) {
                return Err(Error::Domain { value: v, lower: -1.0, upper: 1.0 });
            }
            Ok(lo + (v.clamp(-1.0, 1.0) + 1.0) * 0.5 * (hi - lo))
        })
        .collect()
}

/// Standardizes responses with the population (1/n) standard deviation.
///
/// Returns `(standardized, mean, std)`.
pub fn standardize_outputs(y: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    if y.len() < 2 {
        return Err(Error::InvalidArgument("at least two responses are required".into()));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0) || std <= 1e-300 || std < mean.abs() * 1e-14 {
        return Err(Error::DegenerateResponse);
    }
    Ok((y.iter().map(|v| (v - mean) / std).collect(), mean, std))
}

/// Sampled points (normalized to `[-1, 1]`) and their responses.
#[derive(Debug, Clone)]
pub struct ExperimentalDesign {
    points: DMatrix<f64>,
    bounds: Vec<Bound>,
    responses_raw: DVector<f64>,
    responses_std: DVector<f64>,
    mean_y: f64,
    std_y: f64,
    /// Squared coordinate differences for every pair `i < j`, row-major by
    /// pair then coordinate.
    sq_diffs: Vec<f64>,
}

impl ExperimentalDesign {
    /// Builds a design from raw points, standardizing the responses.
    pub fn from_raw(points: &[Vec<f64>], bounds: &[Bound], responses: &[f64]) -> Result<Self> {
        let m = bounds.len();
        let mut norm = DMatrix::zeros(points.len(), m);
        for (i, p) in points.iter().enumerate() {
            let u = normalize_point(p, bounds)?;
            for (j, v) in u.into_iter().enumerate() {
                norm[(i, j)] = v;
            }
        }
        Self::from_normalized(norm, bounds.to_vec(), responses)
    }

    /// Builds a design from points already in `[-1, 1]^m`.
    pub fn from_normalized(points: DMatrix<f64>, bounds: Vec<Bound>, responses: &[f64]) -> Result<Self> {
        let (_, mean, std) = standardize_outputs(responses)?;
        Self::with_scaling(points, bounds, responses, mean, std)
    }

    /// Builds a design with a caller-supplied output scaling. Skips the
    /// zero-variance guard, so `std` only has to be positive.
    pub fn with_scaling(
        points: DMatrix<f64>,
        bounds: Vec<Bound>,
        responses: &[f64],
        mean: f64,
        std: f64,
    ) -> Result<Self> {
        let (n, m) = points.shape();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("a design needs at least 2 points, got {n}")));
        }
        if bounds.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: bounds.len() });
        }
        if responses.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: responses.len() });
        }
        check_bounds(&bounds)?;
        if !(std > 0.0) {
            return Err(Error::DegenerateResponse);
        }
        if responses.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite response".into()));
        }
        for v in points.iter() {
            if !(-1.0 - BOUND_TOL..=1.0 + BOUND_TOL).contains(v) {
                return Err(Error::Domain { value: *v, lower: -1.0, upper: 1.0 });
            }
        }
        let mut sq_diffs = Vec::with_capacity(n * (n - 1) / 2 * m);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut dist = 0.0;
                for k in 0..m {
                    let d = points[(i, k)] - points[(j, k)];
                    sq_diffs.push(d * d);
                    dist += d * d;
                }
                if dist == 0.0 {
                    return Err(Error::InvalidArgument(format!("design points {i} and {j} coincide")));
                }
            }
        }
        let responses_raw = DVector::from_column_slice(responses);
        let responses_std = responses_raw.map(|v| (v - mean) / std);
        Ok(ExperimentalDesign { points, bounds, responses_raw, responses_std, mean_y: mean, std_y: std, sq_diffs })
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn responses_raw(&self) -> &DVector<f64> {
        &self.responses_raw
    }

    pub fn responses_std(&self) -> &DVector<f64> {
        &self.responses_std
    }

    pub fn mean_y(&self) -> f64 {
        self.mean_y
    }

    pub fn std_y(&self) -> f64 {
        self.std_y
    }

    /// Index and raw value of the lowest response.
    pub fn best(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &v) in self.responses_raw.iter().enumerate() {
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Smallest Euclidean distance (normalized units) from `u` to any design point.
    pub fn min_distance(&self, u: &[f64]) -> f64 {
        (0..self.n())
            .map(|i| {
                self.points
                    .row(i)
                    .iter()
                    .zip(u)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn sq_diffs(&self) -> &[f64] {
        &self.sq_diffs
    }

    /// Design with one extra point appended (normalized coordinates).
    pub fn with_point(&self, u: &[f64], y_raw: f64) -> Result<Self> {
        let (n, m) = self.points.shape();
        if u.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: u.len() });
        }
        let mut pts = self.points.clone().insert_row(n, 0.0);
        for (j, v) in u.iter().enumerate() {
            pts[(n, j)] = *v;
        }
        let mut y: Vec<f64> = self.responses_raw.iter().copied().collect();
        y.push(y_raw);
        Self::from_normalized(pts, self.bounds.clone(), &y)
    }

    /// Design without point `i`, keeping the output scaling frozen.
    pub fn without_point(&self, i: usize) -> Result<Self> {
        let pts = self.points.clone().remove_row(i);
        let y: Vec<f64> = self
            .responses_raw
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, v)| *v)
            .collect();
        Self::with_scaling(pts, self.bounds.clone(), &y, self.mean_y, self.std_y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization_examples() {
        let b = [(0.0, 4.0)];
        assert_eq!(normalize_point(&[2.0], &b).unwrap(), vec![0.0]);
        assert_eq!(normalize_point(&[0.0], &b).unwrap(), vec![-1.0]);
        let rw = [(0.05, 0.15)];
        assert_abs_diff_eq!(normalize_point(&[0.10], &rw).unwrap()[0], 0.0, epsilon = 1e-12);
        assert!(normalize_point(&[4.5], &b).is_err());
        assert!(normalize_point(&[1.0, 2.0], &b).is_err());
    }

    #[test]
    fn standardize_examples() {
        let (s, mu, sd) = standardize_outputs(&[0.0, 2.0]).unwrap();
        assert_eq!((s, mu, sd), (vec![-1.0, 1.0], 1.0, 1.0));
        assert!(matches!(standardize_outputs(&[3.0, 3.0, 3.0]), Err(Error::DegenerateResponse)));
        let (s, _, _) = standardize_outputs(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(s[0], -(1.5f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[2], 1.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn design_rejects_duplicates_and_tiny_sets() {
        let b = vec![(0.0, 1.0)];
        let pts = DMatrix::from_row_slice(2, 1, &[0.1, 0.1]);
        assert!(ExperimentalDesign::from_normalized(pts, b.clone(), &[1.0, 2.0]).is_err());
        let pts = DMatrix::from_row_slice(1, 1, &[0.1]);
        assert!(ExperimentalDesign::from_normalized(pts, b, &[1.0]).is_err());
    }

    #[test]
    fn with_and_without_point() {
        let b = vec![(0.0, 1.0)];
        let pts = DMatrix::from_row_slice(3, 1, &[-1.0, 0.0, 1.0]);
        let d = ExperimentalDesign::from_normalized(pts, b, &[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(d.best(), (1, 0.0));
        let d2 = d.with_point(&[0.5], -1.0).unwrap();
        assert_eq!(d2.n(), 4);
        assert_eq!(d2.best(), (3, -1.0));
        let d3 = d.without_point(0).unwrap();
        assert_eq!(d3.n(), 2);
        assert_eq!(d3.std_y(), d.std_y());
        assert_abs_diff_eq!(d.min_distance(&[0.25]), 0.25);
    }
}

use nalgebra::{DMatrix, DVector};

/// Settings of the bound-constrained quasi-Newton ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsConfig {
    /// Finite-difference step for the gradient.
    pub fd_step: f64,
    /// Projected-gradient norm below which the search stops.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Largest trial step (infinity norm) per iteration.
    pub max_step: f64,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        BfgsConfig { fd_step: 1e-4, grad_tol: 1e-6, max_iter: 200, max_step: 2.0 }
    }
}

/// Outcome of a BFGS run.
#[derive(Debug, Clone, PartialEq)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Counted<'a, F> {
    f: &'a F,
    calls: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.calls += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Central differences, falling back to one-sided differences at bounds or
/// next to `-∞` regions.
fn gradient<F: Fn(&[f64]) -> f64>(
    obj: &mut Counted<'_, F>,
    x: &[f64],
    fx: f64,
    bounds: &[(f64, f64)],
    h: f64,
) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        let (lo, hi) = bounds[k];
        let up = (x[k] + h <= hi).then(|| {
            probe[k] = x[k] + h;
            obj.eval(&probe)
        });
        let down = (x[k] - h >= lo).then(|| {
            probe[k] = x[k] - h;
            obj.eval(&probe)
        });
        probe[k] = x[k];
        let finite = |v: Option<f64>| v.filter(|v| v.is_finite());
        g[k] = match (finite(up), finite(down)) {
            (Some(a), Some(b)) => (a - b) / (2.0 * h),
            (Some(a), None) => (a - fx) / h,
            (None, Some(b)) => (fx - b) / h,
            (None, None) => 0.0,
        };
    }
    g
}

/// Zeroes gradient components that push against an active bound.
fn projected(g: &DVector<f64>, x: &[f64], bounds: &[(f64, f64)]) -> DVector<f64> {
    DVector::from_fn(g.len(), |k, _| {
        let (lo, hi) = bounds[k];
        let eps = 1e-12 * (hi - lo).max(1.0);
        if (x[k] <= lo + eps && g[k] < 0.0) || (x[k] >= hi - eps && g[k] > 0.0) {
            0.0
        } else {
            g[k]
        }
    })
}

/// Maximizes `objective` from `start` inside the box `bounds` with projected
/// BFGS and an Armijo backtracking line search.
///
/// The returned value is never below the value at `start` (projected into the
/// box), and trial points with a `-∞` objective are never accepted.
pub fn bfgs_maximize<F>(objective: &F, start: &[f64], bounds: &[(f64, f64)], config: &BfgsConfig) -> BfgsResult
where
    F: Fn(&[f64]) -> f64,
{
    let m = start.len();
    let mut obj = Counted { f: objective, calls: 0 };
    let mut x = start.to_vec();
    project(&mut x, bounds);
    let mut fx = obj.eval(&x);
    if !fx.is_finite() || m == 0 {
        return BfgsResult { x, value: fx, iterations: 0, evaluations: obj.calls };
    }
    let mut g = gradient(&mut obj, &x, fx, bounds, config.fd_step);
    let mut h_inv = DMatrix::<f64>::identity(m, m);
    let mut iterations = 0;
    let mut flat_steps = 0;

    while iterations < config.max_iter {
        let pg = projected(&g, &x, bounds);
        if pg.norm() < config.grad_tol {
            break;
        }
        iterations += 1;
        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                if h_inv == DMatrix::identity(m, m) {
                    break;
                }
                h_inv = DMatrix::identity(m, m);
            }
            let mut d = &h_inv * &pg;
            let active = pg.iter().zip(g.iter()).map(|(p, q)| *p == 0.0 && *q != 0.0);
            for (dk, is_active) in d.iter_mut().zip(active) {
                if is_active {
                    *dk = 0.0;
                }
            }
            if d.dot(&pg) <= 0.0 {
                d = pg.clone();
            }
            let dmax = d.amax();
            if dmax > config.max_step {
                d *= config.max_step / dmax;
            }
            let mut t = 1.0;
            for _ in 0..40 {
                let mut trial: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                project(&mut trial, bounds);
                let step: f64 = trial.iter().zip(&x).zip(pg.iter()).map(|((a, b), gk)| (a - b) * gk).sum();
                if step <= 0.0 {
                    break;
                }
                let ft = obj.eval(&trial);
                if ft.is_finite() && ft >= fx + 1e-4 * step {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((x_new, f_new)) = accepted else { break };
        let g_new = gradient(&mut obj, &x_new, f_new, bounds, config.fd_step);
        let s = DVector::from_iterator(m, x_new.iter().zip(&x).map(|(a, b)| a - b));
        // Curvature pair of the minimization problem -f.
        let y = &g - &g_new;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(m, m);
            let a = &i - rho * &s * y.transpose();
            h_inv = &a * &h_inv * a.transpose() + rho * &s * s.transpose();
        }
        let gain = f_new - fx;
        x = x_new;
        fx = f_new;
        g = g_new;
        if gain <= 1e-13 * (1.0 + fx.abs()) {
            flat_steps += 1;
            if flat_steps >= 3 {
                break;
            }
        } else {
            flat_steps = 0;
        }
    }
    BfgsResult { x, value: fx, iterations, evaluations: obj.calls }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_quadratic() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 3.0 * (x[1] + 0.5).powi(2) - (x[0] - 1.0) * (x[1] + 0.5);
        let r = bfgs_maximize(&f, &[-2.0, 2.0], &[(-3.0, 3.0); 2], &BfgsConfig::default());
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 0.5).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn fixed_point_at_optimum() {
        let f = |x: &[f64]| -(x[0] - 0.25).powi(2);
        let r = bfgs_maximize(&f, &[0.25], &[(-3.0, 3.0)], &BfgsConfig::default());
        assert_eq!(r.x, vec![0.25]);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn respects_bounds_and_ascends() {
        let f = |x: &[f64]| x[0] + x[1];
        let r = bfgs_maximize(&f, &[0.0, 0.0], &[(-3.0, 3.0); 2], &BfgsConfig::default());
        assert_eq!(r.x, vec![3.0, 3.0]);
    }

    #[test]
    fn never_enters_sentinel_region() {
        // Optimum of the smooth part lies inside the forbidden region x > 1.
        let f = |x: &[f64]| if x[0] > 1.0 { f64::NEG_INFINITY } else { -(x[0] - 2.0).powi(2) };
        let r = bfgs_maximize(&f, &[-2.0], &[(-3.0, 3.0)], &BfgsConfig::default());
        assert!(r.value.is_finite());
        assert!(r.x[0] <= 1.0 && r.x[0] > 0.9, "{:?}", r.x);
    }
}

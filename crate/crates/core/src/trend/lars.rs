use nalgebra::{DMatrix, DVector};

/// Result of a LARS path: predictor columns in entry order.
#[derive(Debug, Clone, PartialEq)]
pub struct LarsPath {
    /// Column indices of the original dictionary, in order of entry.
    pub order: Vec<usize>,
    /// Columns dropped up front because they are constant over the design.
    pub dropped: Vec<usize>,
}

/// Centers each column and scales it to unit Euclidean norm; columns with no
/// variation over the rows are returned separately.
pub fn standardize_columns(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>, Vec<usize>) {
    let n = x.nrows();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut cols = Vec::new();
    for (j, c) in x.column_iter().enumerate() {
        let mean = c.sum() / n as f64;
        let centered = c.map(|v| v - mean);
        let nrm = centered.norm();
        let scale = c.amax().max(1.0);
        if nrm <= 1e-10 * scale * (n as f64).sqrt() {
            dropped.push(j);
        } else {
            cols.push(centered / nrm);
            kept.push(j);
        }
    }
    let z = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
    (z, kept, dropped)
}

/// Classic least-angle regression ordering of the columns of `x` against `y`.
///
/// Columns are centered and unit-norm standardized first, `y` is centered.
/// The path stops after `min(P, n - 1)` entries or when the residual is
/// uncorrelated with every remaining predictor. Ties go to the lowest index.
pub fn lars_select(x: &DMatrix<f64>, y: &DVector<f64>) -> LarsPath {
    let n = x.nrows();
    let (z, kept, dropped) = standardize_columns(x);
    let p = z.ncols();
    let mut order = Vec::new();
    if p == 0 || n < 2 {
        return LarsPath { order, dropped };
    }
    let ymean = y.sum() / n as f64;
    let yc = y.map(|v| v - ymean);
    let tol = 1e-12 * yc.norm().max(f64::MIN_POSITIVE);
    let max_steps = p.min(n - 1);
    let mut mu = DVector::zeros(n);
    let mut active: Vec<usize> = Vec::new();
    let mut excluded = vec![false; p];

    let mut corr = z.tr_mul(&yc);
    let first = (0..p).fold(None::<usize>, |b, j| match b {
        Some(k) if corr[k].abs() >= corr[j].abs() => Some(k),
        _ => Some(j),
    });
    let first = first.expect("non-empty dictionary");
    if corr[first].abs() <= tol {
        return LarsPath { order, dropped };
    }
    active.push(first);

    while !active.is_empty() {
        corr = z.tr_mul(&(&yc - &mu));
        let c_max = active.iter().map(|&j| corr[j].abs()).fold(0.0, f64::max);
        if c_max <= tol {
            active.pop();
            break;
        }
        let signs: Vec<f64> = active.iter().map(|&j| corr[j].signum()).collect();
        let xa = DMatrix::from_fn(n, active.len(), |i, k| signs[k] * z[(i, active[k])]);
        let gram = xa.tr_mul(&xa);
        let Some(chol) = gram.cholesky() else {
            // The newest predictor is collinear with the active set.
            let j = active.pop().expect("non-empty");
            excluded[j] = true;
            if let Some(next) = next_entry(&corr, &active, &excluded, c_max, tol) {
                active.push(next);
                continue;
            }
            break;
        };
        let ones = DVector::from_element(active.len(), 1.0);
        let g1 = chol.solve(&ones);
        let a_a = 1.0 / ones.dot(&g1).sqrt();
        let w = g1 * a_a;
        let u = &xa * &w;
        let a = z.tr_mul(&u);
        if active.len() >= max_steps {
            break;
        }
        let mut gamma = c_max / a_a;
        let mut entrant = None;
        for j in 0..p {
            if active.contains(&j) || excluded[j] {
                continue;
            }
            for cand in [(c_max - corr[j]) / (a_a - a[j]), (c_max + corr[j]) / (a_a + a[j])] {
                if cand > 1e-14 * gamma.max(1.0) && cand < gamma {
                    gamma = cand;
                    entrant = Some(j);
                }
            }
        }
        mu += &u * gamma;
        match entrant {
            Some(j) => active.push(j),
            None => break,
        }
    }
    order.extend(active.iter().map(|&j| kept[j]));
    LarsPath { order, dropped }
}

/// Most-correlated admissible predictor to replace a rejected entrant.
fn next_entry(corr: &DVector<f64>, active: &[usize], excluded: &[bool], c_max: f64, tol: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for j in 0..corr.len() {
        if active.contains(&j) || excluded[j] {
            continue;
        }
        if best.is_none_or(|b| corr[j].abs() > corr[b].abs()) {
            best = Some(j);
        }
    }
    best.filter(|&j| corr[j].abs() > tol && corr[j].abs() <= c_max * (1.0 + 1e-9) + tol)
}

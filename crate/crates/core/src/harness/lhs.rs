//! Latin hypercube sampling.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kriging::Bound;

/// `n` points in `[0, 1)^m`: every column visits each stratum
/// `[i/n, (i+1)/n)` exactly once, with uniform jitter inside the stratum.
pub fn lhs_sample(n: usize, m: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("LHS needs n >= 1 and m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, m);
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..m {
        perm.shuffle(&mut rng);
        for (i, &stratum) in perm.iter().enumerate() {
            let v = (stratum as f64 + rng.random::<f64>()) / n as f64;
            // Guard against rounding onto the upper stratum edge.
            out[(i, j)] = v.min(((stratum + 1) as f64 / n as f64).next_down());
        }
    }
    Ok(out)
}

/// Maps unit-cube rows onto a box.
pub fn scale_to_bounds(unit: &DMatrix<f64>, bounds: &[Bound]) -> Vec<Vec<f64>> {
    unit.row_iter()
        .map(|r| r.iter().zip(bounds).map(|(&t, &(lo, hi))| lo + t * (hi - lo)).collect())
        .collect()
}

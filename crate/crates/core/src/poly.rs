//! One-dimensional polynomial families, multi-index sets and multivariate
//! trend bases.
//!
//! Multi-index sets are always ordered graded-lexicographically: by total
//! degree first, then with the first coordinate varying slowest and highest
//! powers first, so `(1,0)` precedes `(0,1)`. Trend selection relies on this
//! order for reproducible tie-breaking.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the `[-1, 1]` Legendre domain to absorb affine round-off.
const DOMAIN_SLACK: f64 = 1e-12;

/// Legendre polynomial `P_order(x)` normalized so that `P_order(1) = 1`.
pub fn legendre(order: usize, x: f64) -> Result<f64> {
    if !(-1.0 - DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::Domain { value: x, lower: -1.0, upper: 1.0 });
    }
    Ok(legendre_unchecked(order, x))
}

fn legendre_unchecked(order: usize, x: f64) -> f64 {
    let x2 = x * x;
    match order {
        0 => 1.0,
        1 => x,
        2 => 0.5 * (3.0 * x2 - 1.0),
        3 => 0.5 * (5.0 * x2 - 3.0) * x,
        4 => (35.0 * x2 * x2 - 30.0 * x2 + 3.0) / 8.0,
        5 => (63.0 * x2 * x2 - 70.0 * x2 + 15.0) * x / 8.0,
        _ => {
            // Bonnet: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
            let mut prev = legendre_unchecked(4, x);
            let mut cur = legendre_unchecked(5, x);
            for k in 5..order {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Monic polynomial `x^order`.
pub fn monic(order: usize, x: f64) -> f64 {
    x.powi(order as i32)
}

/// Polynomial family used for the one-dimensional factors of a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Monic,
    Legendre,
}

impl Family {
    /// Values of the family's polynomials of order `0..=max_order` at `x`.
    fn values_into(self, max_order: usize, x: f64, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Family::Monic => {
                let mut v = 1.0;
                for _ in 0..=max_order {
                    out.push(v);
                    v *= x;
                }
            }
            Family::Legendre => {
                out.push(1.0);
                if max_order >= 1 {
                    out.push(x);
                }
                for k in 1..max_order {
                    let kf = k as f64;
                    let next = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
                    out.push(next);
                }
            }
        }
    }
}

/// Degree tuple `(ζ_1, …, ζ_m)` of a multivariate polynomial term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// Index with a single non-zero degree.
    pub fn unit(m: usize, dim: usize, degree: u32) -> Self {
        let mut v = vec![0; m];
        v[dim] = degree;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    /// Number of factors with non-zero degree.
    pub fn interaction_order(&self) -> usize {
        self.0.iter().filter(|&&d| d > 0).count()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    /// Graded-lexicographic comparison used for every ordered index set.
    pub fn graded_cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Truncation scheme defining a candidate multi-index set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// Every `ζ` with `ζ_j ≤ p`.
    TensorProduct,
    /// Every `ζ` with `Σ ζ_j ≤ p`.
    TotalOrder,
    /// Every `ζ` with `(Σ ζ_j^ν)^(1/ν) ≤ p`, `ν ∈ (0, 1]`.
    Hyperbolic(f64),
    /// Linear and quadratic main effects plus products of two distinct
    /// factors at linear/quadratic levels.
    TwoFactor,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::TensorProduct => write!(f, "tensor"),
            Scheme::TotalOrder => write!(f, "total-order"),
            Scheme::Hyperbolic(nu) => write!(f, "hyperbolic({nu})"),
            Scheme::TwoFactor => write!(f, "two-factor"),
        }
    }
}

/// Ordered set of multi-indices; the constant term is always first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    indices: Vec<MultiIndex>,
    dim: usize,
}

impl MultiIndexSet {
    /// Builds a set from arbitrary indices: adds the constant term if missing,
    /// removes duplicates and sorts graded-lexicographically.
    pub fn from_indices(dim: usize, indices: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let mut v: Vec<MultiIndex> = Vec::new();
        for idx in indices {
            if idx.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: idx.dim() });
            }
            v.push(idx);
        }
        v.push(MultiIndex::zeros(dim));
        v.sort_by(|a, b| a.graded_cmp(b));
        v.dedup();
        Ok(MultiIndexSet { indices: v, dim })
    }

    /// Builds a set whose order is given explicitly (constant first, then the
    /// supplied terms in their given order). Used for selected trends.
    pub fn from_ordered_terms(dim: usize, terms: &[MultiIndex]) -> Result<Self> {
        let mut v = vec![MultiIndex::zeros(dim)];
        for t in terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: t.dim() });
            }
            if t.is_constant() || v.contains(t) {
                return Err(Error::InvalidArgument(format!("duplicate trend term {t}")));
            }
            v.push(t.clone());
        }
        Ok(MultiIndexSet { indices: v, dim })
    }

    pub fn constant(dim: usize) -> Self {
        MultiIndexSet { indices: vec![MultiIndex::zeros(dim)], dim }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Non-constant terms in set order.
    pub fn non_constant(&self) -> &[MultiIndex] {
        &self.indices[1..]
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        self.indices.contains(idx)
    }

    pub fn max_degree(&self) -> u32 {
        self.indices.iter().map(|i| i.max_degree()).max().unwrap_or(0)
    }
}

/// Generates the index set of `scheme` with maximum order `p` in `m` dimensions.
pub fn generate_index_set(m: usize, p: u32, scheme: Scheme) -> Result<MultiIndexSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let indices: Vec<MultiIndex> = match scheme {
        Scheme::TensorProduct => tensor_indices(m, p).collect(),
        Scheme::TotalOrder => tensor_indices(m, p).filter(|z| z.total_degree() <= p).collect(),
        Scheme::Hyperbolic(nu) => {
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(Error::InvalidArgument(format!("hyperbolic ν = {nu} outside (0, 1]")));
            }
            let bound = p as f64 + 1e-9;
            tensor_indices(m, p)
                .filter(|z| {
                    let s: f64 = z.0.iter().map(|&d| (d as f64).powf(nu)).sum();
                    s.powf(1.0 / nu) <= bound
                })
                .collect()
        }
        Scheme::TwoFactor => {
            if p < 2 {
                return Err(Error::InvalidArgument(format!(
                    "two-factor scheme needs p >= 2, got {p}"
                )));
            }
            let mut v = vec![MultiIndex::zeros(m)];
            for j in 0..m {
                for a in 1..=2 {
                    v.push(MultiIndex::unit(m, j, a));
                }
            }
            for i in 0..m {
                for j in (i + 1)..m {
                    for a in 1..=2 {
                        for b in 1..=2 {
                            let mut z = vec![0; m];
                            z[i] = a;
                            z[j] = b;
                            v.push(MultiIndex(z));
                        }
                    }
                }
            }
            v
        }
    };
    MultiIndexSet::from_indices(m, indices)
}

fn tensor_indices(m: usize, p: u32) -> impl Iterator<Item = MultiIndex> {
    let total = (p as usize + 1).pow(m as u32);
    (0..total).map(move |mut k| {
        let mut z = vec![0u32; m];
        for d in z.iter_mut().rev() {
            *d = (k % (p as usize + 1)) as u32;
            k /= p as usize + 1;
        }
        MultiIndex(z)
    })
}

/// A trend basis: a polynomial family together with an ordered index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: Family,
    pub index_set: MultiIndexSet,
}

impl BasisSpec {
    pub fn new(family: Family, index_set: MultiIndexSet) -> Self {
        BasisSpec { family, index_set }
    }

    /// Constant-only basis, i.e. ordinary Kriging.
    pub fn constant(dim: usize) -> Self {
        BasisSpec { family: Family::Legendre, index_set: MultiIndexSet::constant(dim) }
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    /// Evaluates every basis term at `x`, in index-set order.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.dim();
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: x.len() });
        }
        if self.family == Family::Legendre {
            for &xi in x {
                if !(-1.0 - DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&xi) {
                    return Err(Error::Domain { value: xi, lower: -1.0, upper: 1.0 });
                }
            }
        }
        let max_order = self.index_set.max_degree() as usize;
        let mut table = Vec::with_capacity(m * (max_order + 1));
        let mut scratch = Vec::with_capacity(max_order + 1);
        for &xi in x {
            self.family.values_into(max_order, xi, &mut scratch);
            table.extend_from_slice(&scratch);
        }
        for (o, idx) in out.iter_mut().zip(self.index_set.indices()) {
            *o = idx
                .0
                .iter()
                .enumerate()
                .map(|(j, &d)| table[j * (max_order + 1) + d as usize])
                .product();
        }
        Ok(())
    }

    /// Trend matrix `F` (one row per point).
    pub fn matrix(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = points.nrows();
        let mut f = DMatrix::zeros(n, self.len());
        let mut row = vec![0.0; self.len()];
        let mut x = vec![0.0; points.ncols()];
        for i in 0..n {
            for (j, v) in x.iter_mut().enumerate() {
                *v = points[(i, j)];
            }
            self.eval_into(&x, &mut row)?;
            for (k, v) in row.iter().enumerate() {
                f[(i, k)] = *v;
            }
        }
        Ok(f)
    }
}

/// Linear and quadratic contrast encoding of a coordinate scaled to `[1, 3]`.
pub fn bk_encode_coord(x: f64) -> Result<(f64, f64)> {
    if !(1.0 - DOMAIN_SLACK..=3.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::Domain { value: x, lower: 1.0, upper: 3.0 });
    }
    let c = x - 2.0;
    let lin = (3.0f64).sqrt() / (2.0f64).sqrt() * c;
    let quad = (3.0 * c * c - 2.0) / (2.0f64).sqrt();
    Ok((lin, quad))
}

/// Encodes a point of `[1, 3]^m` into its linear and quadratic contrasts.
pub fn bk_encode(x_scaled: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lin = Vec::with_capacity(x_scaled.len());
    let mut quad = Vec::with_capacity(x_scaled.len());
    for &x in x_scaled {
        let (l, q) = bk_encode_coord(x)?;
        lin.push(l);
        quad.push(q);
    }
    Ok((lin, quad))
}

/// Maps a `[-1, 1]`-normalized coordinate onto the `[1, 3]` encoding range.
pub fn to_bk_range(u: f64) -> f64 {
    u + 2.0
}

/// Ratio between the `[1, 3]` encoding width and the `[-1, 1]` design width.
pub const BK_RANGE_FACTOR: f64 = 2.0 / 2.0;

/// Encoded candidate column value for one index at a normalized point.
/// Entries of the index must be 0, 1 or 2.
pub fn bk_term(idx: &MultiIndex, u: &[f64]) -> Result<f64> {
    let mut v = 1.0;
    for (&d, &uj) in idx.0.iter().zip(u) {
        match d {
            0 => {}
            1 | 2 => {
                let (l, q) = bk_encode_coord(to_bk_range(uj))?;
                v *= if d == 1 { l } else { q };
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "encoded candidates support degrees up to 2, got {idx}"
                )))
            }
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_table_values() {
        assert_eq!(legendre(2, 1.0).unwrap(), 1.0);
        assert_eq!(legendre(0, -0.37).unwrap(), 1.0);
        assert_abs_diff_eq!(legendre(4, 0.0).unwrap(), 0.375, epsilon = 1e-15);
        for p in 0..12 {
            assert_abs_diff_eq!(legendre(p, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn legendre_recurrence_matches_closed_forms() {
        // P6(x) = (231x^6 - 315x^4 + 105x^2 - 5)/16
        for &x in &[-0.9, -0.3, 0.0, 0.41, 0.77] {
            let x2: f64 = x * x;
            let p6 = (231.0 * x2.powi(3) - 315.0 * x2 * x2 + 105.0 * x2 - 5.0) / 16.0;
            assert_abs_diff_eq!(legendre(6, x).unwrap(), p6, epsilon = 1e-13);
            let mut table = Vec::new();
            Family::Legendre.values_into(7, x, &mut table);
            for (p, v) in table.iter().enumerate() {
                assert_abs_diff_eq!(*v, legendre(p, x).unwrap(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn legendre_rejects_outside_domain() {
        assert!(matches!(legendre(2, 1.5), Err(Error::Domain { .. })));
        assert!(legendre(2, -1.0 - 1e-6).is_err());
    }

    #[test]
    fn monic_powers() {
        assert_eq!(monic(3, 2.0), 8.0);
        assert_eq!(monic(0, 5.0), 1.0);
        assert_eq!(monic(1, -0.5), -0.5);
    }

    #[test]
    fn total_order_small_set() {
        let set = generate_index_set(2, 1, Scheme::TotalOrder).unwrap();
        let expect = vec![MultiIndex(vec![0, 0]), MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1])];
        assert_eq!(set.indices(), expect.as_slice());
    }

    #[test]
    fn tensor_and_two_factor_cardinality() {
        assert_eq!(generate_index_set(2, 4, Scheme::TensorProduct).unwrap().len(), 25);
        assert_eq!(generate_index_set(3, 2, Scheme::TwoFactor).unwrap().len() - 1, 18);
    }

    #[test]
    fn scheme_argument_errors() {
        assert!(generate_index_set(2, 2, Scheme::Hyperbolic(0.0)).is_err());
        assert!(generate_index_set(2, 2, Scheme::Hyperbolic(1.5)).is_err());
        assert!(generate_index_set(2, 1, Scheme::TwoFactor).is_err());
        assert!(generate_index_set(0, 1, Scheme::TotalOrder).is_err());
    }

    #[test]
    fn hyperbolic_with_unit_nu_is_total_order() {
        let a = generate_index_set(3, 3, Scheme::Hyperbolic(1.0)).unwrap();
        let b = generate_index_set(3, 3, Scheme::TotalOrder).unwrap();
        assert_eq!(a, b);
        let c = generate_index_set(3, 3, Scheme::Hyperbolic(0.5)).unwrap();
        assert!(c.len() < b.len());
        assert!(c.indices().iter().all(|i| b.contains(i)));
    }

    #[test]
    fn eval_basis_examples() {
        let set = generate_index_set(2, 1, Scheme::TotalOrder).unwrap();
        let spec = BasisSpec::new(Family::Legendre, set);
        assert_eq!(spec.eval(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(BasisSpec::constant(3).eval(&[0.2, -0.4, 0.9]).unwrap(), vec![1.0]);

        let set = MultiIndexSet::from_ordered_terms(2, &[MultiIndex(vec![2, 1])]).unwrap();
        let spec = BasisSpec::new(Family::Monic, set);
        assert_eq!(spec.eval(&[0.5, -1.0]).unwrap(), vec![1.0, -0.25]);
        assert!(matches!(spec.eval(&[0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bk_encoding_values() {
        let (l, q) = bk_encode_coord(2.0).unwrap();
        assert_abs_diff_eq!(l, 0.0);
        assert_abs_diff_eq!(q, -(2.0f64).sqrt(), epsilon = 1e-15);
        let (l, q) = bk_encode_coord(3.0).unwrap();
        assert_abs_diff_eq!(l, 1.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(q, 1.0 / 2.0f64.sqrt(), epsilon = 1e-15);
        let (l, q) = bk_encode_coord(1.0).unwrap();
        assert_abs_diff_eq!(l, -(1.5f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(q, 1.0 / 2.0f64.sqrt(), epsilon = 1e-15);
        assert!(bk_encode_coord(0.5).is_err());
        assert!(bk_encode(&[1.0, 3.5]).is_err());
    }

    #[test]
    fn ordered_terms_reject_duplicates() {
        let t = MultiIndex(vec![1, 0]);
        assert!(MultiIndexSet::from_ordered_terms(2, &[t.clone(), t]).is_err());
        assert!(MultiIndexSet::from_ordered_terms(2, &[MultiIndex(vec![0, 0])]).is_err());
    }
}

//! Synthetic benchmark problems and their published settings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kriging::Bound;
use crate::poly::Scheme;

/// Hartman-6 weights.
pub const HARTMAN_C: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

/// Hartman-6 exponent scales.
pub const HARTMAN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];

/// Hartman-6 centers, in units of 1e-4.
pub const HARTMAN_P: [[f64; 6]; 4] = [
    [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
    [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
    [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
    [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
];

/// Borehole input ranges, in the order `r_w, r, T_u, H_u, T_l, H_l, L, K_w`.
pub const BOREHOLE_BOUNDS: [Bound; 8] = [
    (0.05, 0.15),
    (100.0, 50_000.0),
    (63_700.0, 115_600.0),
    (990.0, 1100.0),
    (63.1, 116.0),
    (700.0, 820.0),
    (1120.0, 1680.0),
    (9855.0, 12_045.0),
];

/// Branin function on `[0, 1]²`.
pub fn branin(x: &[f64]) -> f64 {
    let b1 = 15.0 * x[0] - 5.0;
    let b2 = 15.0 * x[1];
    let a = b2 - 5.1 / (4.0 * PI * PI) * b1 * b1 + 5.0 / PI * b1 - 6.0;
    a * a + 10.0 * ((1.0 - 1.0 / (8.0 * PI)) * b1.cos() + 1.0)
}

/// Sasena function on `[0, 5]²`.
pub fn sasena(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    2.0 + 0.01 * (x2 - x1 * x1).powi(2)
        + (1.0 - x1).powi(2)
        + 2.0 * (2.0 - x2).powi(2)
        + 7.0 * (0.5 * x1).sin() * (0.7 * x1 * x2).sin()
}

/// Hosaki function on `[0, 5]²`. The damping factor is `e^{-x₂}`: with
/// `e^{-x₁}` the minimum over the box would be about −24.05, not −2.3458.
pub fn hosaki(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let poly = 1.0 - 8.0 * x1 + 7.0 * x1 * x1 - 7.0 / 3.0 * x1.powi(3) + 0.25 * x1.powi(4);
    poly * x2 * x2 * (-x2).exp()
}

/// Hartman-6 function on `[0, 1]⁶` (raw, negative everywhere).
pub fn hartman6(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| {
            let e: f64 = (0..6).map(|j| HARTMAN_A[i][j] * (x[j] - 1e-4 * HARTMAN_P[i][j]).powi(2)).sum();
            HARTMAN_C[i] * (-e).exp()
        })
        .sum::<f64>()
}

/// The `y ↦ -ln(-y)` transform applied to Hartman-6; requires `y < 0`.
pub fn neg_log_neg(y: f64) -> Result<f64> {
    if !(y < 0.0) {
        return Err(Error::Domain { value: y, lower: f64::NEG_INFINITY, upper: 0.0 });
    }
    Ok(-(-y).ln())
}

/// Borehole water flow rate.
pub fn borehole(x: &[f64]) -> f64 {
    let [rw, r, tu, hu, tl, hl, l, kw] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]];
    let lr = (r / rw).ln();
    2.0 * PI * tu * (hu - hl) / (lr * (1.0 + 2.0 * l * tu / (lr * rw * rw * kw) + tu / tl))
}

/// One of the five synthetic benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Branin,
    Sasena,
    Hosaki,
    Hartman6,
    Borehole,
}

impl Problem {
    pub const ALL: [Problem; 5] = [Problem::Branin, Problem::Sasena, Problem::Hosaki, Problem::Hartman6, Problem::Borehole];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Branin => "branin",
            Problem::Sasena => "sasena",
            Problem::Hosaki => "hosaki",
            Problem::Hartman6 => "hartman6",
            Problem::Borehole => "borehole",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Problem::Branin | Problem::Sasena | Problem::Hosaki => 2,
            Problem::Hartman6 => 6,
            Problem::Borehole => 8,
        }
    }

    pub fn bounds(self) -> Vec<Bound> {
        match self {
            Problem::Branin => vec![(0.0, 1.0); 2],
            Problem::Sasena | Problem::Hosaki => vec![(0.0, 5.0); 2],
            Problem::Hartman6 => vec![(0.0, 1.0); 6],
            Problem::Borehole => BOREHOLE_BOUNDS.to_vec(),
        }
    }

    /// Published global minimum of the raw function.
    pub fn optimum(self) -> f64 {
        match self {
            Problem::Branin => 0.39788,
            Problem::Sasena => -1.4565,
            Problem::Hosaki => -2.3458,
            Problem::Hartman6 => -3.32237,
            Problem::Borehole => 7.8198,
        }
    }

    /// Default initial sample size.
    pub fn n_int(self) -> usize {
        match self {
            Problem::Branin | Problem::Sasena => 20,
            Problem::Hosaki => 12,
            Problem::Hartman6 => 60,
            Problem::Borehole => 40,
        }
    }

    /// Default number of infill updates.
    pub fn n_upd(self) -> usize {
        match self {
            Problem::Sasena => 20,
            Problem::Hartman6 => 25,
            _ => 10,
        }
    }

    /// Default maximum polynomial order for trend selection.
    pub fn p_max(self) -> u32 {
        match self {
            Problem::Hartman6 => 3,
            Problem::Borehole => 2,
            _ => 4,
        }
    }

    /// Default candidate scheme for polynomial-chaos Kriging.
    pub fn pck_scheme(self) -> Scheme {
        if self.dim() == 2 {
            Scheme::TensorProduct
        } else {
            Scheme::TotalOrder
        }
    }

    /// Whether the optimizer sees a transformed response.
    pub fn is_transformed(self) -> bool {
        self == Problem::Hartman6
    }

    fn check(self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds()) {
            let tol = 1e-12 * (hi - lo);
            if !(v >= lo - tol && v <= hi + tol) {
                return Err(Error::Domain { value: v, lower: lo, upper: hi });
            }
        }
        Ok(())
    }

    /// Raw function value at a raw point.
    pub fn raw(self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            Problem::Branin => branin(x),
            Problem::Sasena => sasena(x),
            Problem::Hosaki => hosaki(x),
            Problem::Hartman6 => hartman6(x),
            Problem::Borehole => borehole(x),
        })
    }

    /// Maps a raw value to the response the optimizer works with.
    pub fn transform(self, y: f64) -> Result<f64> {
        if self.is_transformed() {
            neg_log_neg(y)
        } else {
            Ok(y)
        }
    }

    /// Inverse of [`Problem::transform`].
    pub fn untransform(self, t: f64) -> f64 {
        if self.is_transformed() {
            -(-t).exp()
        } else {
            t
        }
    }

    /// The response the optimizer minimizes (raw or transformed).
    pub fn objective(self, x: &[f64]) -> Result<f64> {
        self.transform(self.raw(x)?)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s.to_ascii_lowercase().replace(['-', '_'], ""))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown problem '{s}' (expected one of: branin, sasena, hosaki, hartman6, borehole)"
                ))
            })
    }
}

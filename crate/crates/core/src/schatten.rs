//! Schatten-norm linear algebra over complex matrices.
//!
//! Every norm here goes through a full SVD. Matrices are small (a few hundred
//! rows at most) so robustness is preferred over speed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Exponent `p` of a Schatten norm, `1 <= p < inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SchattenExponent(f64);

impl SchattenExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(SchattenExponent(p))
        } else {
            Err(Error::Precondition(format!(
                "Schatten exponent must satisfy 1 <= p < inf, got {p}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SchattenExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        SchattenExponent::new(p)
    }
}

impl From<SchattenExponent> for f64 {
    fn from(p: SchattenExponent) -> f64 {
        p.0
    }
}

impl std::fmt::Display for SchattenExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    Ok(svd(a)?.s)
}

fn power_sum(values: &[f64], p: SchattenExponent) -> f64 {
    values.iter().map(|s| s.powf(p.value())).sum()
}

/// `(sum_i s_i^p)^(1/p)` over the singular values.
pub fn schatten_norm(a: &ComplexMatrix, p: SchattenExponent) -> Result<f64> {
    let values = singular_values(a)?;
    Ok(power_sum(&values, p).powf(1.0 / p.value()))
}

/// `(tr(|A|^p) / n)^(1/p)` for a square `n x n` matrix.
pub fn schatten_norm_normalized(a: &ComplexMatrix, p: SchattenExponent) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let values = singular_values(a)?;
    Ok((power_sum(&values, p) / a.nrows() as f64).powf(1.0 / p.value()))
}

/// Normalized distance `||a - b||'_p`.
pub fn normalized_distance(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    p: SchattenExponent,
) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    schatten_norm_normalized(&(a - b), p)
}

/// `max_{g in subset} ||rho1(g) - rho2(g)||'_p`, with both maps given as
/// element-indexed matrix lists.
pub fn rep_distance<I>(
    rho1: &[ComplexMatrix],
    rho2: &[ComplexMatrix],
    subset: I,
    p: SchattenExponent,
) -> Result<f64>
where
    I: IntoIterator<Item = usize>,
{
    let mut worst = 0.0f64;
    for g in subset {
        let (a, b) = match (rho1.get(g), rho2.get(g)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Precondition(format!(
                    "element {g} outside the domain of one of the maps"
                )))
            }
        };
        if a.shape() != b.shape() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.nrows(),
            });
        }
        worst = worst.max(normalized_distance(a, b, p)?);
    }
    Ok(worst)
}

/// Unitary polar factor of a full-rank square matrix, the closest unitary in
/// Frobenius distance.
pub fn nearest_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let dec = svd(a)?;
    let largest = dec.s.iter().cloned().fold(0.0, f64::max);
    let smallest = dec.s.iter().cloned().fold(f64::INFINITY, f64::min);
    if a.is_empty() {
        return Ok(a.clone());
    }
    if smallest.is_nan() || smallest <= 1e-12 * largest.max(1e-300) {
        return Err(Error::RankDeficient { smallest, largest });
    }
    Ok(dec.u * dec.v.adjoint())
}

/// Result of thresholding the singular values of a square matrix.
#[derive(Debug, Clone)]
pub struct PartialIsometry {
    /// `U 1_{s >= t} V*`.
    pub map: ComplexMatrix,
    /// Orthonormal columns spanning the kept right-singular subspace.
    pub right_basis: ComplexMatrix,
    /// Orthonormal columns spanning the kept left-singular subspace.
    pub left_basis: ComplexMatrix,
    /// Orthonormal complement of `right_basis`.
    pub right_complement: ComplexMatrix,
    /// Orthonormal complement of `left_basis`.
    pub left_complement: ComplexMatrix,
    /// All singular values, non-increasing.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

impl PartialIsometry {
    pub fn rank(&self) -> usize {
        self.right_basis.ncols()
    }
}

/// Keeps singular directions with `s_i >= t` and replaces the kept singular
/// values by one; the rest of the space is sent to zero.
pub fn threshold_partial_isometry(a: &ComplexMatrix, t: f64) -> Result<PartialIsometry> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Precondition(format!(
            "threshold must be positive, got {t}"
        )));
    }
    let n = a.nrows();
    let dec = svd(a)?;
    let (u, v, singular_values) = (dec.u, dec.v, dec.s);
    // values are sorted, so the kept set is a prefix
    let kept = singular_values.iter().take_while(|&&s| s >= t).count();
    let left_basis = u.columns(0, kept).into_owned();
    let right_basis = v.columns(0, kept).into_owned();
    let map = &left_basis * right_basis.adjoint();
    Ok(PartialIsometry {
        map,
        left_complement: u.columns(kept, n - kept).into_owned(),
        right_complement: v.columns(kept, n - kept).into_owned(),
        left_basis,
        right_basis,
        singular_values,
        threshold: t,
    })
}

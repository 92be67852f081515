use std::sync::Arc;

use num_complex::Complex64;

use super::group::{FiniteGroup, GroupHom};
use crate::error::{Error, Result};
use crate::linalg::{block_diag, identity, max_abs, unitarity_error};
use crate::schatten::{rep_distance, ComplexMatrix, SchattenExponent};

/// Tolerance for unitarity and the homomorphism property at construction.
pub const EXACTNESS_TOL: f64 = 1e-10;

/// A unitary representation of a finite group, one matrix per element.
#[derive(Debug, Clone)]
pub struct UnitaryRep {
    group: Arc<FiniteGroup>,
    dim: usize,
    matrices: Vec<ComplexMatrix>,
}

impl UnitaryRep {
    /// Validates unitarity and the homomorphism property to [`EXACTNESS_TOL`].
    pub fn new(group: Arc<FiniteGroup>, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let rep = UnitaryRep::unchecked(group, matrices)?;
        let err = rep.exactness_error();
        if err > EXACTNESS_TOL {
            return Err(Error::NonRepresentation(format!(
                "homomorphism/unitarity error {err:.3e} exceeds {EXACTNESS_TOL:e}"
            )));
        }
        Ok(rep)
    }

    /// Checks only shapes; use for matrices that are exact by construction.
    pub(crate) fn unchecked(group: Arc<FiniteGroup>, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                found: matrices.len(),
            });
        }
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        for m in &matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(UnitaryRep {
            group,
            dim,
            matrices,
        })
    }

    /// Largest entrywise violation of `U*U = I`, `rho(e) = I` and
    /// `rho(g)rho(h) = rho(gh)`.
    pub fn exactness_error(&self) -> f64 {
        let g = &self.group;
        let mut err = max_abs(&(&self.matrices[g.identity()] - identity(self.dim)));
        for m in &self.matrices {
            err = err.max(unitarity_error(m));
        }
        for a in g.elements() {
            for b in g.elements() {
                let prod = &self.matrices[a] * &self.matrices[b];
                err = err.max(max_abs(&(prod - &self.matrices[g.mul(a, b)])));
            }
        }
        err
    }

    /// The `dim`-dimensional trivial representation.
    pub fn trivial(group: Arc<FiniteGroup>, dim: usize) -> Self {
        let matrices = vec![identity(dim); group.order()];
        UnitaryRep {
            group,
            dim,
            matrices,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &ComplexMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<ComplexMatrix> {
        self.matrices
    }

    /// Trace of every element.
    pub fn character(&self) -> Vec<Complex64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    /// Pullback `i*(rho)` along `i: H -> G`.
    pub fn pullback(&self, hom: &GroupHom) -> Result<UnitaryRep> {
        if **hom.target() != *self.group {
            return Err(Error::InvalidHom(
                "pullback along a homomorphism with a different target".into(),
            ));
        }
        let matrices = hom
            .map()
            .iter()
            .map(|&g| self.matrices[g].clone())
            .collect();
        Ok(UnitaryRep {
            group: hom.source().clone(),
            dim: self.dim,
            matrices,
        })
    }

    /// `g -> u rho(g) u*`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<UnitaryRep> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.nrows(),
            });
        }
        let adj = u.adjoint();
        let matrices = self.matrices.iter().map(|m| u * m * &adj).collect();
        Ok(UnitaryRep {
            group: self.group.clone(),
            dim: self.dim,
            matrices,
        })
    }

    pub fn direct_sum(&self, other: &UnitaryRep) -> Result<UnitaryRep> {
        if *self.group != *other.group {
            return Err(Error::Precondition(
                "direct sum of representations of different groups".into(),
            ));
        }
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| block_diag([a, b]))
            .collect();
        Ok(UnitaryRep {
            group: self.group.clone(),
            dim: self.dim + other.dim,
            matrices,
        })
    }

    /// `Q* rho(g) Q` for an isometry `Q` whose range is invariant.
    pub fn compress(&self, basis: &ComplexMatrix) -> Result<UnitaryRep> {
        if basis.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basis.nrows(),
            });
        }
        let adj = basis.adjoint();
        let matrices = self.matrices.iter().map(|m| &adj * m * basis).collect();
        UnitaryRep::unchecked(self.group.clone(), matrices).map(|mut r| {
            r.dim = basis.ncols();
            r
        })
    }

    /// `d_G(self, other)`, the largest normalized distance over all elements.
    pub fn distance(&self, other: &UnitaryRep, p: SchattenExponent) -> Result<f64> {
        if *self.group != *other.group {
            return Err(Error::Precondition(
                "distance between representations of different groups".into(),
            ));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        rep_distance(&self.matrices, &other.matrices, self.group.elements(), p)
    }
}

/// Left-regular representation: `L(g) e_h = e_{gh}`.
pub fn regular_representation(group: &Arc<FiniteGroup>) -> UnitaryRep {
    let n = group.order();
    let matrices = group
        .elements()
        .map(|g| {
            let mut m = ComplexMatrix::zeros(n, n);
            for h in group.elements() {
                m[(group.mul(g, h), h)] = Complex64::new(1.0, 0.0);
            }
            m
        })
        .collect();
    UnitaryRep {
        group: group.clone(),
        dim: n,
        matrices,
    }
}

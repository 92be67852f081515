//! Intertwiners between nearby representations of a finite group.
//!
//! For δ-close unitary representations `ρ₁, ρ₂` of a finite group, the
//! average `T₀ = avg_g ρ₂(g) ρ₁(g)*` intertwines them exactly. Its polar part
//! on the singular directions above one half is a partial isometry with
//! `‖T − I‖'_p ≤ 3δ`, defined on an invariant subspace of codimension at most
//! `(2δ)^p · dim`. For isomorphic inputs the complements are matched by hand,
//! giving a unitary intertwiner within `5δ` of the identity.

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group_core::{decompose, multiplicities, IrrepTable, UnitaryRep};
use crate::linalg::{identity, max_abs, unitarity_error};
use crate::schatten::{
    nearest_unitary, normalized_distance, threshold_partial_isometry, ComplexMatrix,
    PartialIsometry, SchattenExponent,
};

/// Singular-value cutoff for the partial isometry.
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Largest distance for which the bounds are claimed.
pub const DISTANCE_LIMIT: f64 = 0.25;
const INVARIANCE_TOL: f64 = 1e-8;
const SEED_TOL: f64 = 1e-9;

fn check_pair(rho1: &UnitaryRep, rho2: &UnitaryRep) -> Result<()> {
    if rho1.group() != rho2.group() {
        return Err(Error::Precondition(
            "representations of different groups".into(),
        ));
    }
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    Ok(())
}

/// `(1/|G|) Σ_g ρ₂(g) ρ₁(g)*`, an exact intertwiner from `ρ₁` to `ρ₂`.
pub fn averaged_intertwiner(rho1: &UnitaryRep, rho2: &UnitaryRep) -> Result<ComplexMatrix> {
    check_pair(rho1, rho2)?;
    Ok(average_sandwich(
        rho1.matrices(),
        rho2.matrices(),
        &identity(rho1.dim()),
    ))
}

/// `(1/|G|) Σ_g b(g) E a(g)*`.
fn average_sandwich(a: &[ComplexMatrix], b: &[ComplexMatrix], e: &ComplexMatrix) -> ComplexMatrix {
    let mut sum = ComplexMatrix::zeros(e.nrows(), e.ncols());
    for (x, y) in a.iter().zip(b) {
        sum += y * e * x.adjoint();
    }
    sum.unscale(a.len() as f64)
}

/// Partial-isometry intertwiner on large invariant subspaces.
#[derive(Debug, Clone)]
pub struct IntertwinerResult {
    /// Partial isometry with `ρ₂(x) T = T ρ₁(x)`.
    pub t: ComplexMatrix,
    /// Orthonormal basis of `V₁`, the initial space of `T`.
    pub v1_basis: ComplexMatrix,
    /// Orthonormal basis of `V₂ = T V₁`.
    pub v2_basis: ComplexMatrix,
    /// Orthonormal basis of `V₁^⊥`.
    pub v1_complement: ComplexMatrix,
    /// Orthonormal basis of `V₂^⊥`.
    pub v2_complement: ComplexMatrix,
    /// Singular values of the averaged intertwiner.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Measured `d_G(ρ₁, ρ₂)`.
    pub delta: f64,
    /// Measured `‖T − I‖'_p`.
    pub defect_bound: f64,
    pub p: SchattenExponent,
}

impl IntertwinerResult {
    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn kept_dim(&self) -> usize {
        self.v1_basis.ncols()
    }

    /// `dim V₁ ≥ (1 − (2δ)^p) dim`.
    pub fn dimension_bound_holds(&self) -> bool {
        let n = self.dim() as f64;
        self.kept_dim() as f64 >= (1.0 - (2.0 * self.delta).powf(self.p.value())) * n - 1e-9
    }

    /// `‖T − I‖'_p ≤ 3δ`.
    pub fn norm_bound_holds(&self) -> bool {
        self.defect_bound <= 3.0 * self.delta + 1e-12
    }
}

/// Thresholds the averaged intertwiner at [`DEFAULT_THRESHOLD`].
pub fn invariant_intertwiner(
    rho1: &UnitaryRep,
    rho2: &UnitaryRep,
    p: SchattenExponent,
    delta_hint: f64,
) -> Result<IntertwinerResult> {
    invariant_intertwiner_with_threshold(rho1, rho2, p, delta_hint, DEFAULT_THRESHOLD)
}

pub fn invariant_intertwiner_with_threshold(
    rho1: &UnitaryRep,
    rho2: &UnitaryRep,
    p: SchattenExponent,
    delta_hint: f64,
    threshold: f64,
) -> Result<IntertwinerResult> {
    check_pair(rho1, rho2)?;
    let delta = rho1.distance(rho2, p)?;
    if delta > delta_hint + 1e-12 {
        warn!("measured distance {delta:.3e} exceeds the supplied hint {delta_hint:.3e}");
    }
    if delta >= DISTANCE_LIMIT {
        warn!("measured distance {delta:.3e} is not below {DISTANCE_LIMIT}; bounds are not guaranteed");
    }
    let t0 = averaged_intertwiner(rho1, rho2)?;
    let iso = threshold_partial_isometry(&t0, threshold)?;
    check_invariance(rho1, &iso.right_basis, &iso, "V1")?;
    check_invariance(rho2, &iso.left_basis, &iso, "V2")?;
    let n = rho1.dim();
    let defect_bound = if n == 0 {
        0.0
    } else {
        normalized_distance(&iso.map, &identity(n), p)?
    };
    Ok(IntertwinerResult {
        t: iso.map,
        v1_basis: iso.right_basis,
        v2_basis: iso.left_basis,
        v1_complement: iso.right_complement,
        v2_complement: iso.left_complement,
        singular_values: iso.singular_values,
        threshold,
        delta,
        defect_bound,
        p,
    })
}

fn check_invariance(
    rho: &UnitaryRep,
    basis: &ComplexMatrix,
    iso: &PartialIsometry,
    label: &str,
) -> Result<()> {
    let proj = basis * basis.adjoint();
    let worst = rho
        .matrices()
        .iter()
        .map(|m| {
            let image = m * basis;
            max_abs(&(&image - &proj * &image))
        })
        .fold(0.0, f64::max);
    if worst > INVARIANCE_TOL {
        let straddling: Vec<f64> = iso
            .singular_values
            .iter()
            .copied()
            .filter(|s| (s - iso.threshold).abs() < 1e-3)
            .collect();
        return Err(Error::Numerical(format!(
            "{label} is not invariant (residual {worst:.2e}); singular values near the threshold {}: {straddling:?}",
            iso.threshold
        )));
    }
    Ok(())
}

/// Unitary intertwiner between isomorphic representations.
#[derive(Debug, Clone)]
pub struct UnitaryIntertwiner {
    /// Unitary with `T' ρ₁(x) T'* = ρ₂(x)`.
    pub unitary: ComplexMatrix,
    /// Measured `d_G(ρ₁, ρ₂)`.
    pub delta: f64,
    /// Measured `‖T' − I‖'_p`.
    pub distance_to_identity: f64,
    /// Dimension of the subspace handled by the thresholded average.
    pub kept_dim: usize,
}

impl UnitaryIntertwiner {
    /// `‖T' − I‖'_p ≤ 5δ`.
    pub fn bound_holds(&self) -> bool {
        self.distance_to_identity <= 5.0 * self.delta + 1e-12
    }
}

/// Extends the thresholded intertwiner by a unitary between the complements,
/// pairing irreducible summands in canonical order.
pub fn unitary_intertwiner(
    rho1: &UnitaryRep,
    rho2: &UnitaryRep,
    table: &IrrepTable,
    p: SchattenExponent,
) -> Result<UnitaryIntertwiner> {
    check_pair(rho1, rho2)?;
    let m1 = multiplicities(rho1, table)?;
    let m2 = multiplicities(rho2, table)?;
    if m1 != m2 {
        return Err(Error::NotIsomorphic {
            left: m1,
            right: m2,
        });
    }
    let n = rho1.dim();
    let base = invariant_intertwiner(rho1, rho2, p, DISTANCE_LIMIT)?;
    let mut unitary = base.t.clone();
    if base.kept_dim() < n {
        unitary += complement_intertwiner(rho1, rho2, &base, table)?;
    }

    let unit_err = unitarity_error(&unitary);
    if unit_err > 1e-10 {
        return Err(Error::Numerical(format!(
            "extended intertwiner is not unitary (error {unit_err:.2e})"
        )));
    }
    let adj = unitary.adjoint();
    let conj_err = rho1
        .matrices()
        .iter()
        .zip(rho2.matrices())
        .map(|(a, b)| max_abs(&(&unitary * a * &adj - b)))
        .fold(0.0, f64::max);
    if conj_err > INVARIANCE_TOL {
        return Err(Error::Numerical(format!(
            "extended intertwiner conjugation error {conj_err:.2e}"
        )));
    }
    let distance_to_identity = if n == 0 {
        0.0
    } else {
        normalized_distance(&unitary, &identity(n), p)?
    };
    Ok(UnitaryIntertwiner {
        unitary,
        delta: base.delta,
        distance_to_identity,
        kept_dim: base.kept_dim(),
    })
}

/// `S'` mapping `V₁^⊥` onto `V₂^⊥` and intertwining the restrictions.
fn complement_intertwiner(
    rho1: &UnitaryRep,
    rho2: &UnitaryRep,
    base: &IntertwinerResult,
    table: &IrrepTable,
) -> Result<ComplexMatrix> {
    let q1 = &base.v1_complement;
    let q2 = &base.v2_complement;
    let sigma1 = rho1.compress(q1)?;
    let sigma2 = rho2.compress(q2)?;
    let dec1 = decompose(&sigma1, table)?;
    let dec2 = decompose(&sigma2, table)?;
    if dec1.multiplicities != dec2.multiplicities {
        return Err(Error::NotIsomorphic {
            left: dec1.multiplicities,
            right: dec2.multiplicities,
        });
    }
    let n = rho1.dim();
    let mut s = ComplexMatrix::zeros(n, n);
    for irrep in 0..table.len() {
        for (c1, c2) in dec1.components_of(irrep).zip(dec2.components_of(irrep)) {
            let b1 = q1 * &c1.basis;
            let b2 = q2 * &c2.basis;
            let pi1: Vec<ComplexMatrix> = rho1
                .matrices()
                .iter()
                .map(|m| b1.adjoint() * m * &b1)
                .collect();
            let pi2: Vec<ComplexMatrix> = rho2
                .matrices()
                .iter()
                .map(|m| b2.adjoint() * m * &b2)
                .collect();
            let u = schur_unitary(&pi1, &pi2)?;
            s += &b2 * u * b1.adjoint();
        }
    }
    Ok(s)
}

/// Unitary intertwiner between two equivalent irreducible representations,
/// from a rank-one seed averaged over the group.
fn schur_unitary(pi1: &[ComplexMatrix], pi2: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let d = pi1.first().map_or(0, |m| m.nrows());
    for k in 0..d {
        let mut seed = ComplexMatrix::zeros(d, d);
        seed[(k, k)] = Complex64::new(1.0, 0.0);
        let avg = average_sandwich(pi1, pi2, &seed);
        if max_abs(&avg) >= SEED_TOL {
            return nearest_unitary(&avg);
        }
    }
    Err(Error::Numerical(
        "all rank-one seeds averaged to zero between paired components".into(),
    ))
}

/// Distance between two paddings of a common representation, with the
/// matching bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaddingBound {
    /// `d_G(ρ⊕σ₁, ρ⊕σ₂)`.
    pub distance: f64,
    /// `(dim σ / dim total)^{1/p}`.
    pub delta: f64,
    /// `2δ`.
    pub bound: f64,
}

pub fn padding_distance_bound(
    rho: &UnitaryRep,
    sigma1: &UnitaryRep,
    sigma2: &UnitaryRep,
    p: SchattenExponent,
) -> Result<PaddingBound> {
    check_pair(sigma1, sigma2)?;
    let a = rho.direct_sum(sigma1)?;
    let b = rho.direct_sum(sigma2)?;
    let total = a.dim();
    let distance = if total == 0 { 0.0 } else { a.distance(&b, p)? };
    let delta = if total == 0 {
        0.0
    } else {
        (sigma1.dim() as f64 / total as f64).powf(1.0 / p.value())
    };
    Ok(PaddingBound {
        distance,
        delta,
        bound: 2.0 * delta,
    })
}

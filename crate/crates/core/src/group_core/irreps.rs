//! Irreducible representations, characters and multiplicity vectors.
//!
//! The irreps of a group are extracted from its regular representation by
//! commutant averaging: for a random Hermitian `H`, the operator
//! `T = (1/|G|) Σ_g L(g) H L(g)*` commutes with `L`, and for generic `H` each
//! of its eigenspaces carries one irreducible subrepresentation.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::group::{FiniteGroup, GroupHom};
use super::rep::{regular_representation, UnitaryRep};
use crate::error::{Error, Result};
use crate::json::matrix_to_json;
use crate::linalg::{
    block_diag, hermitian_eigen, hstack, max_abs, projector_range, random_hermitian,
    unitarity_error,
};
use crate::schatten::ComplexMatrix;

/// Relative eigenvalue gap below which commutant eigenvalues are merged.
pub const CLUSTER_GAP: f64 = 1e-7;
/// Fresh Hermitian draws allowed after the first one.
pub const IRREP_RESEEDS: usize = 3;
/// Distance from an integer tolerated when rounding multiplicities.
pub const MULTIPLICITY_TOL: f64 = 1e-6;
const CHARACTER_TOL: f64 = 1e-6;

/// An irreducible unitary representation with its class character.
#[derive(Debug, Clone)]
pub struct Irrep {
    dim: usize,
    matrices: Vec<ComplexMatrix>,
    character: Vec<Complex64>,
}

impl Irrep {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &ComplexMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    /// Character value per conjugacy class.
    pub fn character(&self) -> &[Complex64] {
        &self.character
    }

    pub fn is_trivial(&self) -> bool {
        self.dim == 1
            && self
                .character
                .iter()
                .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < CHARACTER_TOL)
    }
}

/// Complete list of inequivalent irreps in canonical order: ascending
/// dimension, then characters in descending lexicographic order over the
/// classes (so the trivial irrep comes first).
#[derive(Debug, Clone)]
pub struct IrrepTable {
    group: Arc<FiniteGroup>,
    irreps: Vec<Irrep>,
}

fn character_key(chi: &[Complex64]) -> Vec<(i64, i64)> {
    chi.iter()
        .map(|z| {
            (
                (z.re / CHARACTER_TOL).round() as i64,
                (z.im / CHARACTER_TOL).round() as i64,
            )
        })
        .collect()
}

fn canonical_cmp(a: &Irrep, b: &Irrep) -> Ordering {
    a.dim
        .cmp(&b.dim)
        .then_with(|| character_key(&b.character).cmp(&character_key(&a.character)))
}

fn class_character(group: &FiniteGroup, matrices: &[ComplexMatrix]) -> Vec<Complex64> {
    group
        .classes()
        .iter()
        .map(|c| matrices[c[0]].trace())
        .collect()
}

/// `(1/|G|) Σ_g |χ(g)|^2` for a class character.
fn class_norm_squared(group: &FiniteGroup, chi: &[Complex64]) -> f64 {
    let total: f64 = group
        .classes()
        .iter()
        .zip(chi)
        .map(|(c, z)| c.len() as f64 * z.norm_sqr())
        .sum();
    total / group.order() as f64
}

/// `(1/|G|) Σ_g a(g) conj(b(g))` for class characters.
fn class_inner(group: &FiniteGroup, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let total: Complex64 = group
        .classes()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(c, (x, y))| x * y.conj() * c.len() as f64)
        .sum();
    total / group.order() as f64
}

fn commutant_irreps<R: Rng + ?Sized>(
    group: &Arc<FiniteGroup>,
    rng: &mut R,
) -> std::result::Result<Vec<Irrep>, String> {
    let n = group.order();
    let regular = regular_representation(group);
    let h = random_hermitian(n, rng);
    // T[a][b] = (1/n) Σ_k H[k a][k b]
    let mut t = ComplexMatrix::zeros(n, n);
    for k in group.elements() {
        for a in 0..n {
            let ka = group.mul(k, a);
            for b in 0..n {
                t[(a, b)] += h[(ka, group.mul(k, b))];
            }
        }
    }
    t.unscale_mut(n as f64);
    let (values, vectors) = hermitian_eigen(&t).map_err(|e| e.to_string())?;
    let scale = values
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1e-300);

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || (values[i] - values[i - 1]) / scale > CLUSTER_GAP {
            clusters.push((start, i));
            start = i;
        }
    }

    let mut found: Vec<Irrep> = Vec::new();
    for (lo, hi) in clusters {
        let basis = vectors.columns(lo, hi - lo).into_owned();
        let compressed = regular.compress(&basis).map_err(|e| e.to_string())?;
        for g in group.elements() {
            let residual = max_abs(&(regular.matrix(g) * &basis - &basis * compressed.matrix(g)));
            if residual > 1e-8 {
                return Err(format!(
                    "eigenspace {lo}..{hi} not invariant (residual {residual:.2e})"
                ));
            }
        }
        let character = class_character(group, compressed.matrices());
        let norm = class_norm_squared(group, &character);
        if (norm - 1.0).abs() > 1e-6 {
            return Err(format!(
                "eigenspace {lo}..{hi} is reducible (character norm {norm:.6}), eigenvalues clustered"
            ));
        }
        let duplicate = found.iter().any(|irr| {
            irr.character
                .iter()
                .zip(&character)
                .all(|(a, b)| (a - b).norm() < CHARACTER_TOL)
        });
        if !duplicate {
            found.push(Irrep {
                dim: hi - lo,
                matrices: compressed.into_matrices(),
                character,
            });
        }
    }

    let dim_sq: usize = found.iter().map(|i| i.dim * i.dim).sum();
    if dim_sq != n || found.len() != group.classes().len() {
        return Err(format!(
            "found {} irreps with Σ dim² = {dim_sq}, expected {} irreps and {n}",
            found.len(),
            group.classes().len()
        ));
    }
    found.sort_by(canonical_cmp);
    Ok(found)
}

/// Computes all irreps of `group` by decomposing its regular representation.
pub fn irrep_table<R: Rng + ?Sized>(group: &Arc<FiniteGroup>, rng: &mut R) -> Result<IrrepTable> {
    let mut detail = String::new();
    for _ in 0..=IRREP_RESEEDS {
        match commutant_irreps(group, rng) {
            Ok(irreps) => {
                return Ok(IrrepTable {
                    group: group.clone(),
                    irreps,
                })
            }
            Err(msg) => detail = msg,
        }
    }
    Err(Error::IrrepClustering {
        attempts: IRREP_RESEEDS + 1,
        detail,
    })
}

impl IrrepTable {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.irreps.iter().map(|i| i.dim).collect()
    }

    /// Index of the trivial irrep (always 0 in canonical order).
    pub fn trivial_index(&self) -> usize {
        self.irreps
            .iter()
            .position(Irrep::is_trivial)
            .expect("every table contains the trivial irrep")
    }

    /// `Σ_π |λ_π| dim π`.
    pub fn weighted_norm(&self, lambda: &[i64]) -> i64 {
        lambda
            .iter()
            .zip(&self.irreps)
            .map(|(m, irr)| m.abs() * irr.dim as i64)
            .sum()
    }

    /// Block-diagonal matrices realizing `lambda` from the table's irreps in
    /// canonical order. Zero multiplicities give `0 x 0` matrices.
    pub fn canonical_matrices(&self, lambda: &[i64]) -> Result<Vec<ComplexMatrix>> {
        if lambda.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: lambda.len(),
            });
        }
        if let Some(m) = lambda.iter().find(|&&m| m < 0) {
            return Err(Error::Precondition(format!("negative multiplicity {m}")));
        }
        Ok(self
            .group
            .elements()
            .map(|g| {
                let blocks: Vec<&ComplexMatrix> = self
                    .irreps
                    .iter()
                    .zip(lambda)
                    .flat_map(|(irr, &m)| std::iter::repeat_n(irr.matrix(g), m as usize))
                    .collect();
                block_diag(blocks)
            })
            .collect())
    }

    /// A representation with multiplicity vector `lambda`.
    pub fn canonical_rep(&self, lambda: &[i64]) -> Result<UnitaryRep> {
        let matrices = self.canonical_matrices(lambda)?;
        UnitaryRep::unchecked(self.group.clone(), matrices)
    }

    pub fn to_json(&self) -> IrrepTableJson {
        IrrepTableJson {
            group: self.group.name().map(str::to_owned),
            order: self.group.order(),
            classes: self.group.classes().to_vec(),
            irreps: self
                .irreps
                .iter()
                .map(|irr| IrrepJson {
                    dim: irr.dim,
                    character: irr.character.iter().map(|z| [z.re, z.im]).collect(),
                    matrices: irr.matrices.iter().map(matrix_to_json).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IrrepJson {
    pub dim: usize,
    pub character: Vec<[f64; 2]>,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IrrepTableJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub order: usize,
    pub classes: Vec<Vec<usize>>,
    pub irreps: Vec<IrrepJson>,
}

fn check_same_group(rep: &UnitaryRep, table: &IrrepTable) -> Result<()> {
    if **rep.group() != *table.group {
        return Err(Error::Precondition(
            "representation and irrep table belong to different groups".into(),
        ));
    }
    Ok(())
}

/// Multiplicity of every irrep of `table` in `rho`, via character inner products.
pub fn multiplicities(rho: &UnitaryRep, table: &IrrepTable) -> Result<Vec<i64>> {
    check_same_group(rho, table)?;
    let group = &table.group;
    let chi = class_character(group, rho.matrices());
    let mut out = Vec::with_capacity(table.len());
    for irr in &table.irreps {
        let m = class_inner(group, &chi, &irr.character);
        let rounded = m.re.round();
        if (m - Complex64::new(rounded, 0.0)).norm() > MULTIPLICITY_TOL {
            return Err(Error::NonRepresentation(format!(
                "multiplicity {:.9}{:+.9}i is not an integer",
                m.re, m.im
            )));
        }
        out.push(rounded as i64);
    }
    let total = table.weighted_norm(&out);
    if total != rho.dim() as i64 {
        return Err(Error::NonRepresentation(format!(
            "multiplicities {out:?} account for dimension {total}, representation has {}",
            rho.dim()
        )));
    }
    Ok(out)
}

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols, "IntMatrix::apply dimension mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "IntMatrix::mul dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                out.set(
                    r,
                    c,
                    (0..self.cols).map(|k| self.get(r, k) * rhs.get(k, c)).sum(),
                );
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c)).collect())
            .collect()
    }
}

/// The linear map `i^#: Θ_G -> Θ_H` for `i: H -> G`, as an
/// `|Irr(H)| x |Irr(G)|` matrix whose column `π` is the restriction of `π`.
pub fn pushforward_hom(
    hom: &GroupHom,
    table_h: &IrrepTable,
    table_g: &IrrepTable,
) -> Result<IntMatrix> {
    if **hom.source() != *table_h.group || **hom.target() != *table_g.group {
        return Err(Error::Precondition(
            "irrep tables do not match the homomorphism".into(),
        ));
    }
    let mut out = IntMatrix::zeros(table_h.len(), table_g.len());
    for (c, irr) in table_g.irreps.iter().enumerate() {
        let rep = UnitaryRep::unchecked(table_g.group.clone(), irr.matrices.clone())?;
        let restricted = rep.pullback(hom)?;
        for (r, m) in multiplicities(&restricted, table_h)?
            .into_iter()
            .enumerate()
        {
            out.set(r, c, m);
        }
    }
    Ok(out)
}

/// One irreducible summand of a decomposed representation: `basis` is an
/// isometry with `rho(g) basis = basis π(g)` for the table irrep `irrep`.
#[derive(Debug, Clone)]
pub struct Component {
    pub irrep: usize,
    pub basis: ComplexMatrix,
}

/// Splitting of a representation into irreducible summands, isotypic blocks in
/// canonical irrep order.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub multiplicities: Vec<i64>,
    pub components: Vec<Component>,
}

impl Decomposition {
    /// The square unitary whose columns are the component bases in order.
    pub fn basis(&self, dim: usize) -> ComplexMatrix {
        let blocks: Vec<ComplexMatrix> = self.components.iter().map(|c| c.basis.clone()).collect();
        hstack(&blocks, dim)
    }

    pub fn components_of(&self, irrep: usize) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(move |c| c.irrep == irrep)
    }
}

/// Decomposes `rho` with the isotypic projections
/// `P_{j1} = (d/|G|) Σ_g conj(π(g)_{j1}) rho(g)`: an orthonormal basis `w_k`
/// of `range(P_{11})` yields copies `[P_{11} w_k, ..., P_{d1} w_k]` on which
/// `rho` acts exactly by the table matrices of `π`.
pub fn decompose(rho: &UnitaryRep, table: &IrrepTable) -> Result<Decomposition> {
    let mults = multiplicities(rho, table)?;
    let group = &table.group;
    let n = rho.dim();
    let order = group.order() as f64;
    let mut components = Vec::new();
    for (idx, (irr, &m)) in table.irreps.iter().zip(&mults).enumerate() {
        if m == 0 {
            continue;
        }
        let d = irr.dim;
        let projections: Vec<ComplexMatrix> = (0..d)
            .map(|j| {
                let mut p = ComplexMatrix::zeros(n, n);
                for g in group.elements() {
                    p += rho.matrix(g) * irr.matrix(g)[(j, 0)].conj();
                }
                p * Complex64::new(d as f64 / order, 0.0)
            })
            .collect();
        let range = projector_range(&projections[0])?;
        if range.ncols() != m as usize {
            return Err(Error::Numerical(format!(
                "isotypic projection for irrep {idx} has rank {}, character multiplicity {m}",
                range.ncols()
            )));
        }
        let images: Vec<ComplexMatrix> = projections.iter().map(|p| p * &range).collect();
        for k in 0..m as usize {
            let mut basis = ComplexMatrix::zeros(n, d);
            for (j, img) in images.iter().enumerate() {
                basis.set_column(j, &img.column(k));
            }
            components.push(Component { irrep: idx, basis });
        }
    }
    let dec = Decomposition {
        multiplicities: mults,
        components,
    };
    let err = unitarity_error(&dec.basis(n));
    if err > 1e-8 {
        return Err(Error::Numerical(format!(
            "adapted basis not orthonormal (error {err:.2e})"
        )));
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(name: &str, seed: u64) -> IrrepTable {
        let g = Arc::new(FiniteGroup::preset(name).unwrap());
        irrep_table(&g, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn trivial_group_has_one_irrep() {
        let t = table("trivial", 0);
        assert_eq!(t.dims(), vec![1]);
    }

    #[test]
    fn z2_characters() {
        // brute force: the regular rep of Z2 splits into e0+e1 (trivial) and e0-e1 (sign)
        let t = table("Z2", 1);
        assert_eq!(t.dims(), vec![1, 1]);
        let chars: Vec<Vec<Complex64>> =
            t.irreps().iter().map(|i| i.character().to_vec()).collect();
        for (got, want) in chars.iter().zip([[c(1.0), c(1.0)], [c(1.0), c(-1.0)]]) {
            for (a, b) in got.iter().zip(want) {
                assert!((a - b).norm() < 1e-10);
            }
        }
        assert_eq!(t.trivial_index(), 0);
    }

    #[test]
    fn s3_dims_and_orthonormality() {
        let t = table("S3", 2);
        assert_eq!(t.dims(), vec![1, 1, 2]);
        let g = t.group().clone();
        for (i, a) in t.irreps().iter().enumerate() {
            for (j, b) in t.irreps().iter().enumerate() {
                let ip = class_inner(&g, a.character(), b.character());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(want)).norm() < 1e-8);
            }
            let rep = UnitaryRep::unchecked(g.clone(), a.matrices().to_vec()).unwrap();
            assert!(rep.exactness_error() < 1e-10);
        }
    }

    #[test]
    fn seed_independent_up_to_order() {
        for name in ["S3", "D4", "Q8", "A4", "Z6"] {
            let a = table(name, 10);
            let b = table(name, 99);
            assert_eq!(a.dims(), b.dims());
            for (x, y) in a.irreps().iter().zip(b.irreps()) {
                for (u, v) in x.character().iter().zip(y.character()) {
                    assert!((u - v).norm() < 1e-8, "{name}");
                }
            }
        }
    }

    #[test]
    fn sum_of_squares_for_larger_groups() {
        for name in ["S4", "A4", "D6", "Z2xZ2"] {
            let t = table(name, 3);
            let s: usize = t.dims().iter().map(|d| d * d).sum();
            assert_eq!(s, t.group().order(), "{name}");
        }
    }

    #[test]
    fn multiplicity_examples() {
        let s3 = table("S3", 4);
        let reg = regular_representation(s3.group());
        assert_eq!(multiplicities(&reg, &s3).unwrap(), vec![1, 1, 2]);

        let z2 = table("Z2", 5);
        let triv3 = UnitaryRep::trivial(z2.group().clone(), 3);
        assert_eq!(multiplicities(&triv3, &z2).unwrap(), vec![3, 0]);

        let m = vec![
            identity(3),
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(-1.0),
                c(-1.0),
                c(1.0),
            ])),
        ];
        let rep = UnitaryRep::new(z2.group().clone(), m).unwrap();
        assert_eq!(multiplicities(&rep, &z2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn multiplicity_rejects_non_representation() {
        let z2 = table("Z2", 6);
        let half = vec![identity(1), identity(1).scale(0.0)];
        let fake = UnitaryRep::unchecked(z2.group().clone(), half).unwrap();
        assert!(matches!(
            multiplicities(&fake, &z2),
            Err(Error::NonRepresentation(_))
        ));
    }

    #[test]
    fn pushforward_examples() {
        let z2 = table("Z2", 7);
        let id = GroupHom::identity(z2.group().clone());
        assert_eq!(
            pushforward_hom(&id, &z2, &z2).unwrap(),
            IntMatrix::identity(2)
        );

        let s3 = table("S3", 8);
        let triv = table("trivial", 9);
        let inc = GroupHom::from_trivial(s3.group().clone());
        let triv = IrrepTable {
            group: inc.source().clone(),
            irreps: triv.irreps,
        };
        let m = pushforward_hom(&inc, &triv, &s3).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, 1, 2]]);

        // element 1 of S3 is the transposition (0 2 1) in lexicographic order
        let z2_to_s3 =
            GroupHom::injection(z2.group().clone(), s3.group().clone(), vec![0, 1]).unwrap();
        let m = pushforward_hom(&z2_to_s3, &z2, &s3).unwrap();
        // columns: trivial -> (1,0), sign -> (0,1), standard -> (1,1)
        assert_eq!(m.to_rows(), vec![vec![1, 0, 1], vec![0, 1, 1]]);
        for (col, dim) in s3.dims().iter().enumerate() {
            let total: i64 = m
                .column(col)
                .iter()
                .zip(z2.dims())
                .map(|(a, d)| a * d as i64)
                .sum();
            assert_eq!(total, *dim as i64);
        }
    }

    #[test]
    fn decomposition_intertwines_exactly() {
        let s3 = table("S3", 12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = crate::linalg::haar_unitary(7, &mut rng);
        let rho = s3.canonical_rep(&[2, 1, 2]).unwrap().conjugate(&u).unwrap();
        let dec = decompose(&rho, &s3).unwrap();
        assert_eq!(dec.multiplicities, vec![2, 1, 2]);
        assert_eq!(dec.components.len(), 5);
        for comp in &dec.components {
            let irr = &s3.irreps()[comp.irrep];
            for g in s3.group().elements() {
                let lhs = rho.matrix(g) * &comp.basis;
                let rhs = &comp.basis * irr.matrix(g);
                assert!(max_abs(&(lhs - rhs)) < 1e-12);
            }
        }
        assert!(unitarity_error(&dec.basis(7)) < 1e-12);
    }

    #[test]
    fn table_json_has_pairs() {
        let t = table("Z3", 14);
        let v = serde_json::to_value(t.to_json()).unwrap();
        assert_eq!(v["irreps"].as_array().unwrap().len(), 3);
        assert_eq!(
            v["irreps"][1]["matrices"][1][0][0]
                .as_array()
                .unwrap()
                .len(),
            2
        );
    }
}

//! Small dense helpers shared by the numerical modules.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::schatten::ComplexMatrix;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Entries i.i.d. standard complex Gaussian.
pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

/// GUE sample rescaled so that `||H||'_2 = 1`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_complex(n, n, rng);
    let h = (&a + a.adjoint()).scale(0.5);
    let hs = (h.norm_squared() / n as f64).sqrt();
    if hs > 0.0 {
        h.unscale(hs)
    } else {
        identity(n)
    }
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the phases of
/// `diag(R)` divided out.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = random_complex(n, n, rng);
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
fn to_faer(a: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `a = u diag(s) v*` with `s` non-increasing.
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Numerical(format!(
            "{}x{} matrix has non-finite entries",
            a.nrows(),
            a.ncols()
        )));
    }
    let dec = to_faer(a).svd().map_err(|e| {
        Error::Numerical(format!(
            "SVD failed on {}x{} matrix: {e:?}",
            a.nrows(),
            a.ncols()
        ))
    })?;
    let s = dec
        .S()
        .column_vector()
        .iter()
        .map(|z| z.re.max(0.0))
        .collect();
    Ok(Svd {
        u: from_faer(dec.U()),
        s,
        v: from_faer(dec.V()),
    })
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed (n = {n}): {e:?}")))?;
    let values = eig.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, from_faer(eig.U())))
}

/// `exp(i * eps * H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| Complex64::from_polar(1.0, eps * x)),
    );
    Ok(&vectors * ComplexMatrix::from_diagonal(&phases) * vectors.adjoint())
}

pub fn block_diag<'a, I>(blocks: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let blocks: Vec<&ComplexMatrix> = blocks.into_iter().collect();
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(n, m);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), b.shape()).copy_from(b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    block_diag([a, b])
}

/// Concatenates column blocks with a common row count.
pub fn hstack(blocks: &[ComplexMatrix], rows: usize) -> ComplexMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut k = 0;
    for b in blocks {
        out.view_mut((0, k), (rows, b.ncols())).copy_from(b);
        k += b.ncols();
    }
    out
}

/// Largest entry of `|U*U - I|`.
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - identity(n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the range of an (approximate) orthogonal projector,
/// taken from its eigenvectors with eigenvalue above one half.
pub fn projector_range(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(p)?;
    let n = p.nrows();
    let start = values.iter().take_while(|&&x| x < 0.5).count();
    // eigenvalues ascending, so reverse to list the range by decreasing weight
    let cols: Vec<usize> = (start..n).rev().collect();
    Ok(ComplexMatrix::from_fn(n, cols.len(), |r, k| {
        vectors[(r, cols[k])]
    }))
}

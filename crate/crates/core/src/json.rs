//! JSON encodings of complex matrices: rows of `[re, im]` pairs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::schatten::ComplexMatrix;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::Config(format!(
            "ragged matrix row of length {} (expected {m})",
            bad.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, m, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

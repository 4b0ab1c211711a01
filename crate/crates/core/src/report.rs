//! Serialization helpers shared by reports, sweeps and the CLI.

use nalgebra::{DMatrix, Dim, Matrix, RawStorage};
use serde::ser::{SerializeSeq, Serializer};

/// Row-major nested arrays.
pub fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    serialize_rows(m, s)
}

pub fn serialize_rows<R, C, St, S>(m: &Matrix<f64, R, C, St>, s: S) -> Result<S::Ok, S::Error>
where
    R: Dim,
    C: Dim,
    St: RawStorage<f64, R, C>,
    S: Serializer,
{
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

pub fn matrix_rows<R: Dim, C: Dim, St: RawStorage<f64, R, C>>(m: &Matrix<f64, R, C, St>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Twelve significant digits in scientific notation; non-finite values become
/// `nan`, `inf` or `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 {
        // Folds -0.0 so identical results print identically.
        "0.00000000000e0".into()
    } else {
        format!("{x:.11e}")
    }
}

//! Small dense linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};

use crate::lattice_forms::IntMatrix;
use crate::{CMatrix, CVector, Complex64, Error, Result};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.im)
}

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn int_to_complex(m: &IntMatrix) -> Result<CMatrix> {
    let rows = m
        .to_i64_rows()
        .ok_or_else(|| Error::Unsupported("integer entries exceed 64 bits".into()))?;
    Ok(CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| c(rows[i][j] as f64, 0.0)))
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn hdot(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear pairing `Σ a_i b_i` (no conjugation).
pub fn dot(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn real_dot(a: &[f64], b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| y * *x).sum()
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Singular values (descending) and the right singular vector of the
/// smallest one.
pub fn smallest_right_singular(m: &CMatrix) -> (Vec<f64>, CVector) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let last = *order.last().expect("non-empty matrix");
    let v = CVector::from_fn(n, |j, _| v_t[(last, j)].conj());
    (values, v)
}

/// Solves a real least-squares problem `min ‖A x − b‖` by SVD.
pub fn real_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-14;
    svd.solve(b, tol).expect("both factors computed")
}

/// Solves a complex square system, failing on numerical singularity.
pub fn solve_complex(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin < 1e-13 * smax {
        return Err(Error::RankDeficient(format!(
            "matrix condition estimate {:.3e}",
            if smin == 0.0 { f64::INFINITY } else { smax / smin }
        )));
    }
    Ok(svd.solve(b, 0.0).expect("both factors computed"))
}

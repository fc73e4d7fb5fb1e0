//! Hermitian eigendecomposition. nalgebra's complex solver returns infinite
//! eigenvalues on some sparse density matrices, so spectra come from faer.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn to_faer(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * half)
}

/// Eigenvalues of `(A + A†)/2`, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev = to_faer(m).self_adjoint_eigenvalues(Side::Lower).expect("self-adjoint eigensolver converges");
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (ascending) and eigenvectors of `(A + A†)/2`.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let evd = to_faer(m).self_adjoint_eigen(Side::Lower).expect("self-adjoint eigensolver converges");
    let (s, u) = (evd.S(), evd.U());
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    (values, vectors)
}

//! Thin wrappers over the dense factorizations used throughout the crate.

use faer::{c64, Mat, MatRef, Side};

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

fn assert_finite_c(m: MatRef<'_, c64>) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            assert!(
                z.re.is_finite() && z.im.is_finite(),
                "non-finite matrix entry"
            );
        }
    }
}

fn assert_finite_r(m: MatRef<'_, f64>) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            assert!(m[(i, j)].is_finite(), "non-finite matrix entry");
        }
    }
}

/// Eigenvalues (ascending) and eigenvectors of a complex Hermitian matrix.
pub(crate) fn eigh_complex(m: MatRef<'_, c64>) -> (Vec<f64>, Mat<c64>) {
    assert_finite_c(m);
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .expect("Hermitian eigendecomposition failed to converge");
    let s = e.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i].re).collect();
    (values, e.U().to_owned())
}

/// Eigenvalues (ascending) and eigenvectors of a real symmetric matrix.
pub(crate) fn eigh_real(m: MatRef<'_, f64>) -> (Vec<f64>, Mat<f64>) {
    assert_finite_r(m);
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigendecomposition failed to converge");
    let s = e.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i]).collect();
    (values, e.U().to_owned())
}

/// Thin SVD `m = U diag(s) V^H`, singular values descending.
pub(crate) fn svd_complex(m: MatRef<'_, c64>) -> (Mat<c64>, Vec<f64>, Mat<c64>) {
    assert_finite_c(m);
    let svd = m.thin_svd().expect("SVD failed to converge");
    let s = svd.S().column_vector();
    let k = m.nrows().min(m.ncols());
    let values = (0..k).map(|i| s[i].re).collect();
    (svd.U().to_owned(), values, svd.V().to_owned())
}

/// `U V^H` from the thin SVD of `m`: the closest matrix with orthonormal columns.
pub(crate) fn polar_isometry(m: MatRef<'_, c64>) -> Mat<c64> {
    let (u, _, v) = svd_complex(m);
    &u * v.adjoint()
}

pub(crate) fn max_abs_c(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

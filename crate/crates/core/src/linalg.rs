//! Dense symmetric eigendecomposition with a residual check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigendecomposition of a real symmetric matrix.
///
/// nalgebra's default tolerance can return inaccurate eigenvectors for some
/// matrices with degenerate spectra, so the result is checked against
/// ‖AV − VΛ‖ and recomputed by cyclic Jacobi rotations if needed.
pub fn symmetric_eigen(a: DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let n = a.nrows();
    let scale = a.norm().max(1e-300);
    if let Some(e) = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0) {
        if residual(&a, &e.eigenvectors, &e.eigenvalues) <= 1e-10 * scale * (n as f64).sqrt().max(1.0) {
            return e;
        }
    }
    let (values, vectors) = jacobi(a);
    SymmetricEigen { eigenvectors: vectors, eigenvalues: values }
}

fn residual(a: &DMatrix<f64>, v: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    (a * v - v * DMatrix::from_diagonal(w)).norm()
}

fn jacobi(mut a: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off.sqrt() <= 1e-15 * a.norm() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

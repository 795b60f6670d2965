//! Dense Cholesky factorization for the small covariance matrices used here.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric matrix. Fails at the first
/// non-positive pivot, naming its index.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Domain(format!(
            "matrix is {}x{}, not square",
            n,
            a.ncols()
        )));
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite(format!(
                "Cholesky pivot {j} is {pivot:e} (leading {}x{} minor not positive)",
                j + 1,
                j + 1
            )));
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L y = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &DMatrix<f64>, b: &mut [f64]) {
    for i in 0..b.len() {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// `ln det A` from the Cholesky factor of `A`.
pub fn log_det(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `A^{-1}` from the Cholesky factor of `A`.
pub fn inverse_from_cholesky(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    let mut linv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        forward_substitute(l, &mut e);
        for i in 0..n {
            linv[(i, j)] = e[i];
        }
    }
    // A^{-1} = L^{-T} L^{-1}
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i.max(j)..n).map(|k| linv[(k, i)] * linv[(k, j)]).sum();
            inv[(i, j)] = s;
            inv[(j, i)] = s;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0]);
        let l = cholesky(&a).unwrap();
        assert!((&l * l.transpose() - &a).abs().max() < 1e-14);
        let inv = inverse_from_cholesky(&l);
        assert!((&inv * &a - DMatrix::identity(3, 3)).abs().max() < 1e-14);
        assert!((log_det(&l) - a.determinant().ln()).abs() < 1e-13);
    }

    #[test]
    fn names_failing_pivot() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        match cholesky(&a) {
            Err(Error::NotPositiveDefinite(msg)) => assert!(msg.contains("pivot 1"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}

//! Least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    pub stderr: DVector<f64>,
    pub residuals: DVector<f64>,
    /// Residual variance with `n - k` degrees of freedom.
    pub sigma2: f64,
}

/// Ordinary least squares of `y` on the columns of `x`. Returns `None` if
/// `x` is rank deficient or has no residual degrees of freedom.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<OlsFit> {
    let (n, k) = x.shape();
    if n <= k || k == 0 {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * scale) {
        return None;
    }
    let qty = qr.q().transpose() * y;
    let beta = r.solve_upper_triangular(&qty)?;
    let residuals = y - x * &beta;
    let sigma2 = residuals.norm_squared() / (n - k) as f64;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    let stderr = DVector::from_iterator(
        k,
        (0..k).map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt()),
    );
    Some(OlsFit {
        beta,
        stderr,
        residuals,
        sigma2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let fit = ols(&x, &y).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-12);
        assert!((fit.beta[1] - 2.0).abs() < 1e-12);
        assert!(fit.sigma2 < 1e-20);
    }

    #[test]
    fn rank_deficient() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(ols(&x, &DVector::from_vec(vec![1.0, 2.0, 3.0])).is_none());
    }
}

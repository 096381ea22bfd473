//! Unit-root and portmanteau tests, sample autocorrelation, and BIC.

mod acf;
pub mod adf;
pub mod chi2;
mod ljung_box;

pub use acf::sample_autocorrelation;
pub use adf::{adf_test, AdfLags, AdfResult, CriticalValues};
pub use ljung_box::{ljung_box, LjungBoxResult};

/// Bayesian information criterion with `p + q + 1` parameters.
pub fn bic(loglik: f64, n: usize, p: usize, q: usize) -> f64 {
    -2.0 * loglik + (p + q + 1) as f64 * (n as f64).ln()
}

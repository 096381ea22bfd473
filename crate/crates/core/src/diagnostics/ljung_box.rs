use serde::{Deserialize, Serialize};

use super::acf::sample_autocorrelation;
use super::chi2::{chi2_cdf, chi2_quantile};
use crate::error::DiagnosticsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub lag: usize,
    pub statistic: f64,
    pub dof: usize,
    pub critical_value_5pct: f64,
    pub p_value: f64,
    pub reject_white: bool,
}

/// Ljung-Box portmanteau test of residual autocorrelation up to `lag`.
/// Degrees of freedom are `lag - fitted_params`.
pub fn ljung_box(residuals: &[f64], lag: usize, fitted_params: usize) -> Result<LjungBoxResult, DiagnosticsError> {
    if lag <= fitted_params {
        return Err(DiagnosticsError::NonPositiveDof {
            lag,
            fitted: fitted_params,
        });
    }
    let n = residuals.len();
    let rho = sample_autocorrelation(residuals, lag)?;
    let nf = n as f64;
    let statistic = nf
        * (nf + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    let dof = lag - fitted_params;
    let critical = chi2_quantile(0.95, dof as f64);
    Ok(LjungBoxResult {
        lag,
        statistic,
        dof,
        critical_value_5pct: critical,
        p_value: 1.0 - chi2_cdf(statistic, dof as f64),
        reject_white: statistic > critical,
    })
}

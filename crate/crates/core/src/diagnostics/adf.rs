//! Augmented Dickey-Fuller unit-root test, constant and no trend.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::DiagnosticsError;
use crate::linalg::ols;

/// Minimum number of observations beyond the augmentation lag count.
pub const MIN_OBS_BEYOND_LAGS: usize = 20;

/// |t| above which the last augmentation lag is kept during backward
/// elimination (two-sided 10% normal quantile).
const LAG_RETENTION_T: f64 = 1.645;

/// Response-surface coefficients for the constant-only case
/// (`b0 + b1/T + b2/T^2 + b3/T^3`) at the 1%, 5% and 10% levels.
const CRITICAL_SURFACE: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfLags {
    /// Exactly this many lagged differences.
    Fixed(usize),
    /// Schwert upper bound `floor(12 (n/100)^(1/4))`, then backward
    /// elimination of insignificant trailing lags.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub one_pct: f64,
    pub five_pct: f64,
    pub ten_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags_used: usize,
    /// Observations in the test regression.
    pub n_obs: usize,
    pub critical_values: CriticalValues,
    pub critical_value_5pct: f64,
    pub reject_unit_root: bool,
}

/// Critical values for a regression with `n_obs` observations.
pub fn critical_values(n_obs: usize) -> CriticalValues {
    let inv = 1.0 / n_obs as f64;
    let eval = |c: &[f64; 4]| c[0] + inv * (c[1] + inv * (c[2] + inv * c[3]));
    CriticalValues {
        one_pct: eval(&CRITICAL_SURFACE[0]),
        five_pct: eval(&CRITICAL_SURFACE[1]),
        ten_pct: eval(&CRITICAL_SURFACE[2]),
    }
}

/// Schwert's rule of thumb for the largest augmentation lag.
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

struct Regression {
    t_gamma: f64,
    t_last_lag: Option<f64>,
    n_obs: usize,
}

/// Regresses `dx_t` on `[1, x_{t-1}, dx_{t-1}, ..., dx_{t-k}]` for every
/// `t >= first` (indices into the difference series, `dx_t = x_t - x_{t-1}`).
fn regress(x: &[f64], k: usize, first: usize) -> Result<Regression, DiagnosticsError> {
    let n = x.len();
    let rows = n - first;
    let cols = 2 + k;
    let design = DMatrix::from_fn(rows, cols, |i, j| {
        let t = first + i;
        match j {
            0 => 1.0,
            1 => x[t - 1],
            _ => x[t - (j - 1)] - x[t - j],
        }
    });
    let target = DVector::from_iterator(rows, (first..n).map(|t| x[t] - x[t - 1]));
    let fit = ols(&design, &target).ok_or(DiagnosticsError::Singular)?;
    if !(fit.stderr[1] > 0.0) {
        return Err(DiagnosticsError::Singular);
    }
    Ok(Regression {
        t_gamma: fit.beta[1] / fit.stderr[1],
        t_last_lag: (k > 0).then(|| fit.beta[cols - 1] / fit.stderr[cols - 1]),
        n_obs: rows,
    })
}

pub fn adf_test(x: &[f64], lags: AdfLags) -> Result<AdfResult, DiagnosticsError> {
    let n = x.len();
    let k = match lags {
        AdfLags::Fixed(k) => {
            if n < MIN_OBS_BEYOND_LAGS + k {
                return Err(DiagnosticsError::TooShort {
                    needed: MIN_OBS_BEYOND_LAGS + k,
                    found: n,
                });
            }
            k
        }
        AdfLags::Auto => {
            if n < MIN_OBS_BEYOND_LAGS {
                return Err(DiagnosticsError::TooShort {
                    needed: MIN_OBS_BEYOND_LAGS,
                    found: n,
                });
            }
            let max_lag = schwert_max_lag(n).min(n - MIN_OBS_BEYOND_LAGS);
            select_lag(x, max_lag)?
        }
    };
    let reg = regress(x, k, k + 1)?;
    let cv = critical_values(reg.n_obs);
    Ok(AdfResult {
        statistic: reg.t_gamma,
        lags_used: k,
        n_obs: reg.n_obs,
        critical_values: cv,
        critical_value_5pct: cv.five_pct,
        reject_unit_root: reg.t_gamma < cv.five_pct,
    })
}

/// Backward elimination on the common sample that the largest lag allows.
fn select_lag(x: &[f64], max_lag: usize) -> Result<usize, DiagnosticsError> {
    for k in (1..=max_lag).rev() {
        let reg = regress(x, k, max_lag + 1)?;
        if reg.t_last_lag.is_some_and(|t| t.abs() > LAG_RETENTION_T) {
            return Ok(k);
        }
    }
    Ok(0)
}

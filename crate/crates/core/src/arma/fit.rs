//! Maximum-likelihood fitting.
//!
//! The mean and innovation variance are profiled out of the exact
//! likelihood, leaving an unconstrained problem over the partial
//! autocorrelations (in `atanh` coordinates). Nelder-Mead runs from a
//! Hannan-Rissanen warm start and from `restarts` uniform draws in the cube;
//! the best of these is then refined at full tolerance.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::kalman::{profile, Ssm};
use super::transform::{coefficients_to_pacf, unconstrained_to_coefficients};
use super::{ArmaModel, Residuals};
use crate::error::ArmaError;
use crate::linalg::ols;
use crate::optim::{nelder_mead, Minimum, NelderMeadOptions};
use crate::rng::substream;

/// Partial autocorrelations of start points stay inside this bound.
const START_PACF_LIMIT: f64 = 0.95;
const EXPLORE_F_TOL: f64 = 1e-5;
const EXPLORE_X_TOL: f64 = 1e-4;
const POLISH_STEP: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Random starts in addition to the least-squares warm start.
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: NelderMeadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 3,
            seed: 0,
            optimizer: NelderMeadOptions::default(),
        }
    }
}

/// Fits ARMA(p,q) with the default options.
pub fn fit(series: &[f64], p: usize, q: usize) -> Result<(ArmaModel, Residuals), ArmaError> {
    fit_with(series, p, q, &FitOptions::default())
}

pub fn fit_with(
    series: &[f64],
    p: usize,
    q: usize,
    opts: &FitOptions,
) -> Result<(ArmaModel, Residuals), ArmaError> {
    let n = series.len();
    if n <= p + q + 1 {
        return Err(ArmaError::TooShort { len: n, p, q });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ArmaError::NonFinite);
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return Err(ArmaError::ConstantSeries);
    }

    let offset = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - offset).collect();
    let ones = vec![1.0; n];
    let objective = |u: &[f64]| {
        let (phi, theta) = unconstrained_to_coefficients(u, p);
        profile(&Ssm::new(&phi, &theta), &centered, offset, &ones)
            .map(|pr| -pr.loglik)
            .unwrap_or(f64::INFINITY)
    };

    let mut starts = vec![warm_start(&centered, p, q)];
    for i in 0..opts.restarts {
        let mut rng = substream(opts.seed, 1 + i as u64);
        starts.push(
            (0..p + q)
                .map(|_| rng.random_range(-START_PACF_LIMIT..START_PACF_LIMIT).atanh())
                .collect(),
        );
    }

    // every start is explored at a loose tolerance; only the winner is
    // refined, which keeps the cost of extra starts low
    let explore = NelderMeadOptions {
        f_tol: opts.optimizer.f_tol.max(EXPLORE_F_TOL),
        x_tol: opts.optimizer.x_tol.max(EXPLORE_X_TOL),
        ..opts.optimizer
    };
    let mut best: Option<Minimum> = None;
    for start in &starts {
        let found = nelder_mead(objective, start, &explore);
        if best.as_ref().map_or(true, |b| found.value < b.value) {
            best = Some(found);
        }
    }
    let best = best.map(|b| {
        let refine = NelderMeadOptions {
            initial_step: POLISH_STEP,
            ..opts.optimizer
        };
        let polished = nelder_mead(objective, &b.x, &refine);
        // and once more from the refined point against a collapsed simplex
        let again = nelder_mead(objective, &polished.x, &refine);
        [b, polished, again]
            .into_iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .unwrap()
    });
    let best = best
        .filter(|b| b.value.is_finite())
        .ok_or(ArmaError::OptimizerFailed {
            p,
            q,
            restarts: starts.len(),
        })?;

    let (phi, theta) = unconstrained_to_coefficients(&best.x, p);
    let prof = profile(&Ssm::new(&phi, &theta), &centered, offset, &ones)?;
    let model = ArmaModel::new(phi, theta, prof.mean, prof.sigma2)?.with_fit_metadata(prof.loglik, n);
    let residuals = innovations(&model, series);
    Ok((model, Residuals(residuals)))
}

/// Innovations `e_t = x_t - forecast_t` by the model recursion, with values
/// before the start of the series taken at the mean and zero innovation.
pub fn innovations(model: &ArmaModel, series: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(series.len());
    for t in 0..series.len() {
        let f = model.predict(&series[..t], &e[..t]);
        e.push(series[t] - f);
    }
    e
}

/// Hannan-Rissanen: a long autoregression supplies innovation estimates,
/// then one regression on lagged values and lagged innovations gives
/// (phi, theta). Falls back to zero partial autocorrelations on either side
/// when the estimate is unusable.
fn warm_start(y: &[f64], p: usize, q: usize) -> Vec<f64> {
    let n = y.len();
    let mut start = vec![0.0; p + q];
    if p + q == 0 {
        return start;
    }

    // long autoregression order; unused for pure AR
    let m = ((10.0 * (n as f64).log10()).ceil() as usize)
        .max(p + q + 1)
        .min(n / 4);
    let (innov, first) = if q == 0 {
        (vec![0.0; n], p)
    } else {
        if m == 0 {
            return start;
        }
        let Some((_, resid)) = regress_lags(y, m, &[], 0, m) else {
            return start;
        };
        let mut e = vec![0.0; m];
        e.extend(resid);
        (e, m + q)
    };
    let Some((beta, _)) = regress_lags(y, p, &innov, q, first) else {
        return start;
    };

    let phi = &beta[..p];
    let neg_theta: Vec<f64> = beta[p..].iter().map(|t| -t).collect();
    let to_start = |coef: &[f64]| {
        coefficients_to_pacf(coef).map(|pacf| {
            pacf.into_iter()
                .map(|r| r.clamp(-START_PACF_LIMIT, START_PACF_LIMIT).atanh())
                .collect::<Vec<_>>()
        })
    };
    if let Some(u) = to_start(phi) {
        start[..p].copy_from_slice(&u);
    }
    if let Some(u) = to_start(&neg_theta) {
        start[p..].copy_from_slice(&u);
    }
    start
}

/// Regresses `y_t` on `y_{t-1..t-p}` and `e_{t-1..t-q}` for `t >= first`.
fn regress_lags(y: &[f64], p: usize, e: &[f64], q: usize, first: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    let k = p + q;
    if first >= n || n - first <= k + 1 {
        return None;
    }
    let rows = n - first;
    let x = DMatrix::from_fn(rows, k, |i, j| {
        let t = first + i;
        if j < p {
            y[t - 1 - j]
        } else {
            e[t - 1 - (j - p)]
        }
    });
    let target = DVector::from_iterator(rows, y[first..].iter().copied());
    let fit = ols(&x, &target)?;
    Some((fit.beta.iter().copied().collect(), fit.residuals.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arma::{forecast_one_step, simulate, ArmaModel};

    fn ar1_sample(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let m = ArmaModel::new(vec![phi], vec![], 0.0, 1.0).unwrap();
        simulate(&m, n, &[0.0], &[], seed).unwrap()
    }

    #[test]
    fn rejects_degenerate_input() {
        assert_eq!(fit(&[5.0; 50], 1, 0).unwrap_err(), ArmaError::ConstantSeries);
        assert!(matches!(fit(&[1.0, 2.0, 3.0], 1, 1), Err(ArmaError::TooShort { .. })));
        assert_eq!(fit(&[1.0, f64::NAN, 2.0, 3.0, 4.0], 0, 0).unwrap_err(), ArmaError::NonFinite);
    }

    #[test]
    fn white_noise_fit_is_sample_moments() {
        let x = [2.0, 4.0, 3.0, 7.0, 5.0, 1.0];
        let (m, r) = fit(&x, 0, 0).unwrap();
        let mean = x.iter().sum::<f64>() / 6.0;
        assert!((m.intercept() - mean).abs() < 1e-12);
        assert!((r.values()[0] - (2.0 - mean)).abs() < 1e-12);
        assert_eq!(m.n_obs(), 6);
    }

    #[test]
    fn recovers_ar1() {
        let x = ar1_sample(0.6, 3000, 11);
        let (m, r) = fit(&x, 1, 0).unwrap();
        assert!((m.phi()[0] - 0.6).abs() < 0.05, "{:?}", m.phi());
        assert!((m.sigma2() - 1.0).abs() < 0.1);
        assert_eq!(r.len(), 3000);
    }

    #[test]
    fn residuals_reproduce_the_series() {
        let base = ArmaModel::new(vec![0.4], vec![0.3], 0.0, 1.0).unwrap();
        let x: Vec<f64> = simulate(&base, 400, &[0.0], &[0.0], 5)
            .unwrap()
            .into_iter()
            .map(|v| v + 50.0)
            .collect();
        let (m, r) = fit(&x, 1, 1).unwrap();
        for t in 1..x.len() {
            let f = forecast_one_step(&m, &x[..t], &r.values()[..t]).unwrap();
            assert!((f + r.values()[t] - x[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let x = ar1_sample(0.3, 300, 2);
        let a = fit(&x, 2, 1).unwrap();
        let b = fit(&x, 2, 1).unwrap();
        assert_eq!(a.0.phi(), b.0.phi());
        assert_eq!(a.0.theta(), b.0.theta());
    }

    #[test]
    fn large_level_is_handled() {
        let x: Vec<f64> = ar1_sample(0.5, 500, 3).into_iter().map(|v| 1000.0 + 20.0 * v).collect();
        let (m, _) = fit(&x, 1, 0).unwrap();
        assert!((m.intercept() - 1000.0).abs() < 10.0);
        assert!((m.sigma2().sqrt() - 20.0).abs() < 2.0);
    }
}

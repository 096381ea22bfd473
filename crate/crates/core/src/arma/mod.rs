//! ARMA(p,q) models with Gaussian innovations.
//!
//! A model describes `y_t = x_t - mu` by
//!
//! ```text
//! y_t = sum_i phi_i y_{t-i} + e_t + sum_j theta_j e_{t-j},   e_t ~ N(0, sigma2)
//! ```
//!
//! where `mu` is stored as [`ArmaModel::intercept`].

mod fit;
pub(crate) mod kalman;
pub mod transform;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::ArmaError;
use crate::json_float;

pub use fit::{fit, fit_with, innovations, FitOptions};
pub use transform::{is_invertible, is_stationary};

/// A stationary, invertible ARMA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct ArmaModel {
    phi: Vec<f64>,
    theta: Vec<f64>,
    intercept: f64,
    sigma2: f64,
    loglik: f64,
    n_obs: usize,
}

impl ArmaModel {
    /// Validates coefficients and variance. `loglik` and `n_obs` are left at
    /// NaN and 0 until the model comes out of a fit.
    pub fn new(phi: Vec<f64>, theta: Vec<f64>, intercept: f64, sigma2: f64) -> Result<Self, ArmaError> {
        if phi.iter().chain(&theta).any(|v| !v.is_finite()) || !intercept.is_finite() {
            return Err(ArmaError::NonFinite);
        }
        if !is_stationary(&phi) {
            return Err(ArmaError::NonStationary);
        }
        if !is_invertible(&theta) {
            return Err(ArmaError::NonInvertible);
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(ArmaError::InvalidVariance(sigma2));
        }
        Ok(Self {
            phi,
            theta,
            intercept,
            sigma2,
            loglik: f64::NAN,
            n_obs: 0,
        })
    }

    pub(crate) fn with_fit_metadata(mut self, loglik: f64, n_obs: usize) -> Self {
        self.loglik = loglik;
        self.n_obs = n_obs;
        self
    }

    /// A copy with the innovation variance set to zero. Simulating it gives
    /// the deterministic forecast path. The result is not a valid likelihood
    /// model and cannot be serialised back through [`ArmaModel::new`].
    pub fn without_noise(&self) -> Self {
        Self {
            sigma2: 0.0,
            ..self.clone()
        }
    }

    pub fn p(&self) -> usize {
        self.phi.len()
    }

    pub fn q(&self) -> usize {
        self.theta.len()
    }

    pub fn order(&self) -> (usize, usize) {
        (self.p(), self.q())
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Maximised log-likelihood; NaN for hand-built models.
    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// Number of estimated parameters counted by the information criterion.
    pub fn n_params(&self) -> usize {
        self.p() + self.q() + 1
    }

    fn predict(&self, history: &[f64], residuals: &[f64]) -> f64 {
        let mu = self.intercept;
        let ar: f64 = self
            .phi
            .iter()
            .zip(history.iter().rev())
            .map(|(phi, x)| phi * (x - mu))
            .sum();
        let ma: f64 = self
            .theta
            .iter()
            .zip(residuals.iter().rev())
            .map(|(theta, e)| theta * e)
            .sum();
        mu + ar + ma
    }
}

/// One-step-ahead innovation estimates aligned with the fitted series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals(pub Vec<f64>);

impl Residuals {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Exact Gaussian log-likelihood of `series` under `model`, using the
/// model's own intercept and innovation variance.
pub fn log_likelihood(model: &ArmaModel, series: &[f64]) -> Result<f64, ArmaError> {
    let needed = model.p().max(model.q()) + 1;
    if series.len() < needed {
        return Err(ArmaError::TooShort {
            len: series.len(),
            p: model.p(),
            q: model.q(),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ArmaError::NonFinite);
    }
    if !is_stationary(&model.phi) {
        return Err(ArmaError::NonStationary);
    }
    if !(model.sigma2 > 0.0) {
        return Err(ArmaError::InvalidVariance(model.sigma2));
    }
    let y: Vec<f64> = series.iter().map(|x| x - model.intercept).collect();
    kalman::loglik_given(&kalman::Ssm::new(&model.phi, &model.theta), &y, model.sigma2)
}

fn check_history(model: &ArmaModel, history: &[f64], residuals: &[f64]) -> Result<(), ArmaError> {
    if history.len() < model.p() {
        return Err(ArmaError::InsufficientHistory {
            needed: model.p(),
            found: history.len(),
        });
    }
    if residuals.len() < model.q() {
        return Err(ArmaError::InsufficientHistory {
            needed: model.q(),
            found: residuals.len(),
        });
    }
    Ok(())
}

/// Conditional mean of the next value given the most recent observations
/// and innovations (both ordered oldest first).
pub fn forecast_one_step(model: &ArmaModel, history: &[f64], residual_history: &[f64]) -> Result<f64, ArmaError> {
    check_history(model, history, residual_history)?;
    Ok(model.predict(history, residual_history))
}

/// Samples one path of `horizon` values from `rng`, continuing the given
/// history.
pub fn simulate_with<R: Rng + ?Sized>(
    model: &ArmaModel,
    horizon: usize,
    history: &[f64],
    residual_history: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>, ArmaError> {
    check_history(model, history, residual_history)?;
    let sd = model.sigma2.sqrt();
    let mut xs = history[history.len() - model.p()..].to_vec();
    let mut es = residual_history[residual_history.len() - model.q()..].to_vec();
    let mut path = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let z: f64 = rng.sample(StandardNormal);
        let e = sd * z;
        let x = model.predict(&xs, &es) + e;
        path.push(x);
        if model.p() > 0 {
            xs.remove(0);
            xs.push(x);
        }
        if model.q() > 0 {
            es.remove(0);
            es.push(e);
        }
    }
    Ok(path)
}

/// Samples one path using the generator seeded by `seed`.
pub fn simulate(
    model: &ArmaModel,
    horizon: usize,
    history: &[f64],
    residual_history: &[f64],
    seed: u64,
) -> Result<Vec<f64>, ArmaError> {
    let mut rng = crate::rng::substream(seed, 0);
    simulate_with(model, horizon, history, residual_history, &mut rng)
}

/// Serialised form; floats are written with 17 significant digits.
#[derive(Serialize, Deserialize)]
struct RawModel {
    p: usize,
    q: usize,
    #[serde(with = "json_float::vec")]
    phi: Vec<f64>,
    #[serde(with = "json_float::vec")]
    theta: Vec<f64>,
    #[serde(with = "json_float")]
    intercept: f64,
    #[serde(with = "json_float")]
    sigma2: f64,
    #[serde(with = "json_float::nullable")]
    loglik: f64,
    n_obs: usize,
}

impl From<ArmaModel> for RawModel {
    fn from(m: ArmaModel) -> Self {
        Self {
            p: m.p(),
            q: m.q(),
            phi: m.phi,
            theta: m.theta,
            intercept: m.intercept,
            sigma2: m.sigma2,
            loglik: m.loglik,
            n_obs: m.n_obs,
        }
    }
}

impl TryFrom<RawModel> for ArmaModel {
    type Error = ArmaError;

    fn try_from(raw: RawModel) -> Result<Self, ArmaError> {
        if raw.phi.len() != raw.p {
            return Err(ArmaError::CoefficientLength {
                expected: raw.p,
                found: raw.phi.len(),
            });
        }
        if raw.theta.len() != raw.q {
            return Err(ArmaError::CoefficientLength {
                expected: raw.q,
                found: raw.theta.len(),
            });
        }
        Ok(ArmaModel::new(raw.phi, raw.theta, raw.intercept, raw.sigma2)?
            .with_fit_metadata(raw.loglik, raw.n_obs))
    }
}

//! Hour-by-hour ARMA forecasting for photovoltaic power.
//!
//! The pipeline splits an hourly power series into one series per hour of
//! day, checks each for a unit root, selects an ARMA(p,q) order by BIC over a
//! small grid, validates the residuals with Ljung-Box tests, and then
//! forecasts or samples day-ahead scenarios from the per-hour models. Hours
//! without any recorded output are treated as night and forced to zero.

pub mod arma;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod json_float;
pub mod linalg;
pub mod optim;
pub mod rng;
pub mod scenario;
pub mod series;
pub mod selector;

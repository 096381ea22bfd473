//! Per-hour model selection: unit-root check, grid of ARMA fits, BIC argmin
//! and residual whiteness tests.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::arma::{fit_with, forecast_one_step, ArmaModel, FitOptions};
use crate::diagnostics::{adf_test, bic, ljung_box, AdfLags, AdfResult, LjungBoxResult};
use crate::error::{ArmaError, SelectionError};
use crate::json_float;
use crate::rng::derive_seed;
use crate::series::{slice_by_hour, HourSlice, NightMask, SolarSeries};

pub const DEFAULT_LJUNG_BOX_LAGS: [usize; 3] = [5, 10, 15];

/// Inclusive ranges of candidate AR and MA orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderGrid {
    p_min: usize,
    p_max: usize,
    q_min: usize,
    q_max: usize,
}

impl OrderGrid {
    pub fn new(p: RangeInclusive<usize>, q: RangeInclusive<usize>) -> Result<Self, SelectionError> {
        if p.is_empty() || q.is_empty() {
            return Err(SelectionError::EmptyGrid);
        }
        Ok(Self {
            p_min: *p.start(),
            p_max: *p.end(),
            q_min: *q.start(),
            q_max: *q.end(),
        })
    }

    /// `1..=max` for both orders.
    pub fn up_to(max: usize) -> Result<Self, SelectionError> {
        Self::new(1..=max, 1..=max)
    }

    pub fn p_range(&self) -> RangeInclusive<usize> {
        self.p_min..=self.p_max
    }

    pub fn q_range(&self) -> RangeInclusive<usize> {
        self.q_min..=self.q_max
    }

    pub fn contains(&self, p: usize, q: usize) -> bool {
        self.p_range().contains(&p) && self.q_range().contains(&q)
    }

    /// Candidates in row-major (p, then q) order.
    pub fn candidates(&self) -> Vec<(usize, usize)> {
        self.p_range()
            .flat_map(|p| self.q_range().map(move |q| (p, q)))
            .collect()
    }

    pub fn max_order_sum(&self) -> usize {
        self.p_max + self.q_max
    }
}

impl Default for OrderGrid {
    fn default() -> Self {
        Self::up_to(4).expect("nonempty")
    }
}

/// Result of a diagnostic that may not have been computable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check<T> {
    Ok(T),
    Failed { reason: String },
}

impl<T> Check<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Check::Ok(v) => Some(v),
            Check::Failed { .. } => None,
        }
    }
}

impl<T, E: std::fmt::Display> From<Result<T, E>> for Check<T> {
    fn from(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Check::Ok(v),
            Err(e) => Check::Failed {
                reason: e.to_string(),
            },
        }
    }
}

/// One cell of the order grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub p: usize,
    pub q: usize,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none", default, with = "json_float::option")]
    pub loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default, with = "json_float::option")]
    pub bic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub p: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxCheck {
    pub lag: usize,
    pub result: Check<LjungBoxResult>,
}

/// Trailing observations and innovations needed to forecast the next value.
/// Values are ordered oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningState {
    pub history: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ConditioningState {
    /// Tail of a fitted series and its innovations.
    pub fn from_fit(model: &ArmaModel, series: &[f64], residuals: &[f64]) -> Self {
        Self {
            history: series[series.len().saturating_sub(model.p())..].to_vec(),
            residuals: residuals[residuals.len().saturating_sub(model.q())..].to_vec(),
        }
    }

    pub fn forecast(&self, model: &ArmaModel) -> Result<f64, ArmaError> {
        forecast_one_step(model, &self.history, &self.residuals)
    }

    /// Feeds one new observation through the model recursion with frozen
    /// parameters; returns the forecast that preceded it.
    pub fn advance(&mut self, model: &ArmaModel, value: f64) -> Result<f64, ArmaError> {
        let f = self.forecast(model)?;
        push_bounded(&mut self.history, value, model.p());
        push_bounded(&mut self.residuals, value - f, model.q());
        Ok(f)
    }
}

fn push_bounded(buf: &mut Vec<f64>, value: f64, cap: usize) {
    if cap == 0 {
        buf.clear();
        return;
    }
    buf.push(value);
    if buf.len() > cap {
        buf.drain(..buf.len() - cap);
    }
}

/// Everything the selection procedure learns about one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub n_obs: usize,
    pub adf: Check<AdfResult>,
    /// Set when the unit-root null was not rejected or the test failed.
    pub possibly_nonstationary: bool,
    pub grid: Vec<GridEntry>,
    pub chosen: Order,
    pub model: ArmaModel,
    pub ljung_box: Vec<LjungBoxCheck>,
    pub state: ConditioningState,
}

impl Selection {
    /// True when every Ljung-Box lag was computed and none rejected.
    pub fn residuals_white(&self) -> bool {
        self.ljung_box
            .iter()
            .all(|c| c.result.ok().is_some_and(|r| !r.reject_white))
    }
}

/// Per-hour selection outcome, as stored in `models.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub hour: u8,
    #[serde(flatten)]
    pub selection: Selection,
}

impl std::ops::Deref for FitReport {
    type Target = Selection;

    fn deref(&self) -> &Selection {
        &self.selection
    }
}

#[derive(Debug, Clone)]
pub struct SelectOptions {
    pub grid: OrderGrid,
    pub ljung_box_lags: Vec<usize>,
    pub adf_lags: AdfLags,
    /// Restart count and optimizer settings; the seed is replaced per cell.
    pub fit: FitOptions,
    pub seed: u64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            grid: OrderGrid::default(),
            ljung_box_lags: DEFAULT_LJUNG_BOX_LAGS.to_vec(),
            adf_lags: AdfLags::Auto,
            fit: FitOptions::default(),
            seed: 0,
        }
    }
}

impl SelectOptions {
    pub fn with_grid(grid: OrderGrid) -> Self {
        Self {
            grid,
            ..Self::default()
        }
    }
}

/// Orders candidates by BIC, then by p + q, then by p.
fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    a.0.total_cmp(&b.0)
        .then((a.1 + a.2).cmp(&(b.1 + b.2)))
        .then(a.1.cmp(&b.1))
        .is_lt()
}

/// Runs the full procedure on an arbitrary series. `key` separates the
/// random streams of different series sharing one master seed.
pub fn select_series(values: &[f64], key: u64, opts: &SelectOptions) -> Result<Selection, SelectionError> {
    let adf: Check<AdfResult> = adf_test(values, opts.adf_lags).into();
    let possibly_nonstationary = adf.ok().map_or(true, |r| !r.reject_unit_root);

    let mut grid = Vec::new();
    let mut best: Option<(f64, ArmaModel, Vec<f64>)> = None;
    for (p, q) in opts.grid.candidates() {
        let fit_opts = FitOptions {
            seed: derive_seed(opts.seed, &[key, p as u64, q as u64]),
            ..opts.fit.clone()
        };
        match fit_with(values, p, q, &fit_opts) {
            Ok((model, residuals)) => {
                let score = bic(model.loglik(), model.n_obs(), p, q);
                grid.push(GridEntry {
                    p,
                    q,
                    success: true,
                    loglik: Some(model.loglik()),
                    bic: Some(score),
                    error: None,
                });
                let wins = best
                    .as_ref()
                    .map_or(true, |(b, m, _)| better((score, p, q), (*b, m.p(), m.q())));
                if wins {
                    best = Some((score, model, residuals.0));
                }
            }
            Err(e) => grid.push(GridEntry {
                p,
                q,
                success: false,
                loglik: None,
                bic: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let Some((_, model, residuals)) = best else {
        return Err(SelectionError::AllFitsFailed { hour: key as u8 });
    };

    let fitted = model.p() + model.q();
    let ljung_box = opts
        .ljung_box_lags
        .iter()
        .map(|&lag| LjungBoxCheck {
            lag,
            result: ljung_box(&residuals, lag, fitted).into(),
        })
        .collect();
    let state = ConditioningState::from_fit(&model, values, &residuals);
    Ok(Selection {
        n_obs: values.len(),
        adf,
        possibly_nonstationary,
        grid,
        chosen: Order {
            p: model.p(),
            q: model.q(),
        },
        model,
        ljung_box,
        state,
    })
}

/// Selects a model for one hour-of-day slice with default options.
pub fn select_model(slice: &HourSlice, grid: &OrderGrid) -> Result<FitReport, SelectionError> {
    select_model_with(slice, &SelectOptions::with_grid(grid.clone()))
}

pub fn select_model_with(slice: &HourSlice, opts: &SelectOptions) -> Result<FitReport, SelectionError> {
    if slice.is_empty() {
        return Err(SelectionError::EmptySlice { hour: slice.hour });
    }
    let selection = select_series(&slice.values, u64::from(slice.hour), opts).map_err(|e| match e {
        SelectionError::AllFitsFailed { .. } => SelectionError::AllFitsFailed { hour: slice.hour },
        other => other,
    })?;
    Ok(FitReport {
        hour: slice.hour,
        selection,
    })
}

/// Outcome for one modeled hour; failures are isolated to their hour.
#[derive(Debug, Clone)]
pub struct HourFit {
    pub hour: u8,
    pub outcome: Result<FitReport, SelectionError>,
}

/// Selects a model for every modeled hour, in hour order.
pub fn fit_all_hours(series: &SolarSeries, mask: &NightMask, opts: &SelectOptions) -> Vec<HourFit> {
    mask.modeled_hours()
        .into_iter()
        .map(|hour| {
            let outcome = slice_by_hour(series, hour)
                .map_err(|_| SelectionError::EmptySlice { hour })
                .and_then(|slice| select_model_with(&slice, opts));
            HourFit { hour, outcome }
        })
        .collect()
}

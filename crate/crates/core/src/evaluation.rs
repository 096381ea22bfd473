//! Accuracy metrics and the baseline comparison.
//!
//! All methods are scored on the same points: every observed record in the
//! test window, night hours included. Forecasts are one step ahead with
//! parameters frozen at the end of training; the conditioning state moves
//! forward through the observed test values.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::arma::ArmaModel;
use crate::error::{EvalError, SeriesError};
use crate::json_float;
use crate::selector::{fit_all_hours, select_series, ConditioningState, FitReport, SelectOptions, Selection};
use crate::series::{NightMask, SolarSeries};

/// Stream key used for the whole-series model; hours use 0..=23.
pub const SINGLE_SERIES_KEY: u64 = 24;

pub const DEFAULT_PERSISTENCE_WINDOW: usize = 2;

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<(), EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_pair(actual, predicted)?;
    let sum: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(sum / actual.len() as f64)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_pair(actual, predicted)?;
    let sum: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok((sum / actual.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(with = "json_float")]
    pub mae: f64,
    #[serde(with = "json_float")]
    pub rmse: f64,
    /// Percent of the largest actual value; absent when that is not positive.
    #[serde(with = "json_float::option")]
    pub mae_pct_of_max: Option<f64>,
    #[serde(with = "json_float::option")]
    pub rmse_pct_of_max: Option<f64>,
    pub n_points: usize,
}

impl MetricReport {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self, EvalError> {
        let mae = mae(actual, predicted)?;
        let rmse = rmse(actual, predicted)?;
        let max = actual.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pct = |v: f64| (max > 0.0).then(|| 100.0 * v / max);
        Ok(Self {
            mae,
            rmse,
            mae_pct_of_max: pct(mae),
            rmse_pct_of_max: pct(rmse),
            n_points: actual.len(),
        })
    }
}

/// One evaluated point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointForecast {
    pub timestamp: NaiveDateTime,
    pub hour: u8,
    pub actual: f64,
    pub predicted: f64,
    /// Set when a baseline had to use its boundary fallback here.
    pub fallback: bool,
}

fn metrics_of(points: &[PointForecast]) -> Result<MetricReport, EvalError> {
    let actual: Vec<f64> = points.iter().map(|p| p.actual).collect();
    let predicted: Vec<f64> = points.iter().map(|p| p.predicted).collect();
    MetricReport::compute(&actual, &predicted).map_err(|e| match e {
        EvalError::Empty => EvalError::EmptyTestWindow,
        other => other,
    })
}

/// Writes `timestamp,actual,predicted`.
pub fn write_predictions_csv<W: Write>(points: &[PointForecast], writer: W) -> Result<(), SeriesError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "actual", "predicted"])?;
    for p in points {
        w.write_record([
            p.timestamp.format("%Y-%m-%dT%H:%M").to_string(),
            p.actual.to_string(),
            p.predicted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Predictions at `t >= h`: the mean of the `h` preceding values.
pub fn smart_persistence(values: &[f64], h: usize) -> Result<Vec<f64>, EvalError> {
    if h == 0 || values.len() <= h {
        return Err(EvalError::InsufficientHistory {
            needed: h.max(1),
            found: values.len().saturating_sub(1),
        });
    }
    Ok(values.windows(h + 1).map(|w| w[..h].iter().sum::<f64>() / h as f64).collect())
}

/// Which observations the persistence window reaches back over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersistenceMode {
    /// The preceding clock hours in the chronological series.
    #[default]
    ClockHours,
    /// The same hour on preceding days.
    SameHourPreviousDays,
}

/// Smart-Persistence over the observed points of `test`, with `train` as
/// the available history.
///
/// In clock-hour mode, a modeled hour whose window holds only night-hour
/// observations (the first daylight hour) is predicted by the most recent
/// nonzero observation instead, and flagged.
pub fn persistence_forecasts(
    train: &SolarSeries,
    test: &SolarSeries,
    mask: &NightMask,
    h: usize,
    mode: PersistenceMode,
) -> Result<Vec<PointForecast>, EvalError> {
    if h == 0 {
        return Err(EvalError::InsufficientHistory { needed: 1, found: 0 });
    }
    let observed = |s: &SolarSeries| {
        s.records()
            .iter()
            .filter_map(|r| r.power.map(|v| (r.timestamp(), r.hour, v)))
            .collect::<Vec<_>>()
    };
    let history = observed(train);
    let targets = observed(test);
    let mut out = Vec::with_capacity(targets.len());

    match mode {
        PersistenceMode::ClockHours => {
            let all: Vec<_> = history.iter().chain(&targets).copied().collect();
            for (i, &(timestamp, hour, actual)) in all.iter().enumerate().skip(history.len()) {
                if i < h {
                    return Err(EvalError::InsufficientHistory { needed: h, found: i });
                }
                let window = &all[i - h..i];
                let boundary = !mask.is_night(hour) && window.iter().all(|w| mask.is_night(w.1));
                let predicted = if boundary {
                    all[..i].iter().rev().map(|w| w.2).find(|&v| v != 0.0).unwrap_or(0.0)
                } else {
                    window.iter().map(|w| w.2).sum::<f64>() / h as f64
                };
                out.push(PointForecast {
                    timestamp,
                    hour,
                    actual,
                    predicted,
                    fallback: boundary,
                });
            }
        }
        PersistenceMode::SameHourPreviousDays => {
            let mut by_hour: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
            for &(_, hour, v) in &history {
                by_hour.entry(hour).or_default().push(v);
            }
            for &(timestamp, hour, actual) in &targets {
                let past = by_hour.entry(hour).or_default();
                if past.len() < h {
                    return Err(EvalError::InsufficientHistory {
                        needed: h,
                        found: past.len(),
                    });
                }
                let predicted = past[past.len() - h..].iter().sum::<f64>() / h as f64;
                out.push(PointForecast {
                    timestamp,
                    hour,
                    actual,
                    predicted,
                    fallback: false,
                });
                past.push(actual);
            }
        }
    }
    Ok(out)
}

/// Feeds one value (or, when missing, the forecast itself) through `state`
/// and returns the forecast made before it.
fn step(state: &mut ConditioningState, model: &ArmaModel, value: Option<f64>) -> Result<f64, EvalError> {
    let f = state.forecast(model)?;
    state.advance(model, value.unwrap_or(f))?;
    Ok(f)
}

/// Rolling one-step forecasts from the per-hour models over `test`.
/// Night hours are predicted as zero. Forecasts are not clamped.
pub fn hourly_forecasts(
    reports: &[FitReport],
    mask: &NightMask,
    test: &SolarSeries,
) -> Result<Vec<PointForecast>, EvalError> {
    let mut states: BTreeMap<u8, (&ArmaModel, ConditioningState)> = BTreeMap::new();
    for r in reports {
        states.insert(r.hour, (&r.model, r.state.clone()));
    }
    let mut out = Vec::new();
    for rec in test.records() {
        let predicted = if mask.is_night(rec.hour) {
            0.0
        } else {
            let (model, state) = states.get_mut(&rec.hour).ok_or(EvalError::MissingModel(rec.hour))?;
            step(state, model, rec.power)?
        };
        if let Some(actual) = rec.power {
            out.push(PointForecast {
                timestamp: rec.timestamp(),
                hour: rec.hour,
                actual,
                predicted,
                fallback: false,
            });
        }
    }
    Ok(out)
}

/// Selects one model for the whole chronological training series, night
/// hours included, by the same grid procedure as the per-hour models.
pub fn fit_single_arma(train: &SolarSeries, opts: &SelectOptions) -> Result<Selection, EvalError> {
    Ok(select_series(&train.observed_values(), SINGLE_SERIES_KEY, opts)?)
}

pub fn single_forecasts(selection: &Selection, test: &SolarSeries) -> Result<Vec<PointForecast>, EvalError> {
    let mut state = selection.state.clone();
    let mut out = Vec::new();
    for rec in test.records() {
        let predicted = step(&mut state, &selection.model, rec.power)?;
        if let Some(actual) = rec.power {
            out.push(PointForecast {
                timestamp: rec.timestamp(),
                hour: rec.hour,
                actual,
                predicted,
                fallback: false,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub name: &'static str,
    pub forecasts: Vec<PointForecast>,
    pub metrics: MetricReport,
}

impl MethodResult {
    fn new(name: &'static str, forecasts: Vec<PointForecast>) -> Result<Self, EvalError> {
        let metrics = metrics_of(&forecasts)?;
        Ok(Self {
            name,
            forecasts,
            metrics,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub select: SelectOptions,
    pub persistence_window: usize,
    pub persistence_mode: PersistenceMode,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            select: SelectOptions::default(),
            persistence_window: DEFAULT_PERSISTENCE_WINDOW,
            persistence_mode: PersistenceMode::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub hourly: MethodResult,
    pub single: MethodResult,
    pub persistence: MethodResult,
    /// Hours whose per-hour selection failed; their points are excluded.
    pub failed_hours: Vec<u8>,
}

impl Comparison {
    pub fn methods(&self) -> [&MethodResult; 3] {
        [&self.hourly, &self.single, &self.persistence]
    }

    pub fn fallback_count(&self) -> usize {
        self.persistence.forecasts.iter().filter(|p| p.fallback).count()
    }

    /// `metric,hourly_arma,single_arma,smart_persistence`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SeriesError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["metric"];
        header.extend(self.methods().iter().map(|m| m.name));
        w.write_record(&header)?;
        type Getter = fn(&MetricReport) -> String;
        let rows: [(&str, Getter); 5] = [
            ("mae", |m| m.mae.to_string()),
            ("rmse", |m| m.rmse.to_string()),
            ("mae_pct_of_max", |m| m.mae_pct_of_max.map_or(String::new(), |v| v.to_string())),
            ("rmse_pct_of_max", |m| m.rmse_pct_of_max.map_or(String::new(), |v| v.to_string())),
            ("n_points", |m| m.n_points.to_string()),
        ];
        for (name, get) in rows {
            let mut rec = vec![name.to_string()];
            rec.extend(self.methods().iter().map(|m| get(&m.metrics)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10}{:>16}{:>16}{:>20}", "", "Hourly ARMA", "Single ARMA", "Smart-Persistence")?;
        let row = |f: &mut fmt::Formatter<'_>, label: &str, get: fn(&MetricReport) -> f64| {
            let m = self.methods();
            writeln!(
                f,
                "{label:<10}{:>16.2}{:>16.2}{:>20.2}",
                get(&m[0].metrics),
                get(&m[1].metrics),
                get(&m[2].metrics)
            )
        };
        row(f, "MAE (MW)", |m| m.mae)?;
        row(f, "RMSE (MW)", |m| m.rmse)?;
        write!(f, "{:<10}{:>16}{:>16}{:>20}", "points", self.hourly.metrics.n_points, self.single.metrics.n_points, self.persistence.metrics.n_points)
    }
}

/// Fits both model families on `train` and scores all three methods on the
/// observed points of `test`.
pub fn compare_models(
    train: &SolarSeries,
    test: &SolarSeries,
    mask: &NightMask,
    opts: &CompareOptions,
) -> Result<Comparison, EvalError> {
    if !test.records().iter().any(|r| r.power.is_some()) {
        return Err(EvalError::EmptyTestWindow);
    }
    let mut reports = Vec::new();
    let mut failed_hours = Vec::new();
    for fit in fit_all_hours(train, mask, &opts.select) {
        match fit.outcome {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::warn!("hour {}: {e}", fit.hour);
                failed_hours.push(fit.hour);
            }
        }
    }
    let single = fit_single_arma(train, &opts.select)?;

    // failed hours are dropped from every method so the points stay identical
    let keep = |points: Vec<PointForecast>| -> Vec<PointForecast> {
        points.into_iter().filter(|p| !failed_hours.contains(&p.hour)).collect()
    };
    let mut hourly_mask = mask.clone();
    if !failed_hours.is_empty() {
        hourly_mask = NightMask::new(mask.zero_hours().chain(failed_hours.iter().copied()))?;
    }
    let hourly = keep(hourly_forecasts(&reports, &hourly_mask, test)?);
    let single_points = keep(single_forecasts(&single, test)?);
    let persistence = keep(persistence_forecasts(
        train,
        test,
        mask,
        opts.persistence_window,
        opts.persistence_mode,
    )?);

    Ok(Comparison {
        hourly: MethodResult::new("hourly_arma", hourly)?,
        single: MethodResult::new("single_arma", single_points)?,
        persistence: MethodResult::new("smart_persistence", persistence)?,
        failed_hours,
    })
}

//! Day-ahead Monte Carlo scenarios from the per-hour models.
//!
//! Each hour is sampled independently from its own model, one step ahead of
//! the conditioning state stored with its fit. Raw draws below zero are
//! counted and truncated; night hours are zero.

use std::collections::BTreeMap;
use std::io::Write;

use crate::arma::simulate_with;
use crate::error::{ScenarioError, SeriesError};
use crate::rng::substream;
use crate::selector::FitReport;
use crate::series::{slice_by_hour, NightMask, SolarSeries, HOURS_PER_DAY};

const H: usize = HOURS_PER_DAY as usize;

/// Threshold for the deep-negative diagnostic counter, in MW.
pub const DEEP_NEGATIVE_MW: f64 = -5.0;

pub const DEFAULT_SCENARIOS: usize = 2000;
pub const DEFAULT_PROBS: [f64; 3] = [0.1, 0.5, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<[f64; H]>,
    raw: Vec<[f64; H]>,
    seed: u64,
    modeled_hours: Vec<u8>,
    truncated_count: usize,
    below_neg5_count: usize,
}

impl ScenarioSet {
    /// Stored (truncated) scenarios, one row per scenario.
    pub fn scenarios(&self) -> &[[f64; H]] {
        &self.scenarios
    }

    /// Draws before truncation; night hours are zero here too.
    pub fn raw_draws(&self) -> &[[f64; H]] {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn modeled_hours(&self) -> &[u8] {
        &self.modeled_hours
    }

    /// Raw draws below zero.
    pub fn truncated_count(&self) -> usize {
        self.truncated_count
    }

    /// Raw draws below -5 MW.
    pub fn below_neg5_count(&self) -> usize {
        self.below_neg5_count
    }

    /// Fractions of modeled-hour raw draws below zero and below -5 MW.
    pub fn negative_rate_report(&self) -> (f64, f64) {
        let total = (self.len() * self.modeled_hours.len()) as f64;
        if total == 0.0 {
            return (0.0, 0.0);
        }
        (
            self.truncated_count as f64 / total,
            self.below_neg5_count as f64 / total,
        )
    }

    pub fn column(&self, hour: u8) -> Vec<f64> {
        self.scenarios.iter().map(|row| row[hour as usize]).collect()
    }

    /// `scenario_id,h00,...,h23`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SeriesError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["scenario_id".to_string()];
        header.extend((0..H).map(|h| format!("h{h:02}")));
        w.write_record(&header)?;
        for (i, row) in self.scenarios.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Generates `n` scenarios. Row `i` draws from substream `i` of `seed`,
/// visiting modeled hours in ascending order.
pub fn generate_scenarios(
    reports: &[FitReport],
    mask: &NightMask,
    n: usize,
    seed: u64,
) -> Result<ScenarioSet, ScenarioError> {
    if n == 0 {
        return Err(ScenarioError::TooFewScenarios { min: 1, found: 0 });
    }
    let by_hour: BTreeMap<u8, &FitReport> = reports.iter().map(|r| (r.hour, r)).collect();
    let modeled = mask.modeled_hours();
    let mut models = Vec::with_capacity(modeled.len());
    for &h in &modeled {
        let report = by_hour.get(&h).ok_or(ScenarioError::MissingModel(h))?;
        models.push((h as usize, *report));
    }

    let mut raw = vec![[0.0; H]; n];
    for (i, row) in raw.iter_mut().enumerate() {
        let mut rng = substream(seed, i as u64);
        for &(h, report) in &models {
            let state = &report.state;
            row[h] = simulate_with(&report.model, 1, &state.history, &state.residuals, &mut rng)?[0];
        }
    }

    let mut truncated_count = 0;
    let mut below_neg5_count = 0;
    let scenarios = raw
        .iter()
        .map(|row| {
            let mut out = [0.0; H];
            for &(h, _) in &models {
                let v = row[h];
                if v < 0.0 {
                    truncated_count += 1;
                }
                if v < DEEP_NEGATIVE_MW {
                    below_neg5_count += 1;
                }
                out[h] = v.max(0.0);
            }
            out
        })
        .collect();

    Ok(ScenarioSet {
        scenarios,
        raw,
        seed,
        modeled_hours: modeled,
        truncated_count,
        below_neg5_count,
    })
}

/// Moves each report's conditioning state forward through the observations
/// of its hour in `series` (parameters unchanged), so scenarios start after
/// the end of `series` rather than the end of training.
pub fn condition_on(reports: &mut [FitReport], series: &SolarSeries) -> Result<(), ScenarioError> {
    for report in reports.iter_mut() {
        let slice = slice_by_hour(series, report.hour).map_err(|_| ScenarioError::MissingModel(report.hour))?;
        let model = report.selection.model.clone();
        for &v in &slice.values {
            report.selection.state.advance(&model, v)?;
        }
    }
    Ok(())
}

/// Linear interpolation between order statistics: with sorted
/// `x_1..x_n` the quantile sits at position `(n - 1) p + 1`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = (n - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBands {
    probs: Vec<f64>,
    /// `values[k][h]` is quantile `probs[k]` at hour `h`.
    values: Vec<[f64; H]>,
}

impl QuantileBands {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Per-hour values for probability `p`, if it was requested.
    pub fn get(&self, p: f64) -> Option<&[f64; H]> {
        self.probs.iter().position(|&q| q == p).map(|k| &self.values[k])
    }

    pub fn median(&self) -> Option<&[f64; H]> {
        self.get(0.5)
    }

    pub fn q10(&self) -> Option<&[f64; H]> {
        self.get(0.1)
    }

    pub fn q90(&self) -> Option<&[f64; H]> {
        self.get(0.9)
    }

    fn column_name(p: f64) -> String {
        if p == 0.5 {
            "median".into()
        } else {
            // rounded so that e.g. 0.07 prints as q7
            format!("q{}", (p * 1e8).round() / 1e6)
        }
    }

    /// `hour,<one column per probability>`; for the default probabilities
    /// the header is `hour,q10,median,q90`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SeriesError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["hour".to_string()];
        header.extend(self.probs.iter().map(|&p| Self::column_name(p)));
        w.write_record(&header)?;
        for h in 0..H {
            let mut rec = vec![h.to_string()];
            rec.extend(self.values.iter().map(|v| v[h].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-hour empirical quantiles of the stored scenarios. The output keeps
/// the probabilities sorted ascending.
pub fn quantile_bands(set: &ScenarioSet, probs: &[f64]) -> Result<QuantileBands, ScenarioError> {
    if set.is_empty() {
        return Err(ScenarioError::TooFewScenarios { min: 1, found: 0 });
    }
    if let Some(&p) = probs.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(ScenarioError::InvalidProbability(p));
    }
    let mut probs = probs.to_vec();
    probs.sort_by(f64::total_cmp);
    probs.dedup();
    let mut values = vec![[0.0; H]; probs.len()];
    for h in 0..H {
        let mut col = set.column(h as u8);
        col.sort_by(f64::total_cmp);
        for (k, &p) in probs.iter().enumerate() {
            values[k][h] = quantile_sorted(&col, p);
        }
    }
    Ok(QuantileBands { probs, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_rule() {
        assert_eq!(quantile_sorted(&[0.0, 10.0], 0.5), 5.0);
        let col: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile_sorted(&col, 0.1) - 10.9).abs() < 1e-12);
        assert_eq!(quantile_sorted(&[3.0], 0.9), 3.0);
        assert_eq!(quantile_sorted(&[0.0; 5], 0.1), 0.0);
    }

    #[test]
    fn column_names() {
        assert_eq!(QuantileBands::column_name(0.1), "q10");
        assert_eq!(QuantileBands::column_name(0.5), "median");
        assert_eq!(QuantileBands::column_name(0.9), "q90");
        assert_eq!(QuantileBands::column_name(0.25), "q25");
        assert_eq!(QuantileBands::column_name(0.07), "q7");
    }

    #[test]
    fn zero_scenarios_rejected() {
        let err = generate_scenarios(&[], &NightMask::empty(), 0, 1).unwrap_err();
        assert!(matches!(err, ScenarioError::TooFewScenarios { .. }));
    }

    #[test]
    fn missing_model_is_reported() {
        let mask = NightMask::new((0..24).filter(|&h| h != 12)).unwrap();
        let err = generate_scenarios(&[], &mask, 3, 1).unwrap_err();
        assert!(matches!(err, ScenarioError::MissingModel(12)));
    }
}

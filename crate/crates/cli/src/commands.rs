use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use pvarma::error::{EvalError, ScenarioError, SeriesError};
use pvarma::evaluation::{compare_models, hourly_forecasts, write_predictions_csv, CompareOptions, MetricReport};
use pvarma::json_float;
use pvarma::scenario::{condition_on, generate_scenarios, quantile_bands};
use pvarma::selector::{fit_all_hours, FitReport};
use pvarma::series::{detect_night_hours, load_series_file, warn_on_missing, NightMask, SolarSeries};

use crate::config::{Conditioning, RunConfig, Split};
use crate::error::CliError;

/// Contents of `models.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelsFile {
    /// Last date of the training window the models were fit on.
    pub train_end: NaiveDate,
    pub night_hours: Vec<u8>,
    /// Modeled hours whose selection failed; they have no report.
    pub failed_hours: Vec<u8>,
    pub reports: Vec<FitReport>,
}

impl ModelsFile {
    fn mask(&self) -> Result<NightMask, CliError> {
        NightMask::new(self.night_hours.iter().copied()).map_err(|e| CliError::input(e.to_string()))
    }
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    config_hash: String,
    n_scenarios: usize,
    conditioning: Conditioning,
    modeled_hours: Vec<u8>,
    truncated_count: usize,
    below_neg5_count: usize,
    #[serde(with = "json_float")]
    fraction_below_zero: f64,
    #[serde(with = "json_float")]
    fraction_below_neg5: f64,
}

fn series_error(path: &Path, e: SeriesError) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

fn load(cfg: &RunConfig) -> Result<SolarSeries, CliError> {
    let path = cfg.data_path()?;
    load_series_file(path).map_err(|e| series_error(path, e))
}

fn split(series: &SolarSeries, split: Split) -> Result<(SolarSeries, SolarSeries), CliError> {
    let first_test = match split {
        Split::Date(d) => d,
        Split::Fraction(f) => series.holdout_start(f).map_err(|e| CliError::input(e.to_string()))?,
    };
    let (train, test) = series.split_at_date(first_test);
    if train.is_empty() {
        return Err(CliError::input(format!("no training data before {first_test}")));
    }
    Ok((train, test))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), SeriesError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::input(e.to_string()))?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn read_models(cfg: &RunConfig) -> Result<ModelsFile, CliError> {
    let path = cfg.models_path();
    let text = fs::read_to_string(&path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn order_table(models: &ModelsFile, errors: &[(u8, String)]) -> String {
    let mut out = format!(
        "{:<6}{:>3}{:>3}{:>14}  {:<10}{}\n",
        "hour", "p", "q", "BIC", "unit root", "white residuals"
    );
    let mut rows: Vec<(u8, String)> = models
        .reports
        .iter()
        .map(|r| {
            let bic = r
                .grid
                .iter()
                .find(|g| g.p == r.chosen.p && g.q == r.chosen.q)
                .and_then(|g| g.bic)
                .map_or("-".into(), |b| format!("{b:.2}"));
            let unit_root = if r.possibly_nonstationary { "possible" } else { "rejected" };
            let white = if r.residuals_white() { "yes" } else { "no" };
            let line = format!(
                "{:02}:00 {:>3}{:>3}{bic:>14}  {unit_root:<10}{white}\n",
                r.hour, r.chosen.p, r.chosen.q
            );
            (r.hour, line)
        })
        .collect();
    rows.extend(
        errors
            .iter()
            .map(|(h, e)| (*h, format!("{h:02}:00 {:>3}{:>3}  selection failed: {e}\n", "-", "-"))),
    );
    rows.sort_by_key(|r| r.0);
    for (_, line) in rows {
        out.push_str(&line);
    }
    out
}

pub fn fit(cfg: &RunConfig) -> Result<(), CliError> {
    let series = load(cfg)?;
    let (train, _) = split(&series, cfg.split)?;
    let mask = detect_night_hours(&train, cfg.night_threshold);
    warn_on_missing(&train, &mask);

    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for fit in fit_all_hours(&train, &mask, &cfg.select_options()) {
        match fit.outcome {
            Ok(r) => reports.push(r),
            Err(e) => errors.push((fit.hour, e.to_string())),
        }
    }
    let models = ModelsFile {
        train_end: *train.dates().last().expect("training data is non-empty"),
        night_hours: mask.zero_hours().collect(),
        failed_hours: errors.iter().map(|e| e.0).collect(),
        reports,
    };
    write(&cfg.out.join("models.json"), &json_bytes(&models)?)?;
    print!("{}", order_table(&models, &errors));

    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::selection(format!(
            "selection failed for hour(s) {:?}",
            models.failed_hours
        )))
    }
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::MissingModel(_) | EvalError::Selection(_) => CliError::selection(e.to_string()),
        other => CliError::input(other.to_string()),
    }
}

fn test_window(cfg: &RunConfig, models: &ModelsFile) -> Result<SolarSeries, CliError> {
    let series = load(cfg)?;
    let (_, test) = split(&series, cfg.split)?;
    if let Some(first) = test.dates().first() {
        if *first <= models.train_end {
            return Err(CliError::input(format!(
                "test window starts {first}, but the models were trained up to {}",
                models.train_end
            )));
        }
    }
    Ok(test)
}

pub fn predict(cfg: &RunConfig) -> Result<(), CliError> {
    let models = read_models(cfg)?;
    let test = test_window(cfg, &models)?;
    let points = hourly_forecasts(&models.reports, &models.mask()?, &test).map_err(eval_error)?;
    let actual: Vec<f64> = points.iter().map(|p| p.actual).collect();
    let predicted: Vec<f64> = points.iter().map(|p| p.predicted).collect();
    let metrics = MetricReport::compute(&actual, &predicted).map_err(|e| match e {
        EvalError::Empty => CliError::input("evaluation window is empty"),
        other => eval_error(other),
    })?;

    write(
        &cfg.out.join("predictions.csv"),
        &csv_bytes(|buf| write_predictions_csv(&points, buf))?,
    )?;
    write(&cfg.out.join("metrics.json"), &json_bytes(&metrics)?)?;
    println!(
        "MAE {:.3} MW, RMSE {:.3} MW over {} points",
        metrics.mae, metrics.rmse, metrics.n_points
    );
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let mut models = read_models(cfg)?;
    if cfg.conditioning == Conditioning::Test {
        let test = test_window(cfg, &models)?;
        condition_on(&mut models.reports, &test).map_err(|e| CliError::selection(e.to_string()))?;
    }
    let scenario_error = |e: ScenarioError| match e {
        ScenarioError::MissingModel(_) | ScenarioError::Arma(_) => CliError::selection(e.to_string()),
        other => CliError::input(other.to_string()),
    };
    let set = generate_scenarios(&models.reports, &models.mask()?, cfg.scenarios, cfg.seed).map_err(scenario_error)?;
    let bands = quantile_bands(&set, &cfg.quantiles).map_err(scenario_error)?;
    let (below_zero, below_neg5) = set.negative_rate_report();
    let manifest = Manifest {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        n_scenarios: set.len(),
        conditioning: cfg.conditioning,
        modeled_hours: set.modeled_hours().to_vec(),
        truncated_count: set.truncated_count(),
        below_neg5_count: set.below_neg5_count(),
        fraction_below_zero: below_zero,
        fraction_below_neg5: below_neg5,
    };

    write(&cfg.out.join("scenarios.csv"), &csv_bytes(|buf| set.write_csv(buf))?)?;
    write(&cfg.out.join("quantiles.csv"), &csv_bytes(|buf| bands.write_csv(buf))?)?;
    write(&cfg.out.join("manifest.json"), &json_bytes(&manifest)?)?;
    println!(
        "{} scenarios; {:.2}% of modeled draws below 0 MW, {:.2}% below -5 MW",
        set.len(),
        100.0 * below_zero,
        100.0 * below_neg5
    );
    Ok(())
}

pub fn compare(cfg: &RunConfig) -> Result<(), CliError> {
    let series = load(cfg)?;
    let (train, test) = split(&series, cfg.split)?;
    let mask = detect_night_hours(&train, cfg.night_threshold);
    warn_on_missing(&train, &mask);
    let opts = CompareOptions {
        select: cfg.select_options(),
        persistence_window: cfg.persistence_window,
        persistence_mode: cfg.persistence_mode,
    };
    let cmp = compare_models(&train, &test, &mask, &opts).map_err(eval_error)?;
    write(&cfg.out.join("comparison.csv"), &csv_bytes(|buf| cmp.write_csv(buf))?)?;
    println!("{cmp}");
    if cmp.fallback_count() > 0 {
        println!(
            "Smart-Persistence used the last nonzero value at {} boundary point(s)",
            cmp.fallback_count()
        );
    }
    if !cmp.failed_hours.is_empty() {
        log::warn!("hours {:?} failed selection and were left out of every method", cmp.failed_hours);
    }
    Ok(())
}

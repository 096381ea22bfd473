mod common;

use common::*;
use proptest::prelude::*;
use pvarma::error::EvalError;
use pvarma::evaluation::{
    compare_models, fit_single_arma, hourly_forecasts, mae, persistence_forecasts, rmse, single_forecasts,
    smart_persistence, CompareOptions, MetricReport, PersistenceMode,
};
use pvarma::selector::{fit_all_hours, OrderGrid, SelectOptions};
use pvarma::series::{detect_night_hours, NightMask, SolarSeries};

fn small_opts() -> CompareOptions {
    CompareOptions {
        select: SelectOptions::with_grid(OrderGrid::up_to(1).unwrap()),
        ..CompareOptions::default()
    }
}

fn split(series: &SolarSeries) -> (SolarSeries, SolarSeries) {
    series.split_at_date(series.holdout_start(0.2).unwrap())
}

#[test]
fn hand_values() {
    assert!((mae(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((rmse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 0.816_496_580_927_726).abs() < 1e-12);
    let same = [3.0, -1.0, 8.5];
    assert_eq!(mae(&same, &same).unwrap(), 0.0);
    assert_eq!(rmse(&same, &same).unwrap(), 0.0);
    let shifted: Vec<f64> = same.iter().map(|v| v + 2.5).collect();
    assert_eq!(mae(&same, &shifted).unwrap(), 2.5);
    assert_eq!(rmse(&same, &shifted).unwrap(), 2.5);
}

#[test]
fn metric_report_percentages() {
    let m = MetricReport::compute(&[0.0, 600.0, 1200.0], &[0.0, 560.0, 1160.0]).unwrap();
    assert_eq!(m.n_points, 3);
    let mae_pct = m.mae_pct_of_max.unwrap();
    assert!((mae_pct - 100.0 * (80.0 / 3.0) / 1200.0).abs() < 1e-12);
    assert!(m.rmse >= m.mae);
}

proptest! {
    #[test]
    fn metrics_are_symmetric_and_shift_invariant(
        pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..50),
        shift in -1e3f64..1e3,
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let tol = 1e-9 * (1.0 + mae(&a, &b).unwrap());
        prop_assert!((mae(&a, &b).unwrap() - mae(&b, &a).unwrap()).abs() <= tol);
        prop_assert!((rmse(&a, &b).unwrap() - rmse(&b, &a).unwrap()).abs() <= tol);
        let a2: Vec<f64> = a.iter().map(|v| v + shift).collect();
        let b2: Vec<f64> = b.iter().map(|v| v + shift).collect();
        prop_assert!((mae(&a, &b).unwrap() - mae(&a2, &b2).unwrap()).abs() <= 1e-9 * (1.0 + shift.abs()));
        prop_assert!(rmse(&a, &b).unwrap() >= mae(&a, &b).unwrap() * (1.0 - 1e-12));
    }
}

#[test]
fn persistence_examples() {
    assert_eq!(smart_persistence(&[10.0, 20.0, 99.0], 2).unwrap(), vec![15.0]);
    assert_eq!(smart_persistence(&[4.0, 7.0, 1.0], 1).unwrap(), vec![4.0, 7.0]);
    let constant = [5.0; 10];
    let preds = smart_persistence(&constant, 2).unwrap();
    assert_eq!(mae(&constant[2..], &preds).unwrap(), 0.0);
    assert!(matches!(
        smart_persistence(&[1.0, 2.0], 2),
        Err(EvalError::InsufficientHistory { .. })
    ));
}

#[test]
fn clock_hour_persistence_with_boundary_fallback() {
    let series = diurnal_series(30, 0.5, 0.05, 1);
    let (train, test) = split(&series);
    let mask = detect_night_hours(&train, 0.0);
    let points = persistence_forecasts(&train, &test, &mask, 2, PersistenceMode::ClockHours).unwrap();
    assert_eq!(points.len(), test.len());

    let all: Vec<f64> = series.observed_values();
    let offset = train.len();
    for (i, p) in points.iter().enumerate() {
        let t = offset + i;
        if p.hour == 6 {
            // window is 04:00 and 05:00; falls back to yesterday's last light
            assert!(p.fallback);
            let last_nonzero = all[..t].iter().rev().find(|&&v| v != 0.0).unwrap();
            assert_eq!(p.predicted, *last_nonzero);
        } else {
            assert!(!p.fallback);
            assert_eq!(p.predicted, (all[t - 1] + all[t - 2]) / 2.0);
        }
    }
}

#[test]
fn same_hour_persistence_uses_previous_days() {
    let series = diurnal_series(30, 0.5, 0.05, 2);
    let (train, test) = split(&series);
    let mask = detect_night_hours(&train, 0.0);
    let points = persistence_forecasts(&train, &test, &mask, 2, PersistenceMode::SameHourPreviousDays).unwrap();
    let noon: Vec<f64> = pvarma::series::slice_by_hour(&series, 12).unwrap().values;
    let first_test_day = train.dates().len();
    let noon_points: Vec<_> = points.iter().filter(|p| p.hour == 12).collect();
    for (k, p) in noon_points.iter().enumerate() {
        let d = first_test_day + k;
        assert_eq!(p.predicted, (noon[d - 1] + noon[d - 2]) / 2.0);
    }
}

#[test]
fn hourly_forecasts_are_zero_at_night_and_match_state_recursion() {
    let series = diurnal_series(60, 0.7, 0.1, 3);
    let (train, test) = split(&series);
    let mask = detect_night_hours(&train, 0.0);
    let reports: Vec<_> = fit_all_hours(&train, &mask, &small_opts().select)
        .into_iter()
        .map(|f| f.outcome.unwrap())
        .collect();
    let points = hourly_forecasts(&reports, &mask, &test).unwrap();
    assert_eq!(points.len(), test.len());
    for p in points.iter().filter(|p| mask.is_night(p.hour)) {
        assert_eq!(p.predicted, 0.0);
    }
    // hand-rolled recursion for one hour
    let r = reports.iter().find(|r| r.hour == 10).unwrap();
    let mut history = r.state.history.clone();
    let mut resid = r.state.residuals.clone();
    for p in points.iter().filter(|p| p.hour == 10) {
        let f = pvarma::arma::forecast_one_step(&r.model, &history, &resid).unwrap();
        assert_eq!(p.predicted, f);
        history.push(p.actual);
        resid.push(p.actual - f);
    }

    let missing = NightMask::new((0..24).filter(|&h| h != 10)).unwrap();
    assert!(matches!(
        hourly_forecasts(&[], &missing, &test),
        Err(EvalError::MissingModel(10))
    ));
}

#[test]
fn compare_uses_identical_points() {
    let series = diurnal_series(50, 0.7, 0.1, 5);
    let (train, test) = split(&series);
    let mask = detect_night_hours(&train, 0.0);
    let cmp = compare_models(&train, &test, &mask, &small_opts()).unwrap();
    let stamps = |m: &pvarma::evaluation::MethodResult| {
        m.forecasts.iter().map(|p| (p.timestamp, p.actual)).collect::<Vec<_>>()
    };
    assert_eq!(stamps(&cmp.hourly), stamps(&cmp.single));
    assert_eq!(stamps(&cmp.hourly), stamps(&cmp.persistence));
    for m in cmp.methods() {
        assert_eq!(m.metrics.n_points, test.len());
        assert!(m.metrics.rmse >= m.metrics.mae);
    }
    let mut csv = Vec::new();
    cmp.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("metric,hourly_arma,single_arma,smart_persistence\n"));
    assert!(cmp.to_string().contains("Smart-Persistence"));
}

#[test]
fn empty_test_window_is_an_error() {
    let series = diurnal_series(20, 0.5, 0.1, 1);
    let (train, test) = series.split_at_date(chrono::NaiveDate::from_ymd_opt(2030, 1, 1).unwrap());
    assert!(test.is_empty());
    let mask = detect_night_hours(&train, 0.0);
    assert!(matches!(
        compare_models(&train, &test, &mask, &small_opts()),
        Err(EvalError::EmptyTestWindow)
    ));
}

#[test]
fn single_model_loses_on_diurnal_data() {
    let opts = small_opts();
    let mut wins = 0;
    for seed in 0..3 {
        let series = diurnal_series(60, 0.7, 0.1, 40 + seed);
        let (train, test) = split(&series);
        let mask = detect_night_hours(&train, 0.0);
        let cmp = compare_models(&train, &test, &mask, &opts).unwrap();
        if cmp.single.metrics.mae > cmp.hourly.metrics.mae {
            wins += 1;
        }
    }
    assert_eq!(wins, 3);
}

#[test]
fn single_and_hourly_agree_on_flat_data() {
    let series = flat_series(120, 500.0, 50.0, 9);
    let (train, test) = split(&series);
    let mask = detect_night_hours(&train, 0.0);
    assert!(mask.zero_hours().next().is_none());
    let opts = small_opts();
    let reports: Vec<_> = fit_all_hours(&train, &mask, &opts.select)
        .into_iter()
        .map(|f| f.outcome.unwrap())
        .collect();
    let hourly = hourly_forecasts(&reports, &mask, &test).unwrap();
    let single = single_forecasts(&fit_single_arma(&train, &opts.select).unwrap(), &test).unwrap();
    let m = |pts: &[pvarma::evaluation::PointForecast]| {
        let a: Vec<f64> = pts.iter().map(|p| p.actual).collect();
        let b: Vec<f64> = pts.iter().map(|p| p.predicted).collect();
        mae(&a, &b).unwrap()
    };
    let (h, s) = (m(&hourly), m(&single));
    assert!((h - s).abs() / s < 0.10, "hourly {h} vs single {s}");
}

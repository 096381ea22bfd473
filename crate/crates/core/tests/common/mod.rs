//! Reference computations for integration tests. Nothing here calls into
//! the implementation paths it is used to check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Simulates `n` values of `mu + ARMA(phi, theta)` with unit-variance-scaled
/// Gaussian innovations, discarding `burn` warm-up values.
pub fn simulate_arma(phi: &[f64], theta: &[f64], mu: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let burn = 500;
    let mut r = rng(seed);
    let mut y = vec![0.0; n + burn];
    let mut e = vec![0.0; n + burn];
    for t in 0..n + burn {
        e[t] = sigma * r.sample::<f64, _>(StandardNormal);
        let mut v = e[t];
        for (i, a) in phi.iter().enumerate() {
            if t > i {
                v += a * y[t - 1 - i];
            }
        }
        for (j, b) in theta.iter().enumerate() {
            if t > j {
                v += b * e[t - 1 - j];
            }
        }
        y[t] = v;
    }
    y[burn..].iter().map(|v| v + mu).collect()
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += r.sample::<f64, _>(StandardNormal);
            x
        })
        .collect()
}

/// Autocovariances `gamma_0..gamma_{max_lag}` from the MA(infinity) weights.
pub fn arma_autocovariance(phi: &[f64], theta: &[f64], sigma2: f64, max_lag: usize) -> Vec<f64> {
    let terms = 20_000;
    let mut psi = vec![0.0; terms];
    psi[0] = 1.0;
    for j in 1..terms {
        let mut v = if j <= theta.len() { theta[j - 1] } else { 0.0 };
        for (i, a) in phi.iter().enumerate() {
            if j > i {
                v += a * psi[j - 1 - i];
            }
        }
        psi[j] = v;
    }
    (0..=max_lag)
        .map(|k| sigma2 * (0..terms - k).map(|j| psi[j] * psi[j + k]).sum::<f64>())
        .collect()
}

/// Closed-form AR(1) autocovariances.
pub fn ar1_autocovariance(phi: f64, sigma2: f64, max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| sigma2 * phi.powi(k as i32) / (1.0 - phi * phi))
        .collect()
}

/// Closed-form ARMA(1,1) autocovariances.
pub fn arma11_autocovariance(phi: f64, theta: f64, sigma2: f64, max_lag: usize) -> Vec<f64> {
    let g0 = sigma2 * (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
    let g1 = sigma2 * (1.0 + phi * theta) * (phi + theta) / (1.0 - phi * phi);
    let mut g = vec![g0, g1];
    while g.len() <= max_lag {
        let last = *g.last().unwrap();
        g.push(phi * last);
    }
    g.truncate(max_lag + 1);
    g
}

/// Log-density of `N(mu 1, Toeplitz(gamma))` at `x`, by dense Cholesky.
pub fn dense_mvn_loglik(x: &[f64], mu: f64, gamma: &[f64]) -> f64 {
    let n = x.len();
    let cov = |i: usize, j: usize| gamma[i.abs_diff(j)];
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = cov(i, j);
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                assert!(s > 0.0, "covariance not positive definite");
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward substitution L z = x - mu
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = x[i] - mu;
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    let log_det: f64 = (0..n).map(|i| 2.0 * l[i][i].ln()).sum();
    let quad: f64 = z.iter().map(|v| v * v).sum();
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

/// Inverts a small symmetric positive definite matrix by Gauss-Jordan.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, p) in m[r].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// OLS by the normal equations: returns (beta, standard errors).
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = rows[0].len();
    let n = rows.len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (r, &yv) in rows.iter().zip(y) {
        for i in 0..k {
            xty[i] += r[i] * yv;
            for j in 0..k {
                xtx[i][j] += r[i] * r[j];
            }
        }
    }
    let inv = invert(&xtx);
    let beta: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[i][j] * xty[j]).sum()).collect();
    let ssr: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, &yv)| {
            let fit: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (yv - fit).powi(2)
        })
        .sum();
    let s2 = ssr / (n - k) as f64;
    let se = (0..k).map(|i| (s2 * inv[i][i]).sqrt()).collect();
    (beta, se)
}

/// ADF t-statistic with `k` lagged differences via the normal equations.
pub fn adf_statistic_oracle(x: &[f64], k: usize) -> f64 {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for t in (k + 1)..x.len() {
        let mut r = vec![1.0, x[t - 1]];
        for i in 1..=k {
            r.push(x[t - i] - x[t - i - 1]);
        }
        rows.push(r);
        y.push(x[t] - x[t - 1]);
    }
    let (beta, se) = normal_equations(&rows, &y);
    beta[1] / se[1]
}

/// Sample autocorrelation by the defining double loop.
pub fn acf_oracle(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mut mean = 0.0;
    for v in x {
        mean += v;
    }
    mean /= n as f64;
    let mut denom = 0.0;
    for t in 0..n {
        denom += (x[t] - mean) * (x[t] - mean);
    }
    let mut out = Vec::new();
    for k in 1..=max_lag {
        let mut num = 0.0;
        for t in k..n {
            num += (x[t] - mean) * (x[t - k] - mean);
        }
        out.push(num / denom);
    }
    out
}

/// Ljung-Box Q by its defining formula.
pub fn ljung_box_oracle(x: &[f64], h: usize) -> f64 {
    let n = x.len() as f64;
    let rho = acf_oracle(x, h);
    let mut s = 0.0;
    for k in 1..=h {
        s += rho[k - 1] * rho[k - 1] / (n - k as f64);
    }
    n * (n + 2.0) * s
}

/// Largest modulus among reciprocal roots of `1 - a_1 z - ... - a_k z^k`.
pub fn max_reciprocal_root(a: &[f64]) -> f64 {
    let k = a.len();
    if k == 0 {
        return 0.0;
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        m[(0, j)] = a[j];
    }
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Draws a stationary, invertible (phi, theta) pair by rejection.
pub fn random_valid_params(p: usize, q: usize, r: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let phi: Vec<f64> = (0..p).map(|_| r.random_range(-0.9..0.9)).collect();
        let theta: Vec<f64> = (0..q).map(|_| r.random_range(-0.9..0.9)).collect();
        let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
        if max_reciprocal_root(&phi) < 0.9 && max_reciprocal_root(&neg) < 0.9 {
            return (phi, theta);
        }
    }
}

pub const DAYLIGHT: std::ops::RangeInclusive<u8> = 6..=19;

/// Bell-shaped mean output for a daylight hour, zero at night.
pub fn bell_mean(hour: u8, peak: f64) -> f64 {
    if DAYLIGHT.contains(&hour) {
        peak * (std::f64::consts::PI * (hour as f64 - 5.0) / 15.0).sin()
    } else {
        0.0
    }
}

/// `days` of hourly data: zero at night, and at each daylight hour an AR(1)
/// across days around the bell profile with innovation sd `noise` times the
/// hour's mean. Values are floored at zero.
pub fn diurnal_series(days: u32, phi: f64, noise: f64, seed: u64) -> pvarma::series::SolarSeries {
    let mut r = rng(seed);
    let mut dev = [0.0f64; 24];
    let start = chrono::NaiveDate::from_ymd_opt(2015, 4, 1).unwrap();
    let mut records = Vec::new();
    for d in 0..days {
        let date = start + chrono::Days::new(u64::from(d));
        for hour in 0..24u8 {
            let mu = bell_mean(hour, 1000.0);
            let power = if mu > 0.0 {
                let h = hour as usize;
                dev[h] = phi * dev[h] + noise * mu * r.sample::<f64, _>(StandardNormal);
                (mu + dev[h]).max(0.0)
            } else {
                0.0
            };
            records.push(pvarma::series::Record {
                date,
                hour,
                power: Some(power),
            });
        }
    }
    pvarma::series::SolarSeries::from_records(records).unwrap()
}

/// `days` of i.i.d. values around a constant level at every hour.
pub fn flat_series(days: u32, level: f64, sd: f64, seed: u64) -> pvarma::series::SolarSeries {
    let mut r = rng(seed);
    let start = chrono::NaiveDate::from_ymd_opt(2015, 4, 1).unwrap();
    let mut records = Vec::new();
    for d in 0..days {
        let date = start + chrono::Days::new(u64::from(d));
        for hour in 0..24u8 {
            let v: f64 = level + sd * r.sample::<f64, _>(StandardNormal);
            records.push(pvarma::series::Record {
                date,
                hour,
                power: Some(v.max(0.0)),
            });
        }
    }
    pvarma::series::SolarSeries::from_records(records).unwrap()
}

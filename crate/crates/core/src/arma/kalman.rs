//! Exact Gaussian likelihood of a zero-mean ARMA process by Kalman filtering.
//!
//! State-space form with state dimension `r = max(p, q + 1)`:
//!
//! ```text
//! a[t+1] = T a[t] + R e[t]      T companion (first column phi), R = [1, theta, 0...]
//! y[t]   = a[t][0]
//! ```
//!
//! The filter runs with unit innovation variance; prediction variances `F`
//! are then in units of sigma². The initial state covariance solves the
//! discrete Lyapunov equation `P = T P T' + R R'`.

use nalgebra::{DMatrix, DVector};

use crate::error::ArmaError;

/// Once every entry of P moves less than this between steps the filter is
/// treated as having reached its steady state.
const STEADY_TOL: f64 = 1e-13;

pub(crate) struct Ssm {
    r: usize,
    phi: Vec<f64>,
    rvec: Vec<f64>,
}

impl Ssm {
    pub(crate) fn new(phi: &[f64], theta: &[f64]) -> Self {
        let r = phi.len().max(theta.len() + 1);
        let mut phi_pad = vec![0.0; r];
        phi_pad[..phi.len()].copy_from_slice(phi);
        let mut rvec = vec![0.0; r];
        rvec[0] = 1.0;
        rvec[1..=theta.len()].copy_from_slice(theta);
        Self {
            r,
            phi: phi_pad,
            rvec,
        }
    }

    /// Stationary state covariance (unit innovation variance), row-major.
    fn initial_covariance(&self) -> Result<Vec<f64>, ArmaError> {
        let r = self.r;
        let mut t = DMatrix::<f64>::zeros(r, r);
        for i in 0..r {
            t[(i, 0)] = self.phi[i];
            if i + 1 < r {
                t[(i, i + 1)] = 1.0;
            }
        }
        let rr = r * r;
        let kron = t.kronecker(&t);
        let system = DMatrix::<f64>::identity(rr, rr) - kron;
        let rhs = DVector::from_iterator(
            rr,
            (0..rr).map(|k| self.rvec[k / r] * self.rvec[k % r]),
        );
        let sol = system.lu().solve(&rhs).ok_or(ArmaError::Initialisation)?;
        let mut p = vec![0.0; rr];
        for i in 0..r {
            for j in 0..r {
                // symmetrise against round-off
                p[i * r + j] = 0.5 * (sol[i * r + j] + sol[j * r + i]);
            }
        }
        if !(p[0] > 0.0) || p.iter().any(|v| !v.is_finite()) {
            return Err(ArmaError::Initialisation);
        }
        Ok(p)
    }

    /// Runs the filter over each of `series` in lockstep (they share gains)
    /// and calls `visit(t, f, innovations)` at every step.
    pub(crate) fn filter<const K: usize>(
        &self,
        series: [&[f64]; K],
        visit: impl FnMut(usize, f64, [f64; K]),
    ) -> Result<(), ArmaError> {
        let p0 = self.initial_covariance()?;
        match self.r {
            1 => self.filter_fixed::<1, K>(&p0, series, visit),
            2 => self.filter_fixed::<2, K>(&p0, series, visit),
            3 => self.filter_fixed::<3, K>(&p0, series, visit),
            4 => self.filter_fixed::<4, K>(&p0, series, visit),
            5 => self.filter_fixed::<5, K>(&p0, series, visit),
            6 => self.filter_fixed::<6, K>(&p0, series, visit),
            7 => self.filter_fixed::<7, K>(&p0, series, visit),
            8 => self.filter_fixed::<8, K>(&p0, series, visit),
            9 => self.filter_fixed::<9, K>(&p0, series, visit),
            _ => self.filter_dynamic(p0, series, visit),
        }
    }

    /// Stack-allocated filter for state dimension `R`.
    fn filter_fixed<const R: usize, const K: usize>(
        &self,
        p0: &[f64],
        series: [&[f64]; K],
        mut visit: impl FnMut(usize, f64, [f64; K]),
    ) -> Result<(), ArmaError> {
        let phi: [f64; R] = std::array::from_fn(|i| self.phi[i]);
        let rv: [f64; R] = std::array::from_fn(|i| self.rvec[i]);
        let mut p = [[0.0; R]; R];
        for i in 0..R {
            for j in 0..R {
                p[i][j] = p0[i * R + j];
            }
        }
        let mut m = [[0.0; R]; R];
        let mut gain = [0.0; R];
        let mut states = [[0.0; R]; K];
        let mut steady = false;
        let n = series[0].len();

        for t in 0..n {
            let f = p[0][0];
            if !(f > 0.0) || !f.is_finite() {
                return Err(ArmaError::Initialisation);
            }
            let mut innov = [0.0; K];
            for k in 0..K {
                innov[k] = series[k][t] - states[k][0];
            }
            visit(t, f, innov);

            if !steady {
                // M = T P
                for i in 0..R {
                    for j in 0..R {
                        let below = if i + 1 < R { p[i + 1][j] } else { 0.0 };
                        m[i][j] = phi[i] * p[0][j] + below;
                    }
                }
                for i in 0..R {
                    gain[i] = m[i][0] / f;
                }
                // P' = M T' + R R' - F K K', symmetric
                let mut delta = 0.0f64;
                for i in 0..R {
                    for j in i..R {
                        let right = if j + 1 < R { m[i][j + 1] } else { 0.0 };
                        let v = m[i][0] * phi[j] + right + rv[i] * rv[j] - f * gain[i] * gain[j];
                        delta = delta.max((v - p[i][j]).abs());
                        p[i][j] = v;
                        p[j][i] = v;
                    }
                }
                steady = delta < STEADY_TOL;
            }

            for (a, &v) in states.iter_mut().zip(&innov) {
                let a0 = a[0];
                for i in 0..R {
                    let below = if i + 1 < R { a[i + 1] } else { 0.0 };
                    a[i] = phi[i] * a0 + below + gain[i] * v;
                }
            }
        }
        Ok(())
    }

    fn filter_dynamic<const K: usize>(
        &self,
        mut p: Vec<f64>,
        series: [&[f64]; K],
        mut visit: impl FnMut(usize, f64, [f64; K]),
    ) -> Result<(), ArmaError> {
        let r = self.r;
        let n = series[0].len();
        let mut p_next = vec![0.0; r * r];
        let mut m = vec![0.0; r * r];
        let mut gain = vec![0.0; r];
        let mut states = [(); K].map(|_| vec![0.0; r]);
        let mut steady = false;

        for t in 0..n {
            let f = p[0];
            if !(f > 0.0) || !f.is_finite() {
                return Err(ArmaError::Initialisation);
            }
            let mut innov = [0.0; K];
            for (k, a) in states.iter().enumerate() {
                innov[k] = series[k][t] - a[0];
            }
            visit(t, f, innov);

            if !steady {
                for i in 0..r {
                    for j in 0..r {
                        let below = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                        m[i * r + j] = self.phi[i] * p[j] + below;
                    }
                }
                for i in 0..r {
                    gain[i] = m[i * r] / f;
                }
                let mut delta = 0.0f64;
                for i in 0..r {
                    for j in 0..r {
                        let right = if j + 1 < r { m[i * r + j + 1] } else { 0.0 };
                        let v = m[i * r] * self.phi[j] + right + self.rvec[i] * self.rvec[j]
                            - f * gain[i] * gain[j];
                        delta = delta.max((v - p[i * r + j]).abs());
                        p_next[i * r + j] = v;
                    }
                }
                std::mem::swap(&mut p, &mut p_next);
                steady = delta < STEADY_TOL;
            }

            for (k, a) in states.iter_mut().enumerate() {
                let a0 = a[0];
                for i in 0..r {
                    let below = if i + 1 < r { a[i + 1] } else { 0.0 };
                    a[i] = self.phi[i] * a0 + below + gain[i] * innov[k];
                }
            }
        }
        Ok(())
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-likelihood of `y` (already mean-adjusted) with innovation variance `sigma2`.
pub(crate) fn loglik_given(ssm: &Ssm, y: &[f64], sigma2: f64) -> Result<f64, ArmaError> {
    let mut acc = 0.0;
    ssm.filter([y], |_, f, [v]| {
        let var = sigma2 * f;
        acc += LN_2PI + var.ln() + v * v / var;
    })?;
    Ok(-0.5 * acc)
}

/// Profile likelihood with the mean and innovation variance maximised out.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Profile {
    pub loglik: f64,
    pub mean: f64,
    pub sigma2: f64,
}

/// Maximises the likelihood over the mean (generalised least squares on the
/// innovations) and sigma² (closed form) for fixed (phi, theta).
///
/// `centered` must be the series minus `offset`; centring keeps the
/// quadratic forms well conditioned for series with a large level.
pub(crate) fn profile(
    ssm: &Ssm,
    centered: &[f64],
    offset: f64,
    ones: &[f64],
) -> Result<Profile, ArmaError> {
    let n = centered.len() as f64;
    let (mut s11, mut s1x, mut sxx, mut sum_ln_f) = (0.0, 0.0, 0.0, 0.0);
    ssm.filter([centered, ones], |_, f, [vx, v1]| {
        s11 += v1 * v1 / f;
        s1x += v1 * vx / f;
        sxx += vx * vx / f;
        sum_ln_f += f.ln();
    })?;
    if !(s11 > 0.0) {
        return Err(ArmaError::Initialisation);
    }
    let shift = s1x / s11;
    let ssr = (sxx - shift * s1x).max(0.0);
    let sigma2 = ssr / n;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(ArmaError::ConstantSeries);
    }
    let loglik = -0.5 * (n * (LN_2PI + sigma2.ln() + 1.0) + sum_ln_f);
    Ok(Profile {
        loglik,
        mean: offset + shift,
        sigma2,
    })
}

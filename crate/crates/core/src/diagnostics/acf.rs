use crate::error::DiagnosticsError;

/// Sample autocorrelations at lags `1..=max_lag`:
/// `sum_{t>k} (x_t - m)(x_{t-k} - m) / sum_t (x_t - m)^2`.
pub fn sample_autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagnosticsError> {
    let n = x.len();
    if n <= max_lag {
        return Err(DiagnosticsError::TooShort {
            needed: max_lag + 1,
            found: n,
        });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if !(denom > 0.0) {
        return Err(DiagnosticsError::ZeroVariance);
    }
    Ok((1..=max_lag)
        .map(|k| dev[k..].iter().zip(&dev[..n - k]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_sign_structure() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = sample_autocorrelation(&x, 2).unwrap();
        assert!(r[0] < 0.0 && r[1] > 0.0);
        assert!((r[0] + 0.99).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(sample_autocorrelation(&[1.0; 10], 2), Err(DiagnosticsError::ZeroVariance));
        assert!(matches!(sample_autocorrelation(&[1.0, 2.0], 2), Err(DiagnosticsError::TooShort { .. })));
    }
}

//! Partial-autocorrelation parameterisation of stable polynomials.
//!
//! A vector of partial autocorrelations in the open cube (-1, 1)^k maps
//! bijectively, through the Durbin-Levinson recursion, onto the coefficients
//! `a` for which `1 - a_1 z - ... - a_k z^k` has every root strictly outside
//! the unit circle. The AR side uses `a` directly; the MA side uses `-a`
//! because its polynomial is written with plus signs.

/// Bound on unconstrained coordinates; keeps partial autocorrelations away
/// from ±1 in floating point.
pub(crate) const MAX_UNCONSTRAINED: f64 = 7.0;

/// Durbin-Levinson: partial autocorrelations to polynomial coefficients.
pub fn pacf_to_coefficients(pacf: &[f64]) -> Vec<f64> {
    let mut coef: Vec<f64> = Vec::with_capacity(pacf.len());
    let mut prev: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        prev.clear();
        prev.extend_from_slice(&coef);
        for j in 0..k {
            coef[j] = prev[j] - r * prev[k - 1 - j];
        }
        coef.push(r);
    }
    coef
}

/// Step-down recursion: the inverse of [`pacf_to_coefficients`]. Returns
/// `None` when the polynomial has a root on or inside the unit circle.
pub fn coefficients_to_pacf(coef: &[f64]) -> Option<Vec<f64>> {
    let mut a = coef.to_vec();
    let mut pacf = vec![0.0; coef.len()];
    for k in (0..coef.len()).rev() {
        let r = a[k];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (a[j] + r * a[k - 1 - j]) / denom).collect();
        a.truncate(k);
        a.copy_from_slice(&prev);
    }
    Some(pacf)
}

/// Roots of `1 - phi_1 z - ... - phi_p z^p` all strictly outside the unit circle.
pub fn is_stationary(phi: &[f64]) -> bool {
    coefficients_to_pacf(phi).is_some()
}

/// Roots of `1 + theta_1 z + ... + theta_q z^q` all strictly outside the unit circle.
pub fn is_invertible(theta: &[f64]) -> bool {
    let negated: Vec<f64> = theta.iter().map(|t| -t).collect();
    coefficients_to_pacf(&negated).is_some()
}

/// Maps unconstrained optimizer coordinates to (phi, theta).
pub(crate) fn unconstrained_to_coefficients(u: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let pacf: Vec<f64> = u
        .iter()
        .map(|x| x.clamp(-MAX_UNCONSTRAINED, MAX_UNCONSTRAINED).tanh())
        .collect();
    let phi = pacf_to_coefficients(&pacf[..p]);
    let theta = pacf_to_coefficients(&pacf[p..])
        .into_iter()
        .map(|a| -a)
        .collect();
    (phi, theta)
}

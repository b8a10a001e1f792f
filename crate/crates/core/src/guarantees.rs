//! Approximation constants.

use crate::matroid::{Matroid, MatroidKind};

/// `1 − 1/e`.
pub fn one_minus_inv_e() -> f64 {
    1.0 - (-1.0f64).exp()
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `1 − e^{−k} k^k / k!`, evaluated in log space for `k > 20`.
pub fn c_uniform(k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k <= 20 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        1.0 - (-(k as f64)).exp() * (k as f64).powi(k as i32) / fact
    } else {
        let kf = k as f64;
        1.0 - (-kf + kf * kf.ln() - ln_factorial(k)).exp()
    }
}

/// Contention-resolution constant `c_M`.
pub fn c_matroid(m: &Matroid) -> f64 {
    match m.kind() {
        MatroidKind::Uniform { k } => c_uniform(*k as u64),
        MatroidKind::Partition { .. } => one_minus_inv_e(),
    }
}

/// Regret factor `c_M·(1 − 1/e)`.
pub fn alpha(m: &Matroid) -> f64 {
    c_matroid(m) * one_minus_inv_e()
}

pub fn alpha_uniform(k: u64) -> f64 {
    c_uniform(k) * one_minus_inv_e()
}

/// `(1 − 1/e)²`, the factor for general matroids.
pub fn alpha_general() -> f64 {
    one_minus_inv_e().powi(2)
}

/// `½(1 − 1/e²)`, the previous best factor for matroid second stages.
pub fn matroid_reference() -> f64 {
    0.5 * (1.0 - (-2.0f64).exp())
}

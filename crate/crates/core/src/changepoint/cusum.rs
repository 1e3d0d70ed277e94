// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::bridge::bb_sup_tail;
use super::trim::TrimSpec;
use crate::error::{Error, Result};

/// Result of one CUSUM scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// 1-based index of the smallest maximizer of the centered partial sums.
    pub k_hat: usize,
    pub tau_hat: f64,
    pub trim: TrimSpec,
    /// Divergence exponent of the estimate behind the residuals, when known.
    pub alpha: Option<f64>,
}

impl TestOutcome {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// `max_k |Σ_{i<=k} v_i - (k/n) Σ_{i<=n} v_i|` and the smallest maximizing `k`.
///
/// The partial sums are accumulated on the centered values, so adding a
/// constant to every entry leaves the result unchanged up to rounding.
pub fn cusum_max_deviation(values: &[f64]) -> (f64, usize) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut acc = 0.0;
    let mut best = (f64::NEG_INFINITY, 1);
    for (i, v) in values.iter().enumerate() {
        acc += v - mean;
        let d = acc.abs();
        if d > best.0 {
            best = (d, i + 1);
        }
    }
    best
}

/// `√(1/n Σ (v_i - v̄)²)`.
pub(crate) fn population_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Scaled CUSUM of already-transformed values: `max deviation / (√n τ̂)`.
pub fn cusum_scan(values: &[f64], trim: TrimSpec) -> Result<TestOutcome> {
    let n = values.len();
    if n < 2 {
        return Err(Error::data(format!("CUSUM needs at least 2 values, got {n}")));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::data(format!("non-finite value at position {}", i + 1)));
    }
    let tau = population_sd(values);
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(tau > 1e-14 * scale) {
        return Err(Error::DegenerateScale(format!(
            "all {n} transformed residuals are equal; the variance estimate is zero"
        )));
    }
    let (dev, k_hat) = cusum_max_deviation(values);
    let statistic = dev / ((n as f64).sqrt() * tau);
    Ok(TestOutcome {
        statistic,
        p_value: bb_sup_tail(statistic),
        k_hat,
        tau_hat: tau,
        trim,
        alpha: None,
    })
}

/// CUSUM of trimmed squared residuals.
pub fn cusum_statistic(residuals: &[f64], trim: &TrimSpec) -> Result<TestOutcome> {
    trim.validate()?;
    let values: Vec<f64> = residuals.iter().map(|z| trim.apply(z * z)).collect();
    cusum_scan(&values, *trim)
}

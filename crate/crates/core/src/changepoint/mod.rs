// SPDX-License-Identifier: MIT OR Apache-2.0

//! Residual-based CUSUM tests for a change in the dispersion parameter.
//!
//! Residuals are the standardized one-step innovations
//! `Ẑ_i = (X_{t_i} - X_{t_{i-1}} - a(X_{t_{i-1}}, θ̂) h) / (√h σ̂)`. Their
//! squares, optionally trimmed, feed a CUSUM scan normalized by the sample
//! standard deviation of the scanned values. Under a constant `σ` the
//! statistic converges to the supremum of a Brownian bridge whatever the
//! divergence exponent of the estimator. The residuals barely react to the
//! drift when `h` is small, so a rejection points at `σ`, not `θ`.

mod bridge;
mod cusum;
mod segment;
mod trim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit, MdpdeConfig, ParamEstimate};
use crate::model::DriftModel;
use crate::simulate::SamplePath;

pub use bridge::{bb_sup_tail, critical_value};
pub use cusum::{cusum_max_deviation, cusum_scan, cusum_statistic, TestOutcome};
pub use segment::{binary_segmentation, Segment, SegmentationConfig, SegmentationResult};
pub use trim::{trim_value, TrimKind, TrimSpec, M_975, M_995};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub values: Vec<f64>,
    pub h: f64,
    pub estimate: ParamEstimate,
}

pub fn residuals(model: &dyn DriftModel, path: &SamplePath, est: &ParamEstimate) -> Result<ResidualSeries> {
    if !(est.sigma_hat > 0.0 && est.sigma_hat.is_finite()) {
        return Err(Error::domain(format!(
            "sigma_hat must be positive, got {}",
            est.sigma_hat
        )));
    }
    if est.theta_hat.len() != model.dim_theta() {
        return Err(Error::Shape {
            expected: model.dim_theta(),
            got: est.theta_hat.len(),
        });
    }
    path.check_finite()?;
    let h = path.step;
    let scale = h.sqrt() * est.sigma_hat;
    let theta = &est.theta_hat;
    let values: Vec<f64> = path
        .values
        .windows(2)
        .map(|w| (w[1] - w[0] - model.drift(w[0], theta) * h) / scale)
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::data(format!("residual {} is not finite", i + 1)));
    }
    Ok(ResidualSeries {
        values,
        h,
        estimate: est.clone(),
    })
}

/// Fit, standardize, trim and scan. `alpha = 0` with no trimming is the
/// plain CUSUM-of-squares test on quasi-likelihood residuals.
pub fn run_test(model: &dyn DriftModel, path: &SamplePath, cfg: &MdpdeConfig, trim: &TrimSpec) -> Result<TestOutcome> {
    Ok(run_test_with_estimate(model, path, cfg, trim)?.0)
}

pub(crate) fn run_test_with_estimate(
    model: &dyn DriftModel,
    path: &SamplePath,
    cfg: &MdpdeConfig,
    trim: &TrimSpec,
) -> Result<(TestOutcome, ParamEstimate)> {
    trim.validate()?;
    let est = fit(model, path, cfg)?;
    let res = residuals(model, path, &est)?;
    let mut out = cusum_statistic(&res.values, trim)?;
    out.alpha = Some(cfg.alpha);
    Ok((out, est))
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! One-step-ahead Euler forecasts with rolling re-estimation.
//!
//! The forecast for `t_{s+1}` is `X_{t_s} + a(X_{t_s}, θ̂) h`, where `θ̂` is
//! fitted on observations `from_index..=s`; for the mean-reverting OU this
//! is `X + λ̂(μ̂ - X)h`. The prediction interval is `±2σ̂√h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit, MdpdeConfig, ParamEstimate};
use crate::model::DriftModel;
use crate::simulate::SamplePath;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointForecast {
    pub predicted: f64,
    pub pi_lo: f64,
    pub pi_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    /// Index `s + 1` of the forecast observation.
    pub index: usize,
    pub predicted: f64,
    pub pi_lo: f64,
    pub pi_hi: f64,
    pub actual: f64,
    pub estimate_used: ParamEstimate,
}

impl ForecastRecord {
    pub fn covered(&self) -> bool {
        self.pi_lo <= self.actual && self.actual <= self.pi_hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastScore {
    pub rmse: f64,
    pub rmspe: f64,
    pub pi_coverage_count: usize,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    /// First forecast origin `s`.
    pub eval_start: usize,
    /// First observation used for estimation.
    pub from_index: usize,
    pub refit_every: usize,
    pub mdpde: MdpdeConfig,
}

impl RollingConfig {
    pub fn new(eval_start: usize, from_index: usize, alpha: f64) -> Self {
        Self {
            eval_start,
            from_index,
            refit_every: 1,
            mdpde: MdpdeConfig::new(alpha),
        }
    }
}

pub fn one_step_forecast(model: &dyn DriftModel, est: &ParamEstimate, x_s: f64, h: f64) -> Result<PointForecast> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("step must be positive, got {h}")));
    }
    if est.theta_hat.len() != model.dim_theta() {
        return Err(Error::Shape {
            expected: model.dim_theta(),
            got: est.theta_hat.len(),
        });
    }
    let predicted = x_s + model.drift(x_s, &est.theta_hat) * h;
    let half = 2.0 * est.sigma_hat * h.sqrt();
    Ok(PointForecast {
        predicted,
        pi_lo: predicted - half,
        pi_hi: predicted + half,
    })
}

/// RMSE, RMSPE and interval coverage of a set of forecasts.
pub fn score(records: &[ForecastRecord]) -> Result<ForecastScore> {
    let count = records.len();
    if count == 0 {
        return Err(Error::data("no forecasts to score"));
    }
    let mut se = 0.0;
    let mut spe = 0.0;
    for r in records {
        if r.actual == 0.0 {
            return Err(Error::data(format!(
                "actual value at index {} is zero; percentage error undefined",
                r.index
            )));
        }
        let e = r.actual - r.predicted;
        se += e * e;
        spe += (e / r.actual).powi(2);
    }
    Ok(ForecastScore {
        rmse: (se / count as f64).sqrt(),
        rmspe: (spe / count as f64).sqrt(),
        pi_coverage_count: records.iter().filter(|r| r.covered()).count(),
        count,
    })
}

/// Forecasts every observation after `eval_start`, refitting on
/// `from_index..=s` every `refit_every` origins.
pub fn rolling_evaluate(
    model: &dyn DriftModel,
    path: &SamplePath,
    cfg: &RollingConfig,
) -> Result<(ForecastScore, Vec<ForecastRecord>)> {
    let n = path.n();
    if cfg.refit_every == 0 {
        return Err(Error::domain("refit_every must be at least 1"));
    }
    let min_fit = (model.dim_theta() + 2).max(3);
    if cfg.eval_start + 1 < cfg.from_index + min_fit {
        return Err(Error::domain(format!(
            "eval_start {} leaves fewer than {min_fit} observations after from_index {}",
            cfg.eval_start, cfg.from_index
        )));
    }
    if cfg.eval_start >= n {
        return Err(Error::domain(format!(
            "eval_start {} must be below the last index {n}",
            cfg.eval_start
        )));
    }

    let mut records = Vec::with_capacity(n - cfg.eval_start);
    let mut est: Option<ParamEstimate> = None;
    for s in cfg.eval_start..n {
        if est.is_none() || (s - cfg.eval_start).is_multiple_of(cfg.refit_every) {
            let fitted = path
                .slice(cfg.from_index, s)
                .and_then(|p| fit(model, &p, &cfg.mdpde))
                .map_err(|e| Error::Forecast {
                    origin: s,
                    source: Box::new(e),
                })?;
            est = Some(fitted);
        }
        let e = est.as_ref().unwrap();
        let f = one_step_forecast(model, e, path.values[s], path.step)?;
        records.push(ForecastRecord {
            index: s + 1,
            predicted: f.predicted,
            pi_lo: f.pi_lo,
            pi_hi: f.pi_hi,
            actual: path.values[s + 1],
            estimate_used: e.clone(),
        });
    }
    Ok((score(&records)?, records))
}

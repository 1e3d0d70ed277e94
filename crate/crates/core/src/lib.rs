// SPDX-License-Identifier: MIT OR Apache-2.0

//! Robust detection of dispersion-parameter changes in discretely observed
//! diffusion processes.
//!
//! The pipeline is: fit the drift and dispersion parameters with a minimum
//! density power divergence estimator ([`estimate`]), standardize the
//! one-step increments into residuals, trim their squares, and scan the
//! centered partial sums with a CUSUM statistic whose null law is the
//! supremum of a Brownian bridge ([`changepoint`]). Simulation, forecasting
//! and a Monte Carlo harness sit around that core.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod changepoint;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod forecast;
pub mod model;
pub mod seed;
pub mod simulate;

pub use changepoint::{
    bb_sup_tail, binary_segmentation, critical_value, cusum_statistic, residuals, run_test, trim_value, ResidualSeries,
    Segment, SegmentationConfig, SegmentationResult, TestOutcome, TrimKind, TrimSpec,
};
pub use error::{Error, Result};
pub use estimate::{fit, mdpde_objective, MdpdeConfig, OptimizerConfig, ParamEstimate};
pub use experiments::{
    emit_curves, emit_table, parse_table, preset, run_mc, CurveAxis, McCell, McSpec, McTable, Preset, TableFormat,
    TestId,
};
pub use forecast::{
    one_step_forecast, rolling_evaluate, score, ForecastRecord, ForecastScore, PointForecast, RollingConfig,
};
pub use model::{evaluate_drift, CustomDrift, DriftModel, Interval, ModelKind, OuCentered, OuMeanReverting};
pub use simulate::{
    contaminate, simulate_path, simulate_path_with_change, simulate_path_with_changes, ContaminationSpec, ParamChange,
    SamplePath, SimConfig, StepRule,
};

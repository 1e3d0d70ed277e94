// SPDX-License-Identifier: MIT OR Apache-2.0

//! Drift models for diffusions `dX = a(X, θ) dt + σ dW`.
//!
//! A model supplies the drift `a(x, θ)`, the box of admissible `θ` and the
//! admissible range of the dispersion `σ`. Two Ornstein-Uhlenbeck forms are
//! built in; anything else can be registered through [`CustomDrift`].
//!
//! The asymptotic theory behind the tests needs the drift to be Lipschitz
//! in `x`, the process to be ergodic with all moments finite, and the drift
//! to be smooth in `θ` with polynomial growth. None of that can be checked
//! from a closure, so custom drifts carry those conditions as the caller's
//! responsibility.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub const DEFAULT_RATE_BOUNDS: Interval = Interval::new(0.01, 1000.0);
pub const DEFAULT_MEAN_BOUNDS: Interval = Interval::new(-1.0e6, 1.0e6);
pub const DEFAULT_SIGMA_BOUNDS: Interval = Interval::new(0.01, 1000.0);

/// Scalar drift function together with its parameter space.
pub trait DriftModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn dim_theta(&self) -> usize;

    /// `a(x, θ)`. No bounds or shape checks; see [`evaluate_drift`].
    fn drift(&self, x: f64, theta: &[f64]) -> f64;

    fn theta_bounds(&self) -> &[Interval];

    fn sigma_bounds(&self) -> Interval;

    /// Starting value for `θ` computed from an equally spaced sample.
    ///
    /// The default is the all-ones vector projected into the bounds.
    fn initial_theta(&self, values: &[f64], step: f64) -> Vec<f64> {
        let _ = (values, step);
        self.theta_bounds().iter().map(|b| b.clamp(1.0)).collect()
    }
}

pub(crate) fn check_theta(model: &dyn DriftModel, theta: &[f64]) -> Result<()> {
    if theta.len() != model.dim_theta() {
        return Err(Error::Shape {
            expected: model.dim_theta(),
            got: theta.len(),
        });
    }
    for (i, (t, b)) in theta.iter().zip(model.theta_bounds()).enumerate() {
        if !b.contains(*t) {
            return Err(Error::domain(format!(
                "theta[{i}] = {t} outside [{}, {}] for model {}",
                b.lo,
                b.hi,
                model.name()
            )));
        }
    }
    Ok(())
}

/// Checked drift evaluation.
pub fn evaluate_drift(model: &dyn DriftModel, x: f64, theta: &[f64]) -> Result<f64> {
    check_theta(model, theta)?;
    Ok(model.drift(x, theta))
}

/// `dX = -θ X dt + σ dW`.
#[derive(Clone, Debug, PartialEq)]
pub struct OuCentered {
    pub theta_bounds: [Interval; 1],
    pub sigma_bounds: Interval,
}

impl Default for OuCentered {
    fn default() -> Self {
        Self {
            theta_bounds: [DEFAULT_RATE_BOUNDS],
            sigma_bounds: DEFAULT_SIGMA_BOUNDS,
        }
    }
}

impl DriftModel for OuCentered {
    fn name(&self) -> &str {
        "ou-centered"
    }

    fn dim_theta(&self) -> usize {
        1
    }

    #[inline]
    fn drift(&self, x: f64, theta: &[f64]) -> f64 {
        -theta[0] * x
    }

    fn theta_bounds(&self) -> &[Interval] {
        &self.theta_bounds
    }

    fn sigma_bounds(&self) -> Interval {
        self.sigma_bounds
    }

    /// Least squares of `ΔX/h` on `-X`.
    fn initial_theta(&self, values: &[f64], step: f64) -> Vec<f64> {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for w in values.windows(2) {
            sxy += w[0] * (w[1] - w[0]);
            sxx += w[0] * w[0];
        }
        let raw = if sxx > 0.0 { -sxy / (step * sxx) } else { f64::NAN };
        let b = self.theta_bounds[0];
        vec![if raw.is_finite() { b.clamp(raw) } else { b.clamp(1.0) }]
    }
}

/// `dX = λ(μ - X) dt + σ dW`, with `θ = (λ, μ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OuMeanReverting {
    pub theta_bounds: [Interval; 2],
    pub sigma_bounds: Interval,
}

impl Default for OuMeanReverting {
    fn default() -> Self {
        Self {
            theta_bounds: [DEFAULT_RATE_BOUNDS, DEFAULT_MEAN_BOUNDS],
            sigma_bounds: DEFAULT_SIGMA_BOUNDS,
        }
    }
}

impl DriftModel for OuMeanReverting {
    fn name(&self) -> &str {
        "ou-mean-reverting"
    }

    fn dim_theta(&self) -> usize {
        2
    }

    #[inline]
    fn drift(&self, x: f64, theta: &[f64]) -> f64 {
        theta[0] * (theta[1] - x)
    }

    fn theta_bounds(&self) -> &[Interval] {
        &self.theta_bounds
    }

    fn sigma_bounds(&self) -> Interval {
        self.sigma_bounds
    }

    /// Least squares of `ΔX/h` on `[1, X]`: slope is `-λ`, intercept `λμ`.
    fn initial_theta(&self, values: &[f64], step: f64) -> Vec<f64> {
        let [lb, mb] = self.theta_bounds;
        let m = (values.len() - 1) as f64;
        let x_mean = values[..values.len() - 1].iter().sum::<f64>() / m;
        let y_mean = (values[values.len() - 1] - values[0]) / (m * step);
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for w in values.windows(2) {
            let dx = w[0] - x_mean;
            sxy += dx * ((w[1] - w[0]) / step - y_mean);
            sxx += dx * dx;
        }
        let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
        let lambda = -slope;
        if lambda.is_finite() && lambda > 0.0 {
            let mu = x_mean + y_mean / lambda;
            vec![lb.clamp(lambda), mb.clamp(mu)]
        } else {
            vec![lb.clamp(1.0), mb.clamp(x_mean)]
        }
    }
}

type DriftFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// User-registered drift.
#[derive(Clone)]
pub struct CustomDrift {
    name: String,
    drift: Arc<DriftFn>,
    theta_bounds: Vec<Interval>,
    sigma_bounds: Interval,
    initial: Option<Vec<f64>>,
}

impl CustomDrift {
    pub fn new<F>(
        name: impl Into<String>,
        theta_bounds: Vec<Interval>,
        sigma_bounds: Interval,
        drift: F,
    ) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(sigma_bounds.lo > 0.0 && sigma_bounds.hi >= sigma_bounds.lo) {
            return Err(Error::domain("sigma bounds must satisfy 0 < lo <= hi"));
        }
        if theta_bounds.iter().any(|b| !(b.lo <= b.hi)) {
            return Err(Error::domain("theta bounds must satisfy lo <= hi"));
        }
        Ok(Self {
            name: name.into(),
            drift: Arc::new(drift),
            theta_bounds,
            sigma_bounds,
            initial: None,
        })
    }

    /// Fixed starting value for the estimator, used instead of the default.
    pub fn with_initial_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        check_theta(&self, &theta)?;
        self.initial = Some(theta);
        Ok(self)
    }
}

impl fmt::Debug for CustomDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDrift")
            .field("name", &self.name)
            .field("theta_bounds", &self.theta_bounds)
            .field("sigma_bounds", &self.sigma_bounds)
            .finish_non_exhaustive()
    }
}

impl DriftModel for CustomDrift {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim_theta(&self) -> usize {
        self.theta_bounds.len()
    }

    fn drift(&self, x: f64, theta: &[f64]) -> f64 {
        (self.drift)(x, theta)
    }

    fn theta_bounds(&self) -> &[Interval] {
        &self.theta_bounds
    }

    fn sigma_bounds(&self) -> Interval {
        self.sigma_bounds
    }

    fn initial_theta(&self, _values: &[f64], _step: f64) -> Vec<f64> {
        match &self.initial {
            Some(t) => t.clone(),
            None => self.theta_bounds.iter().map(|b| b.clamp(1.0)).collect(),
        }
    }
}

/// Built-in models selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    OuCentered,
    OuMeanReverting,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OuCentered => "ou-centered",
            Self::OuMeanReverting => "ou-mean-reverting",
        }
    }

    pub fn build(self) -> Box<dyn DriftModel> {
        match self {
            Self::OuCentered => Box::new(OuCentered::default()),
            Self::OuMeanReverting => Box::new(OuMeanReverting::default()),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ou-centered" => Ok(Self::OuCentered),
            "ou-mean-reverting" => Ok(Self::OuMeanReverting),
            other => Err(Error::domain(format!(
                "unknown model '{other}'; expected 'ou-centered' or 'ou-mean-reverting'"
            ))),
        }
    }
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Euler-scheme path generation and additive outlier contamination.
//!
//! Paths are generated on a grid `δ = h / substeps` and every `substeps`-th
//! point is kept. Gaussian variates come from `rand_distr::StandardNormal`
//! (ziggurat) drawn from a ChaCha8 stream, see [`crate::seed`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_theta, DriftModel};
use crate::seed;

/// Equally spaced observations `X_{t_0}, ..., X_{t_n}` with `t_i = i·step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub step: f64,
    pub values: Vec<f64>,
    /// Standardized Wiener increments at the observation scale. Only present
    /// for exact-Euler paths (`substeps == 1`) that have not been modified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shocks: Option<Vec<f64>>,
}

impl SamplePath {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("step must be positive and finite, got {step}")));
        }
        if values.len() < 3 {
            return Err(Error::data(format!(
                "a path needs at least 3 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite observation at index {i}")));
        }
        Ok(Self {
            step,
            values,
            shocks: None,
        })
    }

    /// Number of increments.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.step)
    }

    /// Observations `start..=end` as a new path (shocks dropped).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if end >= self.values.len() || start >= end {
            return Err(Error::domain(format!(
                "invalid slice [{start}, {end}] of a path with {} observations",
                self.values.len()
            )));
        }
        Self::new(self.step, self.values[start..=end].to_vec())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::data(format!("non-finite observation at index {i}"))),
            None => Ok(()),
        }
    }
}

/// How the observation step is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Explicit(f64),
    /// `h = n^(-γ)`.
    Exponent(f64),
}

impl StepRule {
    pub fn step(self, n: usize) -> f64 {
        match self {
            Self::Explicit(h) => h,
            Self::Exponent(gamma) => (n as f64).powf(-gamma),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub step: StepRule,
    pub substeps: usize,
    pub x0: f64,
    pub seed: u64,
}

impl SimConfig {
    /// `h = n^-0.75`, 20 generation substeps per observation, `x0 = 0`.
    pub fn standard_design(n: usize, seed: u64) -> Self {
        Self {
            n,
            step: StepRule::Exponent(0.75),
            substeps: 20,
            x0: 0.0,
            seed,
        }
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_step(mut self, step: StepRule) -> Self {
        self.step = step;
        self
    }

    fn validate(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::domain(format!("n must be at least 2, got {}", self.n)));
        }
        if self.substeps == 0 {
            return Err(Error::domain("substeps must be at least 1"));
        }
        if !self.x0.is_finite() {
            return Err(Error::domain("x0 must be finite"));
        }
        let h = self.step.step(self.n);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("observation step must be positive, got {h}")));
        }
        Ok(h)
    }
}

/// Bernoulli-normal additive outliers: with probability `prob` an observation
/// is pushed away from zero by `|V|`, `V ~ N(0, var_v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub prob: f64,
    pub var_v: f64,
}

impl ContaminationSpec {
    pub fn new(prob: f64, var_v: f64) -> Result<Self> {
        let spec = Self { prob, var_v };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prob) {
            return Err(Error::domain(format!(
                "contamination probability {} not in [0, 1]",
                self.prob
            )));
        }
        if !(self.var_v >= 0.0 && self.var_v.is_finite()) {
            return Err(Error::domain(format!("outlier variance {} must be >= 0", self.var_v)));
        }
        Ok(())
    }
}

struct Regime<'a> {
    /// First generation step (0-based) that uses these parameters.
    from_step: usize,
    theta: &'a [f64],
    sigma: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    // sigma = 0 is allowed and gives the noise-free Euler recursion.
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )));
    }
    Ok(())
}

fn generate(model: &dyn DriftModel, regimes: &[Regime<'_>], cfg: &SimConfig) -> Result<SamplePath> {
    let h = cfg.validate()?;
    let delta = h / cfg.substeps as f64;
    let sqrt_delta = delta.sqrt();
    let mut rng = seed::rng(cfg.seed);

    let record = cfg.substeps == 1;
    let mut shocks = Vec::with_capacity(if record { cfg.n } else { 0 });
    let mut values = Vec::with_capacity(cfg.n + 1);
    values.push(cfg.x0);

    let mut x = cfg.x0;
    let mut regime = 0;
    let mut step_index = 0;
    for _ in 0..cfg.n {
        for _ in 0..cfg.substeps {
            while regime + 1 < regimes.len() && step_index >= regimes[regime + 1].from_step {
                regime += 1;
            }
            let r = &regimes[regime];
            let xi: f64 = rng.sample(StandardNormal);
            x = x + model.drift(x, r.theta) * delta + r.sigma * sqrt_delta * xi;
            if record {
                shocks.push(xi);
            }
            step_index += 1;
        }
        if !x.is_finite() {
            return Err(Error::data(format!(
                "simulated path diverged before observation {}",
                values.len()
            )));
        }
        values.push(x);
    }

    Ok(SamplePath {
        step: h,
        values,
        shocks: record.then_some(shocks),
    })
}

/// Euler path with constant parameters.
pub fn simulate_path(model: &dyn DriftModel, theta: &[f64], sigma: f64, cfg: &SimConfig) -> Result<SamplePath> {
    check_theta(model, theta)?;
    check_sigma(sigma)?;
    generate(
        model,
        &[Regime {
            from_step: 0,
            theta,
            sigma,
        }],
        cfg,
    )
}

/// Euler path whose parameters switch from `(theta0, sigma0)` to
/// `(theta1, sigma1)` at generation step `floor(change_frac · n · substeps)`.
///
/// Uses the same random stream as [`simulate_path`], so an identity change
/// reproduces it bit for bit.
pub fn simulate_path_with_change(
    model: &dyn DriftModel,
    theta0: &[f64],
    sigma0: f64,
    theta1: &[f64],
    sigma1: f64,
    change_frac: f64,
    cfg: &SimConfig,
) -> Result<SamplePath> {
    if !(change_frac > 0.0 && change_frac < 1.0) {
        return Err(Error::domain(format!("change fraction {change_frac} not in (0, 1)")));
    }
    check_theta(model, theta0)?;
    check_theta(model, theta1)?;
    check_sigma(sigma0)?;
    check_sigma(sigma1)?;
    let switch = (change_frac * (cfg.n * cfg.substeps) as f64).floor() as usize;
    generate(
        model,
        &[
            Regime {
                from_step: 0,
                theta: theta0,
                sigma: sigma0,
            },
            Regime {
                from_step: switch,
                theta: theta1,
                sigma: sigma1,
            },
        ],
        cfg,
    )
}

/// A parameter switch at generation step `floor(frac · n · substeps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamChange {
    pub frac: f64,
    pub theta: Vec<f64>,
    pub sigma: f64,
}

/// Euler path starting from `(theta0, sigma0)` and switching parameters at
/// each change in turn. Fractions must be strictly increasing in `(0, 1)`.
pub fn simulate_path_with_changes(
    model: &dyn DriftModel,
    theta0: &[f64],
    sigma0: f64,
    changes: &[ParamChange],
    cfg: &SimConfig,
) -> Result<SamplePath> {
    check_theta(model, theta0)?;
    check_sigma(sigma0)?;
    let mut regimes = vec![Regime {
        from_step: 0,
        theta: theta0,
        sigma: sigma0,
    }];
    let mut last = 0.0;
    for c in changes {
        if !(c.frac > last && c.frac < 1.0) {
            return Err(Error::domain(format!(
                "change fractions must increase within (0, 1); got {} after {last}",
                c.frac
            )));
        }
        check_theta(model, &c.theta)?;
        check_sigma(c.sigma)?;
        regimes.push(Regime {
            from_step: (c.frac * (cfg.n * cfg.substeps) as f64).floor() as usize,
            theta: &c.theta,
            sigma: c.sigma,
        });
        last = c.frac;
    }
    generate(model, &regimes, cfg)
}

/// Additive outliers `X^c_i = X_i + p_i |V_i| sign(X_i)` for `i = 0..=n`,
/// with `sign(0) = +1`.
///
/// One uniform and one normal are drawn per observation whatever `prob` is,
/// so paths contaminated with different `prob` under one seed share their
/// outlier magnitudes.
pub fn contaminate(path: &SamplePath, spec: &ContaminationSpec, seed: u64) -> Result<SamplePath> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let scale = spec.var_v.sqrt();
    let values = path
        .values
        .iter()
        .map(|&x| {
            let u: f64 = rng.random();
            let v: f64 = rng.sample::<f64, _>(StandardNormal) * scale;
            if u < spec.prob {
                let sign = if x < 0.0 { -1.0 } else { 1.0 };
                x + v.abs() * sign
            } else {
                x
            }
        })
        .collect();
    Ok(SamplePath {
        step: path.step,
        values,
        shocks: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OuCentered;
    use proptest::prelude::*;

    fn quadratic_variation(values: &[f64]) -> f64 {
        values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }

    #[test]
    fn path_validation() {
        assert!(SamplePath::new(0.1, vec![1.0, 2.0]).is_err());
        assert!(SamplePath::new(0.0, vec![1.0, 2.0, 3.0]).is_err());
        assert!(matches!(
            SamplePath::new(0.1, vec![1.0, f64::NAN, 3.0]),
            Err(Error::Data(_))
        ));
        let p = SamplePath::new(0.5, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.times().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(p.slice(1, 3).unwrap().values, vec![2.0, 3.0, 4.0]);
        assert!(p.slice(2, 2).is_err());
    }

    #[test]
    fn noise_free_recursion() {
        let cfg = SimConfig::standard_design(100, 7).with_substeps(1).with_x0(1.0);
        let path = simulate_path(&OuCentered::default(), &[1.0], 0.0, &cfg).unwrap();
        let h = path.step;
        for w in path.values.windows(2) {
            assert_eq!(w[1], w[0] + (-w[0]) * h);
        }
    }

    #[test]
    fn negative_sigma_is_rejected() {
        let cfg = SimConfig::standard_design(100, 7);
        assert!(matches!(
            simulate_path(&OuCentered::default(), &[1.0], -1.0, &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn same_seed_same_path() {
        let cfg = SimConfig::standard_design(500, 99);
        let m = OuCentered::default();
        let a = simulate_path(&m, &[1.0], 1.0, &cfg).unwrap();
        let b = simulate_path(&m, &[1.0], 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&m, &[1.0], 1.0, &SimConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn realized_quadratic_variation_matches_sigma() {
        let cfg = SimConfig::standard_design(1000, 2024);
        let path = simulate_path(&OuCentered::default(), &[1.0], 1.0, &cfg).unwrap();
        let qv = quadratic_variation(&path.values) / (1000.0 * path.step);
        assert!((qv - 1.0).abs() < 0.10, "qv = {qv}");
        assert!(path.shocks.is_none());
    }

    #[test]
    fn exact_euler_shocks_reconstruct_path() {
        let cfg = SimConfig::standard_design(300, 5).with_substeps(1).with_x0(0.3);
        let m = OuCentered::default();
        let path = simulate_path(&m, &[2.0], 1.5, &cfg).unwrap();
        let shocks = path.shocks.as_ref().unwrap();
        assert_eq!(shocks.len(), 300);
        let h = path.step;
        for (i, z) in shocks.iter().enumerate() {
            let prev = path.values[i];
            let expect = prev + m.drift(prev, &[2.0]) * h + 1.5 * h.sqrt() * z;
            assert_eq!(path.values[i + 1], expect);
        }
    }

    #[test]
    fn identity_change_reproduces_plain_path() {
        let cfg = SimConfig::standard_design(400, 31);
        let m = OuCentered::default();
        let a = simulate_path(&m, &[1.0], 1.0, &cfg).unwrap();
        let b = simulate_path_with_change(&m, &[1.0], 1.0, &[1.0], 1.0, 0.5, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dispersion_change_scales_second_half() {
        let cfg = SimConfig::standard_design(1000, 11);
        let m = OuCentered::default();
        let p = simulate_path_with_change(&m, &[1.0], 1.0, &[1.0], 1.5, 0.5, &cfg).unwrap();
        let first = quadratic_variation(&p.values[..=500]);
        let second = quadratic_variation(&p.values[500..]);
        let ratio = second / first;
        assert!((ratio / 2.25 - 1.0).abs() < 0.15, "ratio = {ratio}");
    }

    #[test]
    fn change_fraction_must_be_interior() {
        let cfg = SimConfig::standard_design(100, 1);
        let m = OuCentered::default();
        for frac in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(simulate_path_with_change(&m, &[1.0], 1.0, &[1.0], 2.0, frac, &cfg).is_err());
        }
    }

    #[test]
    fn degenerate_contamination_is_identity() {
        let cfg = SimConfig::standard_design(200, 3).with_substeps(1);
        let path = simulate_path(&OuCentered::default(), &[1.0], 1.0, &cfg).unwrap();
        for spec in [
            ContaminationSpec::new(0.0, 1.0).unwrap(),
            ContaminationSpec::new(0.3, 0.0).unwrap(),
        ] {
            let c = contaminate(&path, &spec, 17).unwrap();
            assert_eq!(c.values, path.values);
            assert!(c.shocks.is_none());
        }
        assert!(ContaminationSpec::new(1.2, 1.0).is_err());
        assert!(ContaminationSpec::new(0.1, -1.0).is_err());
    }

    #[test]
    fn full_contamination_has_half_normal_displacements() {
        let n = 200_000;
        let path = SamplePath::new(0.01, (0..=n).map(|i| if i % 2 == 0 { 1.0 } else { -2.0 }).collect()).unwrap();
        let c = contaminate(&path, &ContaminationSpec::new(1.0, 1.0).unwrap(), 8).unwrap();
        let disp: Vec<f64> = c.values.iter().zip(&path.values).map(|(a, b)| a - b).collect();
        assert!(disp.iter().all(|d| *d != 0.0));
        let mean_abs = disp.iter().map(|d| d.abs()).sum::<f64>() / disp.len() as f64;
        let half_normal_mean = (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (mean_abs / half_normal_mean - 1.0).abs() < 0.05,
            "mean |d| = {mean_abs}"
        );
    }

    #[test]
    fn zero_observations_are_pushed_upward() {
        let path = SamplePath::new(0.1, vec![0.0; 50]).unwrap();
        let c = contaminate(&path, &ContaminationSpec::new(1.0, 1.0).unwrap(), 2).unwrap();
        assert!(c.values.iter().all(|v| *v >= 0.0));
    }

    proptest! {
        #[test]
        fn contamination_pushes_away_from_zero(seed in any::<u64>(), prob in 0.0f64..1.0) {
            let cfg = SimConfig::standard_design(200, seed);
            let path = simulate_path(&OuCentered::default(), &[1.0], 1.0, &cfg).unwrap();
            let c = contaminate(&path, &ContaminationSpec::new(prob, 2.0).unwrap(), seed ^ 1).unwrap();
            for (xc, x) in c.values.iter().zip(&path.values) {
                if xc != x && *x != 0.0 {
                    prop_assert_eq!((xc - x).signum(), x.signum());
                }
            }
        }
    }

    #[test]
    fn multiple_changes() {
        let m = OuCentered::default();
        let cfg = SimConfig::standard_design(3000, 21);
        let changes = [
            ParamChange {
                frac: 1.0 / 3.0,
                theta: vec![1.0],
                sigma: 1.5,
            },
            ParamChange {
                frac: 2.0 / 3.0,
                theta: vec![1.0],
                sigma: 1.0,
            },
        ];
        let p = simulate_path_with_changes(&m, &[1.0], 1.0, &changes, &cfg).unwrap();
        let qv = |a: usize, b: usize| {
            p.values[a..=b].windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / ((b - a) as f64 * p.step)
        };
        assert!((qv(0, 1000) - 1.0).abs() < 0.15);
        assert!((qv(1000, 2000) - 2.25).abs() < 0.3);
        assert!((qv(2000, 3000) - 1.0).abs() < 0.15);

        let one = simulate_path_with_changes(&m, &[1.0], 1.0, &changes[..1], &cfg).unwrap();
        let direct = simulate_path_with_change(&m, &[1.0], 1.0, &[1.0], 1.5, 1.0 / 3.0, &cfg).unwrap();
        assert_eq!(one, direct);

        let bad = [changes[1].clone(), changes[0].clone()];
        assert!(simulate_path_with_changes(&m, &[1.0], 1.0, &bad, &cfg).is_err());
    }
}

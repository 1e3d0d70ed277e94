// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimum density power divergence estimation of `(θ, σ)`.
//!
//! With `e_i = X_{t_i} - X_{t_{i-1}} - a(X_{t_{i-1}}, θ) h` the per-increment
//! loss is
//!
//! ```text
//! α > 0:  σ^-α [ (1+α)^-1/2 - (1 + 1/α) exp(-α e_i² / (2σ²h)) ]
//! α = 0:  e_i² / (σ²h) + log σ²
//! ```
//!
//! and the estimate minimizes its average over the bounded parameter box.
//! `α = 0` is the Gaussian quasi-likelihood; larger `α` trades efficiency
//! for resistance to outlying increments.

mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_theta, DriftModel, Interval};
use crate::simulate::SamplePath;

use simplex::{minimize, SimplexOptions};

/// Weight of the quadratic penalty applied outside the parameter box.
const BOUND_PENALTY: f64 = 1.0e4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub tol_x: f64,
    pub tol_f: f64,
    pub multistart_count: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol_x: 1e-8,
            tol_f: 1e-10,
            multistart_count: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpdeConfig {
    pub alpha: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl MdpdeConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let o = &self.optimizer;
        if !(o.tol_x > 0.0 && o.tol_f > 0.0) {
            return Err(Error::domain("optimizer tolerances must be positive"));
        }
        if o.multistart_count == 0 {
            return Err(Error::domain("multistart_count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub theta_hat: Vec<f64>,
    pub sigma_hat: f64,
    pub alpha: f64,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

/// Average loss over a path, without argument checks.
pub(crate) struct Objective<'a> {
    model: &'a dyn DriftModel,
    values: &'a [f64],
    step: f64,
    alpha: f64,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(model: &'a dyn DriftModel, path: &'a SamplePath, alpha: f64) -> Self {
        Self {
            model,
            values: &path.values,
            step: path.step,
            alpha,
        }
    }

    pub(crate) fn value(&self, theta: &[f64], sigma: f64) -> f64 {
        let h = self.step;
        let n = (self.values.len() - 1) as f64;
        let residual = |w: &[f64]| w[1] - w[0] - self.model.drift(w[0], theta) * h;
        let s2h = sigma * sigma * h;
        if self.alpha == 0.0 {
            let ss: f64 = self.values.windows(2).map(|w| residual(w).powi(2)).sum();
            ss / (n * s2h) + (sigma * sigma).ln()
        } else {
            let a = self.alpha;
            let k = -a / (2.0 * s2h);
            let mean_exp = self
                .values
                .windows(2)
                .map(|w| (k * residual(w).powi(2)).exp())
                .sum::<f64>()
                / n;
            sigma.powf(-a) * ((1.0 + a).powf(-0.5) - (1.0 + 1.0 / a) * mean_exp)
        }
    }
}

/// Average divergence loss `(1/n) Σ H_i^α(θ, σ)` of a path.
pub fn mdpde_objective(
    model: &dyn DriftModel,
    theta: &[f64],
    sigma: f64,
    path: &SamplePath,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if theta.len() != model.dim_theta() {
        return Err(Error::Shape {
            expected: model.dim_theta(),
            got: theta.len(),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(path.step > 0.0) || path.values.len() < 3 {
        return Err(Error::data("path needs a positive step and at least 3 observations"));
    }
    path.check_finite()?;
    Ok(Objective::new(model, path, alpha).value(theta, sigma))
}

fn project(z: &[f64], bounds: &[Interval]) -> (Vec<f64>, f64) {
    let mut dist2 = 0.0;
    let p = z
        .iter()
        .zip(bounds)
        .map(|(&v, b)| {
            let c = b.clamp(v);
            dist2 += (v - c) * (v - c);
            c
        })
        .collect();
    (p, dist2)
}

fn jitter(v: f64, factor: f64) -> f64 {
    if v == 0.0 {
        factor - 1.0
    } else {
        v * factor
    }
}

/// Starting points: the moment-based initializer followed by deterministic
/// multiplicative perturbations of it.
fn starting_points(model: &dyn DriftModel, path: &SamplePath, count: usize, bounds: &[Interval]) -> Vec<Vec<f64>> {
    const PATTERN: [(f64, f64); 4] = [(1.25, 1.25), (0.8, 0.8), (1.25, 0.8), (0.8, 1.25)];
    let n = path.n() as f64;
    let qv: f64 = path.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let sigma0 = (qv / (n * path.step)).sqrt();
    let mut base = model.initial_theta(&path.values, path.step);
    base.push(if sigma0.is_finite() { sigma0 } else { 1.0 });
    let base = project(&base, bounds).0;

    let p = model.dim_theta();
    let mut starts = vec![base.clone()];
    for j in 1..count {
        let (ft, fs) = PATTERN[(j - 1) % 4];
        let strength = (1 + (j - 1) / 4) as f64;
        let z: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = if i < p { ft } else { fs };
                jitter(v, f.powf(strength))
            })
            .collect();
        starts.push(project(&z, bounds).0);
    }
    starts
}

/// Minimizes the divergence loss over the parameter box with a multistart
/// simplex search; points outside the box are scored at their projection
/// plus a quadratic penalty.
pub fn fit(model: &dyn DriftModel, path: &SamplePath, cfg: &MdpdeConfig) -> Result<ParamEstimate> {
    cfg.validate()?;
    let p = model.dim_theta();
    if path.values.len() < p + 2 {
        return Err(Error::data(format!(
            "path with {} observations is too short to fit {} drift parameters",
            path.values.len(),
            p
        )));
    }
    path.check_finite()?;

    let mut bounds = model.theta_bounds().to_vec();
    bounds.push(model.sigma_bounds());
    let objective = Objective::new(model, path, cfg.alpha);
    let score = |z: &[f64]| objective.value(&z[..p], z[p]);
    let penalized = |z: &[f64]| {
        let (proj, dist2) = project(z, &bounds);
        score(&proj) + BOUND_PENALTY * dist2
    };

    let opts = SimplexOptions {
        max_iters: cfg.optimizer.max_iters,
        tol_x: cfg.optimizer.tol_x,
        tol_f: cfg.optimizer.tol_f,
    };

    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    for start in starting_points(model, path, cfg.optimizer.multistart_count, &bounds) {
        let run = minimize(penalized, &start, &opts);
        let (z, _) = project(&run.x, &bounds);
        let f = score(&z);
        if !f.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((z, f, run.iterations, run.converged));
        }
    }

    let (z, f, iterations, converged) = best.ok_or_else(|| {
        Error::Estimation(format!(
            "no starting point produced a finite objective for model {}",
            model.name()
        ))
    })?;
    let theta_hat = z[..p].to_vec();
    debug_assert!(check_theta(model, &theta_hat).is_ok());
    Ok(ParamEstimate {
        theta_hat,
        sigma_hat: z[p],
        alpha: cfg.alpha,
        objective_value: f,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CustomDrift, OuCentered, OuMeanReverting, DEFAULT_SIGMA_BOUNDS};
    use crate::simulate::{contaminate, simulate_path, ContaminationSpec, SimConfig};
    use proptest::prelude::*;

    fn zero_drift() -> CustomDrift {
        CustomDrift::new("zero", vec![], DEFAULT_SIGMA_BOUNDS, |_, _| 0.0).unwrap()
    }

    fn exact_euler(n: usize, seed: u64) -> SamplePath {
        let cfg = SimConfig::standard_design(n, seed).with_substeps(1);
        simulate_path(&OuCentered::default(), &[1.0], 1.0, &cfg).unwrap()
    }

    /// Quasi-likelihood written out term by term.
    fn qml_direct(model: &dyn DriftModel, theta: &[f64], sigma: f64, path: &SamplePath) -> f64 {
        let h = path.step;
        let n = path.n();
        let mut total = 0.0;
        for i in 1..=n {
            let e = path.values[i] - path.values[i - 1] - model.drift(path.values[i - 1], theta) * h;
            total += e * e / (sigma * sigma * h) + (sigma * sigma).ln();
        }
        total / n as f64
    }

    #[test]
    fn alpha_zero_matches_quasi_likelihood() {
        let path = exact_euler(500, 1);
        let m = OuCentered::default();
        for (theta, sigma) in [(1.0, 1.0), (0.3, 2.5), (7.0, 0.4)] {
            let got = mdpde_objective(&m, &[theta], sigma, &path, 0.0).unwrap();
            let want = qml_direct(&m, &[theta], sigma, &path);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn zero_residuals_hit_the_lower_envelope() {
        // Noise-free path with the true drift: every residual is zero up to rounding.
        let cfg = SimConfig::standard_design(100, 0).with_substeps(1).with_x0(2.0);
        let m = OuCentered::default();
        let path = simulate_path(&m, &[1.0], 0.0, &cfg).unwrap();
        for (alpha, sigma) in [(0.2, 1.0), (0.5, 0.7), (1.0, 3.0)] {
            let got = mdpde_objective(&m, &[1.0], sigma, &path, alpha).unwrap();
            let want = sigma.powf(-alpha) * ((1.0 + alpha).powf(-0.5) - (1.0 + 1.0 / alpha));
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn objective_argument_errors() {
        let path = exact_euler(50, 2);
        let m = OuCentered::default();
        assert!(matches!(
            mdpde_objective(&m, &[1.0], 0.0, &path, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mdpde_objective(&m, &[1.0], 1.0, &path, -0.1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mdpde_objective(&m, &[1.0, 2.0], 1.0, &path, 0.0),
            Err(Error::Shape { .. })
        ));
        let mut bad = path.clone();
        bad.values[10] = f64::INFINITY;
        assert!(matches!(
            mdpde_objective(&m, &[1.0], 1.0, &bad, 0.0),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn zero_drift_closed_form() {
        let path = exact_euler(400, 3);
        let z = zero_drift();
        let n = path.n() as f64;
        let s: f64 = path.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / (n * path.step);
        let est = fit(&z, &path, &MdpdeConfig::new(0.0)).unwrap();
        assert!((est.sigma_hat - s.sqrt()).abs() < 1e-6 * s.sqrt());
        assert!((est.objective_value - (1.0 + s.ln())).abs() < 1e-10);
        let at_closed_form = mdpde_objective(&z, &[], s.sqrt(), &path, 0.0).unwrap();
        assert!((at_closed_form - (1.0 + s.ln())).abs() < 1e-12);
    }

    #[test]
    fn qmle_recovers_parameters_on_exact_euler_path() {
        let n = 3000;
        let path = exact_euler(n, 4);
        let est = fit(&OuCentered::default(), &path, &MdpdeConfig::new(0.0)).unwrap();
        assert!(est.converged);
        // θ̂ has standard error √(2θ / (n h)) for the centered OU.
        let se_theta = (2.0 / (n as f64 * path.step)).sqrt();
        assert!((est.theta_hat[0] - 1.0).abs() < 3.0 * se_theta, "{est:?}");
        let se_sigma = 1.0 / (2.0 * n as f64).sqrt();
        assert!((est.sigma_hat - 1.0).abs() < 9.0 * se_sigma, "{est:?}");
    }

    #[test]
    fn profile_identity_at_alpha_zero() {
        let path = exact_euler(1000, 5);
        let m = OuCentered::default();
        let est = fit(&m, &path, &MdpdeConfig::new(0.0)).unwrap();
        let h = path.step;
        let theta = est.theta_hat[0];
        let ss: f64 = path
            .values
            .windows(2)
            .map(|w| (w[1] - w[0] - m.drift(w[0], &[theta]) * h).powi(2))
            .sum();
        let closed = (ss / (path.n() as f64 * h)).sqrt();
        assert!((est.sigma_hat - closed).abs() < 1e-6, "{} vs {closed}", est.sigma_hat);
    }

    #[test]
    fn small_alpha_approaches_quasi_likelihood() {
        let path = exact_euler(1000, 6);
        let m = OuCentered::default();
        let e0 = fit(&m, &path, &MdpdeConfig::new(0.0)).unwrap();
        let e1 = fit(&m, &path, &MdpdeConfig::new(0.001)).unwrap();
        assert!((e0.sigma_hat - e1.sigma_hat).abs() < 1e-2 * e0.sigma_hat);
        assert!((e0.theta_hat[0] - e1.theta_hat[0]).abs() < 2e-2 * e0.theta_hat[0]);
    }

    #[test]
    fn robust_sigma_below_qmle_under_contamination() {
        let m = OuCentered::default();
        let spec = ContaminationSpec::new(0.05, 1.0).unwrap();
        let mut below = 0;
        let reps = 20;
        for seed in 0..reps {
            let clean = simulate_path(&m, &[1.0], 1.0, &SimConfig::standard_design(1000, seed)).unwrap();
            let path = contaminate(&clean, &spec, seed + 1000).unwrap();
            let ml = fit(&m, &path, &MdpdeConfig::new(0.0)).unwrap();
            let robust = fit(&m, &path, &MdpdeConfig::new(0.3)).unwrap();
            if robust.sigma_hat < ml.sigma_hat {
                below += 1;
            }
        }
        assert!(below * 2 > reps, "{below}/{reps}");
    }

    #[test]
    fn constant_path_drives_sigma_to_lower_bound() {
        let path = SamplePath::new(0.01, vec![2.0; 200]).unwrap();
        let m = OuCentered::default();
        let est = fit(&m, &path, &MdpdeConfig::new(0.0)).unwrap();
        assert!((est.sigma_hat - m.sigma_bounds.lo).abs() < 1e-9, "{est:?}");
        assert!(est.objective_value.is_finite());
        let est = fit(
            &m,
            &SamplePath::new(0.01, vec![0.0; 200]).unwrap(),
            &MdpdeConfig::new(0.3),
        )
        .unwrap();
        assert!(est.objective_value.is_finite());
    }

    #[test]
    fn returned_point_beats_every_start() {
        let m = OuMeanReverting::default();
        let cfg = SimConfig {
            n: 400,
            step: crate::simulate::StepRule::Explicit(1.0 / 250.0),
            substeps: 5,
            x0: 15.0,
            seed: 8,
        };
        let path = simulate_path(&m, &[20.0, 14.0], 12.0, &cfg).unwrap();
        let mut bounds = m.theta_bounds().to_vec();
        bounds.push(m.sigma_bounds());
        for alpha in [0.0, 0.2] {
            let est = fit(&m, &path, &MdpdeConfig::new(alpha)).unwrap();
            for s in starting_points(&m, &path, 5, &bounds) {
                let f0 = mdpde_objective(&m, &s[..2], s[2], &path, alpha).unwrap();
                assert!(est.objective_value <= f0);
            }
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let path = exact_euler(200, 9);
        let mut cfg = MdpdeConfig::new(0.2);
        cfg.optimizer.max_iters = 2;
        let est = fit(&OuCentered::default(), &path, &cfg).unwrap();
        assert!(!est.converged);
        assert!(est.iterations <= 2);
    }

    #[test]
    fn fit_rejects_bad_config() {
        let path = exact_euler(50, 2);
        assert!(fit(&OuCentered::default(), &path, &MdpdeConfig::new(-1.0)).is_err());
        let mut cfg = MdpdeConfig::new(0.1);
        cfg.optimizer.multistart_count = 0;
        assert!(fit(&OuCentered::default(), &path, &cfg).is_err());
    }

    #[test]
    fn all_starts_failing_is_an_estimation_error() {
        let bad = CustomDrift::new("nan", vec![Interval::new(0.0, 1.0)], DEFAULT_SIGMA_BOUNDS, |_, _| {
            f64::NAN
        })
        .unwrap();
        let path = exact_euler(50, 2);
        assert!(matches!(
            fit(&bad, &path, &MdpdeConfig::new(0.0)),
            Err(Error::Estimation(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn divergence_loss_stays_in_envelope(
            seed in any::<u64>(), theta in 0.01f64..20.0, sigma in 0.05f64..20.0, alpha in 0.01f64..2.0
        ) {
            let cfg = SimConfig::standard_design(60, seed).with_substeps(1);
            let path = simulate_path(&OuCentered::default(), &[1.0], 1.0, &cfg).unwrap();
            let v = mdpde_objective(&OuCentered::default(), &[theta], sigma, &path, alpha).unwrap();
            let scale = sigma.powf(-alpha);
            let lo = scale * ((1.0 + alpha).powf(-0.5) - (1.0 + 1.0 / alpha));
            let hi = scale * (1.0 + alpha).powf(-0.5);
            prop_assert!(v >= lo - 1e-12 * lo.abs() && v <= hi + 1e-12 * hi.abs());
        }

        #[test]
        fn objective_is_additive_over_increments(seed in any::<u64>(), alpha in 0.0f64..1.0) {
            // The loss reads only (left endpoint, increment) pairs, never t_i.
            let cfg = SimConfig::standard_design(80, seed).with_substeps(1).with_x0(0.5);
            let path = simulate_path(&OuCentered::default(), &[1.0], 1.0, &cfg).unwrap();
            let tail = path.slice(1, path.n()).unwrap();
            let head_inc = SamplePath::new(path.step, path.values[..path.n()].to_vec()).unwrap();
            let m = OuCentered::default();
            let full = mdpde_objective(&m, &[1.0], 1.0, &path, alpha).unwrap() * path.n() as f64;
            let parts = mdpde_objective(&m, &[1.0], 1.0, &tail, alpha).unwrap() * tail.n() as f64
                + mdpde_objective(&m, &[1.0], 1.0, &head_inc, alpha).unwrap() * head_inc.n() as f64
                - mdpde_objective(&m, &[1.0], 1.0, &path.slice(1, path.n() - 1).unwrap(), alpha).unwrap()
                    * (path.n() - 2) as f64;
            prop_assert!((full - parts).abs() < 1e-9 * full.abs().max(1.0));
        }
    }
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo size and power studies.
//!
//! Replication `r` at sample size `n` draws its path from the seed
//! `hash64(hash64(base_seed, n), r)` and its outliers from a second stream
//! derived from that seed. Every configured test runs on the same path, and
//! the counts are aggregated after all replications finish, so the table is
//! identical for any number of worker threads.

mod presets;
mod table;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::changepoint::{cusum_statistic, residuals, TrimKind, TrimSpec};
use crate::error::{Error, Result};
use crate::estimate::{fit, MdpdeConfig, OptimizerConfig};
use crate::model::{DriftModel, ModelKind};
use crate::seed::{hash64, PURPOSE_CONTAMINATION};
use crate::simulate::{contaminate, simulate_path, simulate_path_with_change, ContaminationSpec, SimConfig, StepRule};

pub use presets::{preset, CurveAxis, Preset, PRESET_NAMES};
pub use table::{emit_curves, emit_table, parse_table, TableFormat};

/// Share of failed replications above which a cell is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub theta: Vec<f64>,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltParams {
    pub theta: Vec<f64>,
    pub sigma: f64,
    pub change_frac: f64,
}

fn default_model() -> ModelKind {
    ModelKind::OuCentered
}
fn default_substeps() -> usize {
    20
}
fn default_true() -> bool {
    true
}
fn default_level() -> f64 {
    0.05
}

fn default_gamma() -> f64 {
    0.75
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    #[serde(default = "default_model")]
    pub model: ModelKind,
    pub n_list: Vec<usize>,
    pub reps: usize,
    /// Observation step `h = n^-gamma`.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub x0: f64,
    pub null_params: Params,
    #[serde(default)]
    pub alt_params: Option<AltParams>,
    #[serde(default)]
    pub contamination: Option<ContaminationSpec>,
    /// Adds the untrimmed quasi-likelihood test.
    #[serde(default = "default_true")]
    pub include_naive: bool,
    pub alphas: Vec<f64>,
    pub trims: Vec<TrimSpec>,
    #[serde(default = "default_level")]
    pub level: f64,
    pub base_seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl McSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::domain("reps must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::domain(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain("gamma must be positive"));
        }
        if let Some(c) = &self.contamination {
            c.validate()?;
        }
        for t in &self.trims {
            t.validate()?;
        }
        for &a in &self.alphas {
            MdpdeConfig::new(a).validate()?;
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 3) {
            return Err(Error::domain(format!("sample size {n} is too small")));
        }
        Ok(())
    }

    /// Tests run on every replication, in a fixed order.
    pub fn tests(&self) -> Vec<TestId> {
        let mut tests = Vec::new();
        if self.include_naive {
            tests.push(TestId::naive());
        }
        for &alpha in &self.alphas {
            for trim in &self.trims {
                let id = TestId {
                    kind: trim.kind,
                    alpha,
                    m: (trim.kind != TrimKind::None).then_some(trim.m),
                };
                if !tests.contains(&id) {
                    tests.push(id);
                }
            }
        }
        tests
    }
}

/// One test configuration: trimming, divergence exponent and `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestId {
    pub kind: TrimKind,
    pub alpha: f64,
    pub m: Option<f64>,
}

impl TestId {
    pub fn naive() -> Self {
        Self {
            kind: TrimKind::None,
            alpha: 0.0,
            m: None,
        }
    }

    pub fn trim(&self) -> TrimSpec {
        match (self.kind, self.m) {
            (TrimKind::HardClip, Some(m)) => TrimSpec::hard(m),
            (TrimKind::Tent, Some(m)) => TrimSpec::tent(m),
            _ => TrimSpec::none(),
        }
    }

    /// `T_n`, `T1[a=0.2,M=6.63]`, `T2[...]`, or `T0[a=...]` for an untrimmed
    /// robust fit.
    pub fn label(&self) -> String {
        match (self.kind, self.m) {
            (TrimKind::None, _) if self.alpha == 0.0 => "T_n".to_string(),
            (TrimKind::None, _) => format!("T0[a={}]", self.alpha),
            (TrimKind::HardClip, Some(m)) => format!("T1[a={},M={}]", self.alpha, m),
            (TrimKind::Tent, Some(m)) => format!("T2[a={},M={}]", self.alpha, m),
            (k, m) => format!("{}[a={},M={:?}]", k.as_str(), self.alpha, m),
        }
    }

    fn sort_key(&self) -> (TrimKind, u64, u64) {
        let m = self.m.unwrap_or(0.0);
        // Larger M first, matching the usual table layout.
        (self.kind, !m.to_bits(), self.alpha.to_bits())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub n: usize,
    pub test: TestId,
    pub level: f64,
    pub reps: usize,
    pub rejections: usize,
    pub failures: usize,
    /// Rejections over successful replications.
    pub frequency: f64,
    pub mc_stderr: f64,
    pub flagged: bool,
}

impl McCell {
    fn new(n: usize, test: TestId, level: f64, reps: usize, rejections: usize, failures: usize) -> Self {
        let trials = reps - failures;
        let frequency = if trials > 0 {
            rejections as f64 / trials as f64
        } else {
            0.0
        };
        let mc_stderr = if trials > 0 {
            (frequency * (1.0 - frequency) / trials as f64).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            test,
            level,
            reps,
            rejections,
            failures,
            frequency,
            mc_stderr,
            flagged: trials == 0 || failures as f64 > FAILURE_FLAG_FRACTION * reps as f64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct McTable {
    pub cells: Vec<McCell>,
}

impl McTable {
    pub fn cell(&self, n: usize, test: &TestId) -> Option<&McCell> {
        self.cells.iter().find(|c| c.n == n && c.test == *test)
    }

    fn sort(&mut self) {
        self.cells.sort_by_key(|c| (c.n, c.test.sort_key()));
    }
}

/// Seed of replication `r` at sample size `n`.
pub fn replication_seed(base_seed: u64, n: usize, r: usize) -> u64 {
    hash64(hash64(base_seed, n as u64), r as u64)
}

/// Rejection outcomes of one replication, `None` for a failed test.
pub fn run_replication(model: &dyn DriftModel, spec: &McSpec, n: usize, r: usize) -> Result<Vec<Option<bool>>> {
    let seed = replication_seed(spec.base_seed, n, r);
    let cfg = SimConfig {
        n,
        step: StepRule::Exponent(spec.gamma),
        substeps: spec.substeps,
        x0: spec.x0,
        seed,
    };
    let p = &spec.null_params;
    let mut path = match &spec.alt_params {
        None => simulate_path(model, &p.theta, p.sigma, &cfg)?,
        Some(a) => simulate_path_with_change(model, &p.theta, p.sigma, &a.theta, a.sigma, a.change_frac, &cfg)?,
    };
    if let Some(c) = &spec.contamination {
        path = contaminate(&path, c, hash64(seed, PURPOSE_CONTAMINATION))?;
    }

    let tests = spec.tests();
    let mut by_alpha: BTreeMap<u64, Option<Vec<f64>>> = BTreeMap::new();
    let mut out = Vec::with_capacity(tests.len());
    for t in &tests {
        let res = by_alpha.entry(t.alpha.to_bits()).or_insert_with(|| {
            let cfg = MdpdeConfig {
                alpha: t.alpha,
                optimizer: spec.optimizer,
            };
            fit(model, &path, &cfg)
                .and_then(|est| residuals(model, &path, &est))
                .map(|r| r.values)
                .ok()
        });
        out.push(
            res.as_ref()
                .and_then(|z| cusum_statistic(z, &t.trim()).ok())
                .map(|o| o.rejects(spec.level)),
        );
    }
    Ok(out)
}

pub fn run_mc(spec: &McSpec) -> Result<McTable> {
    spec.validate()?;
    let model = spec.model.build();
    let tests = spec.tests();
    let mut table = McTable::default();
    for &n in &spec.n_list {
        let outcomes: Vec<Vec<Option<bool>>> = (0..spec.reps)
            .into_par_iter()
            .map(|r| run_replication(model.as_ref(), spec, n, r))
            .collect::<Result<_>>()?;
        for (j, t) in tests.iter().enumerate() {
            let rejections = outcomes.iter().filter(|o| o[j] == Some(true)).count();
            let failures = outcomes.iter().filter(|o| o[j].is_none()).count();
            table
                .cells
                .push(McCell::new(n, *t, spec.level, spec.reps, rejections, failures));
        }
    }
    table.sort();
    Ok(table)
}

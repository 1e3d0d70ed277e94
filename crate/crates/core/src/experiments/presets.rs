// SPDX-License-Identifier: MIT OR Apache-2.0

//! Built-in study configurations: the OU size and power tables under no,
//! light (p = 0.5%) and heavy (p = 5%) contamination, and the size and power
//! curves against the contamination rate and the post-change scale.

use serde::{Deserialize, Serialize};

use super::{AltParams, McSpec, Params};
use crate::changepoint::{TrimSpec, M_975, M_995};
use crate::error::{Error, Result};
use crate::estimate::OptimizerConfig;
use crate::model::ModelKind;
use crate::simulate::ContaminationSpec;

pub const PRESET_NAMES: [&str; 8] = [
    "table1", "table2", "table3", "table4", "table5", "table6", "fig1", "fig2",
];

const TABLE_ALPHAS: [f64; 5] = [0.1, 0.2, 0.3, 0.5, 1.0];
const SIZE_N: [usize; 4] = [200, 500, 1000, 3000];
const POWER_N: [usize; 3] = [200, 500, 1000];

/// Grid swept by a curve preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axis")]
pub enum CurveAxis {
    /// Contamination probability `p` at a fixed outlier variance.
    ContaminationProb { values: Vec<f64>, var_v: f64 },
    /// Post-change scale `σ₁` with the drift parameter after the change.
    Sigma1 {
        values: Vec<f64>,
        theta1: Vec<f64>,
        change_frac: f64,
    },
}

impl CurveAxis {
    pub fn grid(&self) -> &[f64] {
        match self {
            Self::ContaminationProb { values, .. } | Self::Sigma1 { values, .. } => values,
        }
    }

    /// The study at grid point `x`.
    pub fn apply(&self, base: &McSpec, x: f64) -> Result<McSpec> {
        let mut spec = base.clone();
        match self {
            Self::ContaminationProb { var_v, .. } => {
                spec.contamination = if x == 0.0 {
                    None
                } else {
                    Some(ContaminationSpec::new(x, *var_v)?)
                };
            }
            Self::Sigma1 {
                theta1, change_frac, ..
            } => {
                spec.alt_params = Some(AltParams {
                    theta: theta1.clone(),
                    sigma: x,
                    change_frac: *change_frac,
                });
            }
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub spec: McSpec,
    pub curve: Option<CurveAxis>,
}

impl Preset {
    /// Replaces the outlier variance in the study and in a contamination grid.
    pub fn with_var_v(mut self, var_v: f64) -> Result<Self> {
        if let Some(c) = &self.spec.contamination {
            self.spec.contamination = Some(ContaminationSpec::new(c.prob, var_v)?);
        }
        if let Some(CurveAxis::ContaminationProb { var_v: v, .. }) = &mut self.curve {
            ContaminationSpec::new(0.0, var_v)?;
            *v = var_v;
        }
        Ok(self)
    }

    /// Replaces the post-change parameters of a power study.
    pub fn with_alternative(mut self, theta1: Vec<f64>, sigma1: f64) -> Result<Self> {
        match &mut self.spec.alt_params {
            Some(a) => {
                a.theta = theta1;
                a.sigma = sigma1;
                Ok(self)
            }
            None => Err(Error::domain(format!(
                "preset {} has no alternative to override",
                self.name
            ))),
        }
    }
}

fn all_trims() -> Vec<TrimSpec> {
    vec![
        TrimSpec::hard(M_995),
        TrimSpec::tent(M_995),
        TrimSpec::hard(M_975),
        TrimSpec::tent(M_975),
    ]
}

fn base(n_list: &[usize], reps: usize, base_seed: u64, alphas: &[f64]) -> McSpec {
    McSpec {
        model: ModelKind::OuCentered,
        n_list: n_list.to_vec(),
        reps,
        gamma: 0.75,
        substeps: 20,
        x0: 0.0,
        null_params: Params {
            theta: vec![1.0],
            sigma: 1.0,
        },
        alt_params: None,
        contamination: None,
        include_naive: true,
        alphas: alphas.to_vec(),
        trims: all_trims(),
        level: 0.05,
        base_seed,
        optimizer: OptimizerConfig::default(),
    }
}

fn midpoint_change(theta1: f64, sigma1: f64) -> Option<AltParams> {
    Some(AltParams {
        theta: vec![theta1],
        sigma: sigma1,
        change_frac: 0.5,
    })
}

/// Looks up a built-in study. Power tables default to the change from
/// `(θ, σ) = (1, 1)` to `(1, 1.5)`.
pub fn preset(name: &str, reps: usize, base_seed: u64) -> Result<Preset> {
    let contamination = |p: f64| ContaminationSpec::new(p, 1.0).map(Some);
    let (name, spec, curve) = match name {
        "table1" => ("table1", base(&SIZE_N, reps, base_seed, &TABLE_ALPHAS), None),
        "table2" => {
            let mut s = base(&POWER_N, reps, base_seed, &TABLE_ALPHAS);
            s.alt_params = midpoint_change(1.0, 1.5);
            ("table2", s, None)
        }
        "table3" | "table5" => {
            let mut s = base(&SIZE_N, reps, base_seed, &TABLE_ALPHAS);
            s.contamination = contamination(if name == "table3" { 0.005 } else { 0.05 })?;
            (if name == "table3" { "table3" } else { "table5" }, s, None)
        }
        "table4" | "table6" => {
            let mut s = base(&POWER_N, reps, base_seed, &TABLE_ALPHAS);
            s.alt_params = midpoint_change(1.0, 1.5);
            s.contamination = contamination(if name == "table4" { 0.005 } else { 0.05 })?;
            (if name == "table4" { "table4" } else { "table6" }, s, None)
        }
        "fig1" => {
            let values = (0..=10).map(|k| k as f64 * 0.005).collect();
            (
                "fig1",
                base(&[500, 1000], reps, base_seed, &[0.2]),
                Some(CurveAxis::ContaminationProb { values, var_v: 1.0 }),
            )
        }
        "fig2" => {
            let mut s = base(&[500, 1000], reps, base_seed, &[0.2]);
            s.contamination = contamination(0.005)?;
            let values = (0..=5).map(|k| 1.0 + k as f64 * 0.1).collect();
            (
                "fig2",
                s,
                Some(CurveAxis::Sigma1 {
                    values,
                    theta1: vec![1.0],
                    change_frac: 0.5,
                }),
            )
        }
        other => {
            return Err(Error::domain(format!(
                "unknown preset '{other}'; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(Preset { name, spec, curve })
}

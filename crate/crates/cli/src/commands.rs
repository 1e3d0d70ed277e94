// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use driftwatch_core::changepoint::{
    binary_segmentation, cusum_statistic, residuals, SegmentationConfig, TestOutcome, TrimKind, TrimSpec,
};
use driftwatch_core::experiments::{emit_curves, emit_table, preset, run_mc, McSpec};
use driftwatch_core::seed::{hash64, PURPOSE_CONTAMINATION};
use driftwatch_core::{
    contaminate, fit, rolling_evaluate, simulate_path, simulate_path_with_change, ContaminationSpec, MdpdeConfig,
    ParamEstimate, RollingConfig, SamplePath, SimConfig, StepRule,
};
use serde::Serialize;

use crate::input::{read_series, write_series};
use crate::{CliError, EstimateArgs, ForecastArgs, McArgs, SegmentArgs, SimulateArgs, TestArgs, TrimArgs};

fn load(input: &crate::InputArgs) -> Result<SamplePath, CliError> {
    let file =
        File::open(&input.input).map_err(|e| CliError::Data(format!("cannot open {}: {e}", input.input.display())))?;
    read_series(BufReader::new(file), input.h)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(CliError::output)?;
    writeln!(out).map_err(CliError::output)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes()).map_err(CliError::output)?;
            w.flush().map_err(CliError::output)
        }
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(CliError::output),
    }
}

fn trim_spec(a: &TrimArgs) -> Result<TrimSpec, CliError> {
    let spec = match a.trim {
        TrimKind::None => TrimSpec::none(),
        TrimKind::HardClip => TrimSpec::hard(a.m),
        TrimKind::Tent => TrimSpec::tent(a.m),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let model = a.model.build();
    let step = match a.h {
        Some(h) => StepRule::Explicit(h),
        None => StepRule::Exponent(a.gamma),
    };
    let cfg = SimConfig {
        n: a.n,
        step,
        substeps: a.substeps,
        x0: a.x0,
        seed: a.seed,
    };
    let mut path = match &a.change {
        None => simulate_path(model.as_ref(), &a.theta, a.sigma, &cfg)?,
        Some(c) => {
            if c.len() < 3 {
                return Err(CliError::Usage("--change expects frac,theta1...,sigma1".into()));
            }
            let (frac, rest) = (c[0], &c[1..]);
            let (sigma1, theta1) = rest.split_last().expect("non-empty");
            simulate_path_with_change(model.as_ref(), &a.theta, a.sigma, theta1, *sigma1, frac, &cfg)?
        }
    };
    if let Some(c) = &a.contaminate {
        if c.len() != 2 {
            return Err(CliError::Usage("--contaminate expects p,var_v".into()));
        }
        let spec = ContaminationSpec::new(c[0], c[1])?;
        path = contaminate(&path, &spec, hash64(a.seed, PURPOSE_CONTAMINATION))?;
    }
    match &a.out {
        Some(p) => write_series(create(p)?, &path),
        None => write_series(io::stdout().lock(), &path),
    }
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    theta_hat: &'a [f64],
    sigma_hat: f64,
    alpha: f64,
    objective: f64,
    converged: bool,
    iterations: usize,
}

impl<'a> From<&'a ParamEstimate> for EstimateOutput<'a> {
    fn from(e: &'a ParamEstimate) -> Self {
        Self {
            theta_hat: &e.theta_hat,
            sigma_hat: e.sigma_hat,
            alpha: e.alpha,
            objective: e.objective_value,
            converged: e.converged,
            iterations: e.iterations,
        }
    }
}

pub fn estimate(a: EstimateArgs) -> Result<(), CliError> {
    let path = load(&a.input)?;
    let est = fit(a.model.build().as_ref(), &path, &MdpdeConfig::new(a.alpha))?;
    print_json(&EstimateOutput::from(&est))
}

#[derive(Serialize)]
struct TestOutput<'a> {
    #[serde(flatten)]
    outcome: &'a TestOutcome,
    level: f64,
    reject: bool,
    /// Time of the last observation before the estimated change.
    change_time: f64,
    estimate: EstimateOutput<'a>,
}

pub fn test(a: TestArgs) -> Result<(), CliError> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::Usage(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    let trim = trim_spec(&a.trim)?;
    let path = load(&a.input)?;
    let model = a.model.build();
    let est = fit(model.as_ref(), &path, &MdpdeConfig::new(a.alpha))?;
    let z = residuals(model.as_ref(), &path, &est)?;
    let mut outcome = cusum_statistic(&z.values, &trim)?;
    outcome.alpha = Some(a.alpha);
    print_json(&TestOutput {
        outcome: &outcome,
        level: a.level,
        reject: outcome.rejects(a.level),
        change_time: outcome.k_hat as f64 * path.step,
        estimate: EstimateOutput::from(&est),
    })
}

#[derive(Serialize)]
struct SegmentOutput<'a> {
    start: usize,
    end: usize,
    t_start: f64,
    t_end: f64,
    estimate: Option<EstimateOutput<'a>>,
    test: Option<&'a TestOutcome>,
    /// Re-estimates for each requested exponent.
    estimates: Vec<EstimateOutput<'a>>,
}

#[derive(Serialize)]
struct SegmentationOutput<'a> {
    change_points: &'a [usize],
    change_times: Vec<f64>,
    level: f64,
    segments: Vec<SegmentOutput<'a>>,
}

pub fn segment(a: SegmentArgs) -> Result<(), CliError> {
    let cfg = SegmentationConfig {
        mdpde: MdpdeConfig::new(a.alpha),
        trim: trim_spec(&a.trim)?,
        level: a.level,
        min_segment: a.min_segment,
    };
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::Usage(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    let path = load(&a.input)?;
    let model = a.model.build();
    let result = binary_segmentation(model.as_ref(), &path, &cfg)?;

    let mut refits: Vec<Vec<ParamEstimate>> = Vec::with_capacity(result.segments.len());
    for s in &result.segments {
        let sub = path.slice(s.start, s.end)?;
        let fits = a
            .alphas
            .iter()
            .map(|&alpha| fit(model.as_ref(), &sub, &MdpdeConfig::new(alpha)))
            .collect::<Result<Vec<_>, _>>()?;
        refits.push(fits);
    }

    let h = path.step;
    let segments = result
        .segments
        .iter()
        .zip(&refits)
        .map(|(s, fits)| SegmentOutput {
            start: s.start,
            end: s.end,
            t_start: s.start as f64 * h,
            t_end: s.end as f64 * h,
            estimate: s.estimate.as_ref().map(EstimateOutput::from),
            test: s.test.as_ref(),
            estimates: fits.iter().map(EstimateOutput::from).collect(),
        })
        .collect();
    print_json(&SegmentationOutput {
        change_points: &result.change_points,
        change_times: result.change_points.iter().map(|&k| k as f64 * h).collect(),
        level: result.level,
        segments,
    })
}

pub fn forecast(a: ForecastArgs) -> Result<(), CliError> {
    let path = load(&a.input)?;
    let cfg = RollingConfig {
        refit_every: a.refit_every,
        ..RollingConfig::new(a.eval_start, a.from_index, a.alpha)
    };
    let (score, records) = rolling_evaluate(a.model.build().as_ref(), &path, &cfg)?;
    if let Some(p) = &a.out {
        let mut w = csv::Writer::from_writer(create(p)?);
        w.write_record(["t", "actual", "predicted", "pi_lo", "pi_hi"])
            .map_err(CliError::output)?;
        for r in &records {
            w.write_record([
                (r.index as f64 * path.step).to_string(),
                r.actual.to_string(),
                r.predicted.to_string(),
                r.pi_lo.to_string(),
                r.pi_hi.to_string(),
            ])
            .map_err(CliError::output)?;
        }
        w.flush().map_err(CliError::output)?;
    }
    print_json(&score)
}

pub fn mc(a: McArgs) -> Result<(), CliError> {
    let (spec, curve) = match (&a.config, &a.preset) {
        (Some(p), _) => {
            let file = File::open(p).map_err(|e| CliError::Data(format!("cannot open {}: {e}", p.display())))?;
            let mut spec: McSpec = serde_json::from_reader(BufReader::new(file))
                .map_err(|e| CliError::Data(format!("invalid study file {}: {e}", p.display())))?;
            if let Some(seed) = a.seed {
                spec.base_seed = seed;
            }
            (spec, None)
        }
        (None, Some(name)) => {
            let seed = a
                .seed
                .ok_or_else(|| CliError::Usage("--preset requires --seed".into()))?;
            let mut p = preset(name, a.reps, seed)?;
            if let Some(v) = a.var_v {
                p = p.with_var_v(v)?;
            }
            if let Some(alt) = &a.alt {
                let (sigma1, theta1) = alt
                    .split_last()
                    .filter(|(_, t)| !t.is_empty())
                    .ok_or_else(|| CliError::Usage("--alt expects theta1...,sigma1".into()))?;
                p = p.with_alternative(theta1.to_vec(), *sigma1)?;
            }
            (p.spec, p.curve)
        }
        (None, None) => return Err(CliError::Usage("pass --config or --preset".into())),
    };
    let text = match curve {
        Some(axis) => emit_curves(&spec, &axis)?,
        None => emit_table(&run_mc(&spec)?, a.format),
    };
    write_text(a.out.as_deref(), &text)
}

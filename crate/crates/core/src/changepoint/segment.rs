// SPDX-License-Identifier: MIT OR Apache-2.0

//! Binary segmentation on top of the robust CUSUM test.
//!
//! A segment `[start, end]` (observation indices, inclusive) is tested; on a
//! rejection it is split after observation `start + k̂` into
//! `[start, start + k̂]` and `[start + k̂ + 1, end]`, and both halves are
//! processed again with freshly estimated parameters. Segments shorter than
//! `min_segment` observations are not tested.

use serde::{Deserialize, Serialize};

use super::cusum::TestOutcome;
use super::run_test_with_estimate;
use super::trim::TrimSpec;
use crate::error::{Error, Result};
use crate::estimate::{fit, MdpdeConfig, ParamEstimate};
use crate::model::DriftModel;
use crate::simulate::SamplePath;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub mdpde: MdpdeConfig,
    pub trim: TrimSpec,
    pub level: f64,
    pub min_segment: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            mdpde: MdpdeConfig::new(0.2),
            trim: TrimSpec::default(),
            level: 0.05,
            min_segment: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// Estimate on this segment alone; `None` when it is too short to fit.
    pub estimate: Option<ParamEstimate>,
    /// The test that was run on this segment and did not lead to a split.
    pub test: Option<TestOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    /// Last observation index of each regime but the final one.
    pub change_points: Vec<usize>,
    pub segments: Vec<Segment>,
    pub level: f64,
}

struct Partial {
    change_points: Vec<usize>,
    segments: Vec<Segment>,
}

fn leaf(model: &dyn DriftModel, path: &SamplePath, start: usize, end: usize, cfg: &SegmentationConfig) -> Segment {
    let estimate = path
        .slice(start, end)
        .ok()
        .filter(|p| p.values.len() >= model.dim_theta() + 2)
        .and_then(|p| fit(model, &p, &cfg.mdpde).ok());
    Segment {
        start,
        end,
        estimate,
        test: None,
    }
}

fn split(
    model: &dyn DriftModel,
    path: &SamplePath,
    start: usize,
    end: usize,
    cfg: &SegmentationConfig,
) -> Result<Partial> {
    let len = end - start + 1;
    if len < cfg.min_segment {
        return Ok(Partial {
            change_points: Vec::new(),
            segments: vec![leaf(model, path, start, end, cfg)],
        });
    }

    let sub = path.slice(start, end)?;
    let (outcome, estimate) = run_test_with_estimate(model, &sub, &cfg.mdpde, &cfg.trim)?;
    let cp = start + outcome.k_hat;
    let left_len = cp - start + 1;
    let right_len = end.saturating_sub(cp);
    if !(outcome.rejects(cfg.level) && left_len >= cfg.min_segment && right_len >= cfg.min_segment) {
        return Ok(Partial {
            change_points: Vec::new(),
            segments: vec![Segment {
                start,
                end,
                estimate: Some(estimate),
                test: Some(outcome),
            }],
        });
    }

    let (left, right) = rayon::join(
        || split(model, path, start, cp, cfg),
        || split(model, path, cp + 1, end, cfg),
    );
    let (mut left, right) = (left?, right?);
    left.change_points.push(cp);
    left.change_points.extend(right.change_points);
    left.segments.extend(right.segments);
    Ok(left)
}

pub fn binary_segmentation(
    model: &dyn DriftModel,
    path: &SamplePath,
    cfg: &SegmentationConfig,
) -> Result<SegmentationResult> {
    cfg.mdpde.validate()?;
    cfg.trim.validate()?;
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {}", cfg.level)));
    }
    let floor = (model.dim_theta() + 2).max(3);
    if cfg.min_segment < floor {
        return Err(Error::domain(format!(
            "min_segment must be at least {floor} for model {}",
            model.name()
        )));
    }
    let Partial {
        change_points,
        segments,
    } = split(model, path, 0, path.n(), cfg)?;
    debug_assert!(change_points.windows(2).all(|w| w[0] < w[1]));
    Ok(SegmentationResult {
        change_points,
        segments,
        level: cfg.level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OuCentered;
    use crate::simulate::{simulate_path, SimConfig};

    #[test]
    fn min_segment_guard() {
        let path = simulate_path(&OuCentered::default(), &[1.0], 1.0, &SimConfig::standard_design(100, 3)).unwrap();
        let cfg = SegmentationConfig {
            min_segment: 500,
            ..Default::default()
        };
        let res = binary_segmentation(&OuCentered::default(), &path, &cfg).unwrap();
        assert!(res.change_points.is_empty());
        assert_eq!(res.segments.len(), 1);
        assert!(res.segments[0].test.is_none());
        assert!(res.segments[0].estimate.is_some());

        let cfg = SegmentationConfig {
            min_segment: 2,
            ..Default::default()
        };
        assert!(binary_segmentation(&OuCentered::default(), &path, &cfg).is_err());
    }

    #[test]
    fn single_large_change_is_split() {
        let m = OuCentered::default();
        let cfg = SimConfig::standard_design(1000, 21);
        let path = crate::simulate::simulate_path_with_change(&m, &[1.0], 1.0, &[1.0], 2.5, 0.5, &cfg).unwrap();
        let res = binary_segmentation(&m, &path, &SegmentationConfig::default()).unwrap();
        assert!(!res.change_points.is_empty());
        assert!(
            res.change_points.iter().any(|cp| (cp.abs_diff(500)) <= 25),
            "{:?}",
            res.change_points
        );
        // Segments partition the observation indices.
        assert_eq!(res.segments.first().unwrap().start, 0);
        assert_eq!(res.segments.last().unwrap().end, 1000);
        for w in res.segments.windows(2) {
            assert_eq!(w[0].end + 1, w[1].start);
        }
        for (cp, seg) in res.change_points.iter().zip(&res.segments) {
            assert_eq!(*cp, seg.end);
        }
    }
}

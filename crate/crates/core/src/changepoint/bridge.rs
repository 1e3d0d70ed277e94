// SPDX-License-Identifier: MIT OR Apache-2.0

//! Law of `sup_{0<=t<=1} |W°_t|` for a standard Brownian bridge `W°`.
//!
//! The distribution function is the alternating series
//! `Σ_{k∈Z} (-1)^k exp(-2k²u²)`. For small `u` that series cancels badly,
//! so below [`DUAL_SERIES_BELOW`] the equivalent theta-function form
//! `(√(2π)/u) Σ_{k>=1} exp(-(2k-1)²π²/(8u²))` is summed instead.

use crate::error::{Error, Result};

pub(crate) const DUAL_SERIES_BELOW: f64 = 0.5;
const TERM_CUTOFF: f64 = 1e-17;

/// Partial sums `1 - Σ_{|k|<=K} (-1)^k exp(-2k²u²)` for `K = 1, 2, ...`,
/// stopping once the next term is below `1e-17`.
pub(crate) fn alternating_tail_partial_sums(u: f64) -> Vec<f64> {
    let mut sums = Vec::new();
    let mut acc = 0.0;
    let mut k = 1u32;
    loop {
        let term = 2.0 * (-2.0 * f64::from(k * k) * u * u).exp();
        acc += if k % 2 == 1 { term } else { -term };
        sums.push(acc);
        if term < TERM_CUTOFF || k > 100_000 {
            return sums;
        }
        k += 1;
    }
}

fn dual_cdf(u: f64) -> f64 {
    let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * u * u);
    let mut acc = 0.0;
    for k in 1u32.. {
        let odd = f64::from(2 * k - 1);
        let term = (-odd * odd * c).exp();
        acc += term;
        if term < TERM_CUTOFF * acc.max(f64::MIN_POSITIVE) || term == 0.0 {
            break;
        }
    }
    (2.0 * std::f64::consts::PI).sqrt() / u * acc
}

/// `P(sup |W°| > u)`; returns 1 for `u <= 0`.
pub fn bb_sup_tail(u: f64) -> f64 {
    if u.is_nan() || u <= 0.0 {
        return 1.0;
    }
    if u == f64::INFINITY {
        return 0.0;
    }
    let tail = if u < DUAL_SERIES_BELOW {
        1.0 - dual_cdf(u)
    } else {
        *alternating_tail_partial_sums(u).last().unwrap()
    };
    tail.clamp(0.0, 1.0)
}

/// The `u` with `bb_sup_tail(u) = level`, by bisection.
pub fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {level}")));
    }
    let mut lo = 0.0_f64;
    let mut hi = 2.0_f64;
    while bb_sup_tail(hi) > level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bb_sup_tail(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn five_percent_critical_value() {
        let c = critical_value(0.05).unwrap();
        assert!((c - 1.358).abs() < 1e-3, "{c}");
        assert!((bb_sup_tail(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn deep_tail_and_conventions() {
        assert!(bb_sup_tail(10.0) < 1e-12);
        assert_eq!(bb_sup_tail(0.0), 1.0);
        assert_eq!(bb_sup_tail(-3.0), 1.0);
        assert!((bb_sup_tail(1e-3) - 1.0).abs() < 1e-15);
        assert_eq!(bb_sup_tail(f64::INFINITY), 0.0);
    }

    #[test]
    fn inverse_round_trip() {
        for level in [0.01, 0.05, 0.10] {
            let u = critical_value(level).unwrap();
            assert!((bb_sup_tail(u) - level).abs() < 1e-9);
        }
        assert!(critical_value(0.0).is_err());
        assert!(critical_value(1.0).is_err());
    }

    #[test]
    fn critical_value_shrinks_as_level_grows() {
        let levels = [0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999_999];
        let cvs: Vec<f64> = levels.iter().map(|&l| critical_value(l).unwrap()).collect();
        assert!(cvs.windows(2).all(|w| w[1] < w[0]), "{cvs:?}");
        assert!(*cvs.last().unwrap() < 0.4);
    }

    #[test]
    fn partial_sums_bracket_the_limit() {
        for u in [0.5, 0.8, 1.0, 1.358, 2.0] {
            let sums = alternating_tail_partial_sums(u);
            let limit = *sums.last().unwrap();
            for pair in sums.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                assert!(a.min(b) <= limit + 1e-16 && limit <= a.max(b) + 1e-16);
            }
            let k = sums.len() as f64 + 1.0;
            let next_term = 2.0 * (-2.0 * k * k * u * u).exp();
            assert!(next_term < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn both_series_agree(u in 0.3f64..1.2) {
            let direct = *alternating_tail_partial_sums(u).last().unwrap();
            let dual = 1.0 - dual_cdf(u);
            prop_assert!((direct - dual).abs() < 1e-12, "{} vs {}", direct, dual);
        }

        #[test]
        fn tail_is_monotone(a in 0.01f64..4.0, b in 0.01f64..4.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(bb_sup_tail(lo) >= bb_sup_tail(hi));
        }
    }
}

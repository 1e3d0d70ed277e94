// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `z²_{0.005}`, rounded as in the published design.
pub const M_995: f64 = 6.63;
/// `z²_{0.025}`.
pub const M_975: f64 = 3.84;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrimKind {
    /// Identity: the plain CUSUM of squares.
    None,
    /// `min(x, M)`.
    #[serde(rename = "hard")]
    HardClip,
    /// `x` on `[0, M]`, `2M - x` on `(M, 2M]`, `0` beyond.
    Tent,
}

impl TrimKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::HardClip => "hard",
            Self::Tent => "tent",
        }
    }
}

impl std::str::FromStr for TrimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "hard" | "hard_clip" => Ok(Self::HardClip),
            "tent" => Ok(Self::Tent),
            other => Err(Error::domain(format!(
                "unknown trim '{other}'; expected none, hard or tent"
            ))),
        }
    }
}

/// Trimming applied to squared residuals before the CUSUM scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimSpec {
    pub kind: TrimKind,
    pub m: f64,
}

impl Default for TrimSpec {
    fn default() -> Self {
        Self::tent(M_995)
    }
}

impl TrimSpec {
    pub const fn none() -> Self {
        Self {
            kind: TrimKind::None,
            m: 0.0,
        }
    }

    pub const fn hard(m: f64) -> Self {
        Self {
            kind: TrimKind::HardClip,
            m,
        }
    }

    pub const fn tent(m: f64) -> Self {
        Self {
            kind: TrimKind::Tent,
            m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != TrimKind::None && !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::domain(format!(
                "truncation constant M must be positive, got {}",
                self.m
            )));
        }
        Ok(())
    }

    /// Applies the trimming to `x >= 0` without checking the sign.
    #[inline]
    pub(crate) fn apply(&self, x: f64) -> f64 {
        match self.kind {
            TrimKind::None => x,
            TrimKind::HardClip => x.min(self.m),
            TrimKind::Tent => {
                if x <= self.m {
                    x
                } else if x <= 2.0 * self.m {
                    2.0 * self.m - x
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for TrimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TrimKind::None => f.write_str("none"),
            k => write!(f, "{}(M={})", k.as_str(), self.m),
        }
    }
}

pub fn trim_value(spec: &TrimSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    if !(x >= 0.0) {
        return Err(Error::domain(format!("trimming is defined for x >= 0, got {x}")));
    }
    Ok(spec.apply(x))
}

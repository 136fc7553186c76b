use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of time widths after which the Gaussian is treated as zero
/// (`exp(-64)` relative).
pub const GAUSSIAN_CUT: f64 = 8.0;

/// `f(t, r) = A exp(-((t - t0)/t_width)^2) bump((r - r0)/r_width)` with
/// `bump(x) = exp(-1/(1 - x^2))` on `|x| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceSpec {
    pub amplitude: f64,
    pub t0: f64,
    pub t_width: f64,
    pub r0: f64,
    pub r_width: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec { amplitude: 1.0, t0: 5.0, t_width: 1.0, r0: 10.0, r_width: 2.0 }
    }
}

pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_width > 0.0 && self.r_width > 0.0) {
            return Err(Error::Precondition("source widths must be positive".into()));
        }
        if !(self.r0 - self.r_width > 0.0) {
            return Err(Error::Precondition("source must be supported away from r = 0".into()));
        }
        if !(self.amplitude.is_finite() && self.t0.is_finite() && self.r0.is_finite()) {
            return Err(Error::Precondition("source parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn radial_profile(&self, r: f64) -> f64 {
        bump((r - self.r0) / self.r_width)
    }

    pub fn time_profile(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.t_width;
        if x.abs() > GAUSSIAN_CUT {
            0.0
        } else {
            (-x * x).exp()
        }
    }

    pub fn value(&self, t: f64, r: f64) -> f64 {
        self.amplitude * self.time_profile(t) * self.radial_profile(r)
    }

    /// Closed radial support.
    pub fn r_support(&self) -> (f64, f64) {
        (self.r0 - self.r_width, self.r0 + self.r_width)
    }

    /// Effective time support of the truncated Gaussian.
    pub fn t_support(&self) -> (f64, f64) {
        (self.t0 - GAUSSIAN_CUT * self.t_width, self.t0 + GAUSSIAN_CUT * self.t_width)
    }
}

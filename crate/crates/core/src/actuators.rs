//! Combined saturation and dead-zone actuator nonlinearity.
//!
//! An actuator with a dead zone followed by saturation is equivalent to a
//! plain clip of the commanded signal between two breakpoints,
//! `lo = k_l (k_m - m_l)` and `hi = k_r (k_M - m_r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorLimits {
    /// Upper saturation level, > 0.
    pub sat_upper: f64,
    /// Lower saturation level, < 0.
    pub sat_lower: f64,
    /// Right dead-zone range, > 0.
    pub dead_right: f64,
    /// Left dead-zone range, < 0.
    pub dead_left: f64,
    /// Right slope, > 0.
    pub slope_right: f64,
    /// Left slope, > 0.
    pub slope_left: f64,
}

impl ActuatorLimits {
    /// Root motor limits used in the reference scenarios.
    pub const ROOT_DEFAULT: Self = Self {
        sat_upper: 2.1,
        sat_lower: -2.1,
        dead_right: 0.1,
        dead_left: -0.1,
        slope_right: 1.0,
        slope_left: 1.0,
    };

    /// End-effector force actuator limits used in the reference scenarios.
    pub const TIP_DEFAULT: Self = Self {
        sat_upper: 0.31,
        sat_lower: -0.31,
        dead_right: 0.01,
        dead_left: -0.01,
        slope_right: 1.0,
        slope_left: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| {
            Err(Error::InvalidParameter {
                field: field.into(),
                reason: reason.into(),
            })
        };
        if !(self.sat_upper > 0.0) {
            return bad("sat_upper", "must be > 0");
        }
        if !(self.sat_lower < 0.0) {
            return bad("sat_lower", "must be < 0");
        }
        if !(self.dead_right > 0.0) {
            return bad("dead_right", "must be > 0");
        }
        if !(self.dead_left < 0.0) {
            return bad("dead_left", "must be < 0");
        }
        if !(self.slope_right > 0.0 && self.slope_left > 0.0) {
            return bad("slope", "slopes must be > 0");
        }
        if !(self.upper_breakpoint() > 0.0) {
            return bad(
                "dead_right",
                "dead zone swallows the upper saturation level",
            );
        }
        if !(self.lower_breakpoint() < 0.0) {
            return bad("dead_left", "dead zone swallows the lower saturation level");
        }
        Ok(())
    }

    pub fn upper_breakpoint(&self) -> f64 {
        self.slope_right * (self.sat_upper - self.dead_right)
    }

    pub fn lower_breakpoint(&self) -> f64 {
        self.slope_left * (self.sat_lower - self.dead_left)
    }

    /// Actuator output for a commanded signal.
    pub fn apply(&self, command: f64) -> f64 {
        let (lo, hi) = (self.lower_breakpoint(), self.upper_breakpoint());
        if command >= hi {
            hi
        } else if command <= lo {
            lo
        } else {
            command
        }
    }

    /// Output minus command; zero on the pass-through branch.
    pub fn discrepancy(&self, command: f64) -> f64 {
        self.apply(command) - command
    }
}

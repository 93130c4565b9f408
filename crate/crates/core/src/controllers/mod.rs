//! Grasp controllers: the neuro-adaptive boundary force controller with its
//! object and posture loops, and the PDS / PD baselines.

mod baseline;
mod gains;
mod nabfc;
mod setpoint;

pub use baseline::{pd_control, pds_control, PdGains, PdsGains};
pub use gains::{
    check_gain_conditions, positivity_ratio, search_analysis_params, GainCheck,
    GainConditionParams, GainReport,
};
pub use nabfc::{
    nabfc_object_loop, nabfc_posture_loop, AdaptiveDrive, AdaptiveState, LoopSignals, NabfcGains,
    NabfcNetworks, ObjectLoopOutput, PostureGains, PostureLoopOutput,
};
pub use setpoint::{compute_setpoint, static_profile, Setpoint};

use crate::beam::BeamGrid;
use crate::plant::{PlantParams, PlantState};

/// Bounded replacement for `sign(s)`: `clip(s, -bound, bound)`.
pub fn smooth_sign(s: f64, bound: f64) -> f64 {
    s.clamp(-bound, bound)
}

/// Commanded (pre-actuator) control signals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Command {
    /// End-effector force (N).
    pub force: f64,
    /// Root torques (N·m).
    pub torque: [f64; 2],
}

/// Boundary derivatives every control law needs, computed once per sample.
/// `q` is the deflection measured from the setpoint profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSignals {
    /// `w_xx(0)`
    pub curvature_root: [f64; 2],
    /// `q_xx(0)`
    pub q_curvature_root: [f64; 2],
    /// `w_xxx(l)`
    pub shear_tip: [f64; 2],
    /// `q_xxx(l)`
    pub q_shear_tip: [f64; 2],
    /// `w_xxx(l)` rate; equal to the `q_xxx(l)` rate since the setpoint is static.
    pub shear_rate_tip: [f64; 2],
}

impl BeamSignals {
    pub fn new(state: &PlantState, setpoint: &Setpoint, grid: &BeamGrid) -> Self {
        let q = [0, 1].map(|i| state.deflection[i].minus(&setpoint.profile[i]));
        Self {
            curvature_root: [0, 1].map(|i| state.deflection[i].d2_at_root(grid)),
            q_curvature_root: [0, 1].map(|i| q[i].d2_at_root(grid)),
            shear_tip: [0, 1].map(|i| state.deflection[i].d3_at_tip(grid)),
            q_shear_tip: [0, 1].map(|i| q[i].d3_at_tip(grid)),
            shear_rate_tip: [0, 1].map(|i| state.deflection_rate[i].d3_at_tip(grid)),
        }
    }
}

/// `EI_i` for both arms.
pub(crate) fn rigidities(params: &PlantParams) -> [f64; 2] {
    [
        params.arms[0].flexural_rigidity,
        params.arms[1].flexural_rigidity,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smooth_sign_examples() {
        assert_eq!(smooth_sign(0.0, 0.01), 0.0);
        assert_eq!(smooth_sign(0.5, 0.01), 0.01);
        assert_eq!(smooth_sign(-0.002, 0.01), -0.002);
        assert_eq!(smooth_sign(-3.0, 0.01), -0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn tanh_bound(q in -50f64..50.0, pick in 0usize..3) {
            // |q| - q tanh(q / w) <= 0.2785 w, at the configured widths
            let g = NabfcGains::default();
            let w = [g.eps1, g.posture[0].eps2, g.posture[1].eps2][pick];
            prop_assert!(q.abs() - q * (q / w).tanh() <= 0.2785 * w + 1e-12);
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{rigidities, BeamSignals, Command, Setpoint};
use crate::plant::{PlantParams, PlantState};

/// PD gains with root strain feedback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdsGains {
    pub kp: f64,
    pub kv: f64,
    pub kp_arm: [f64; 2],
    pub kv_arm: [f64; 2],
    pub ks_arm: [f64; 2],
}

impl Default for PdsGains {
    fn default() -> Self {
        Self {
            kp: 40.0,
            kv: 35.0,
            kp_arm: [35.0; 2],
            kv_arm: [15.0; 2],
            ks_arm: [10.0; 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdGains {
    pub kp: f64,
    pub kv: f64,
    pub kp_arm: [f64; 2],
    pub kv_arm: [f64; 2],
}

impl Default for PdGains {
    fn default() -> Self {
        Self {
            kp: 10.0,
            kv: 9.0,
            kp_arm: [60.0; 2],
            kv_arm: [55.0; 2],
        }
    }
}

impl From<PdGains> for PdsGains {
    fn from(g: PdGains) -> Self {
        Self {
            kp: g.kp,
            kv: g.kv,
            kp_arm: g.kp_arm,
            kv_arm: g.kv_arm,
            ks_arm: [0.0; 2],
        }
    }
}

/// PD with strain feedback plus shear and curvature feedforward.
pub fn pds_control(
    state: &PlantState,
    setpoint: &Setpoint,
    gains: &PdsGains,
    beam: &BeamSignals,
    params: &PlantParams,
) -> Command {
    let ei = rigidities(params);
    let p = state.y_m - setpoint.y_m_d;
    let force = -gains.kp * p - gains.kv * state.y_m_dot
        + ei[0] * beam.shear_tip[0]
        + ei[1] * beam.shear_tip[1];
    let torque = [0, 1].map(|i| {
        let e = state.theta[i] - setpoint.theta_d[i];
        -gains.kp_arm[i] * e
            - gains.kv_arm[i] * state.theta_dot[i]
            - gains.ks_arm[i] * ei[i] * beam.q_curvature_root[i]
            + ei[i] * beam.curvature_root[i]
    });
    Command { force, torque }
}

/// PDS with the strain gains set to zero.
pub fn pd_control(
    state: &PlantState,
    setpoint: &Setpoint,
    gains: &PdGains,
    beam: &BeamSignals,
    params: &PlantParams,
) -> Command {
    pds_control(state, setpoint, &PdsGains::from(*gains), beam, params)
}

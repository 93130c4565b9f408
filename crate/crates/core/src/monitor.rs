//! Runtime evaluation of the closed-loop energy functional.
//!
//! Only the measurable part of the functional is reported: terms that
//! involve ideal network weights or robust-term bounds are left out since
//! those ideals are not available in closed loop.

use crate::controllers::{
    positivity_ratio, AdaptiveState, GainConditionParams, LoopSignals, NabfcGains, Setpoint,
};
use crate::plant::{Plant, PlantState};

/// Terms of the full functional that [`h_measurable`] leaves out.
pub const EXCLUDED_TERMS: &str = "object/posture weight errors, eps and pi errors";

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub e: f64,
    pub c: f64,
    pub h_meas: f64,
    pub phi1: f64,
    pub z1_bound: Option<f64>,
    pub z3_bound: Option<[f64; 2]>,
    pub constraint_residual: [f64; 2],
    /// See [`AdaptiveState::norms`].
    pub estimate_norms: [f64; 9],
}

/// Per-arm transformed fields: `q`, `q_x`, `q_xx` and `y'` = `q' - x e'`.
struct Transformed {
    q_x: Vec<f64>,
    q_xx: Vec<f64>,
    y_dot: Vec<f64>,
}

fn transformed(plant: &Plant, state: &PlantState, setpoint: &Setpoint, arm: usize) -> Transformed {
    let g = plant.grid();
    let q = state.deflection[arm].minus(&setpoint.profile[arm]);
    let y_dot = state.deflection_rate[arm]
        .values()
        .iter()
        .zip(g.node_x())
        .map(|(qd, x)| qd - x * state.theta_dot[arm])
        .collect();
    Transformed {
        q_x: q.d1_profile(g),
        q_xx: q.d2_profile(g),
        y_dot,
    }
}

/// `beta1/2 sum_i (EI_i int q_xx^2 + rho_i int y'^2)`.
pub fn energy_e(plant: &Plant, state: &PlantState, setpoint: &Setpoint, beta1: f64) -> f64 {
    let g = plant.grid();
    (0..2)
        .map(|i| {
            let arm = &plant.params().arms[i];
            let t = transformed(plant, state, setpoint, i);
            let curv: Vec<f64> = t.q_xx.iter().map(|v| v * v).collect();
            let kin: Vec<f64> = t.y_dot.iter().map(|v| v * v).collect();
            arm.flexural_rigidity * g.integrate(&curv) + arm.linear_density * g.integrate(&kin)
        })
        .sum::<f64>()
        * 0.5
        * beta1
}

/// `beta2 sum_i rho_i int (x - l) y' q_x`.
pub fn cross_c(plant: &Plant, state: &PlantState, setpoint: &Setpoint, beta2: f64) -> f64 {
    let g = plant.grid();
    let l = plant.params().length();
    beta2
        * (0..2)
            .map(|i| {
                let t = transformed(plant, state, setpoint, i);
                let integrand: Vec<f64> = g
                    .node_x()
                    .iter()
                    .zip(&t.y_dot)
                    .zip(&t.q_x)
                    .map(|((x, yd), qx)| (x - l) * yd * qx)
                    .collect();
                plant.params().arms[i].linear_density * g.integrate(&integrand)
            })
            .sum::<f64>()
}

/// Measurable sliding and estimation terms of the functional, without E and C.
pub fn measurable_v(
    plant: &Plant,
    signals: &LoopSignals,
    adaptive: &AdaptiveState,
    gains: &NabfcGains,
) -> f64 {
    let p = plant.params();
    let m = p.effective_mass();
    let m_err = m - adaptive.m_hat;
    let mut v = 0.5 * signals.z1 * signals.z1
        + 0.5 * m * signals.s * signals.s
        + m_err * m_err / (2.0 * gains.b1);
    for i in 0..2 {
        let j = p.arms[i].hub_inertia;
        let j_err = j - adaptive.j_hat[i];
        v += 0.5 * signals.z3[i] * signals.z3[i]
            + 0.5 * j * signals.s_arm[i] * signals.s_arm[i]
            + j_err * j_err / (2.0 * gains.posture[i].g1);
    }
    v
}

/// Measurable part of the functional: [`measurable_v`] + E + C.
#[allow(clippy::too_many_arguments)]
pub fn h_measurable(
    plant: &Plant,
    state: &PlantState,
    setpoint: &Setpoint,
    signals: &LoopSignals,
    adaptive: &AdaptiveState,
    gains: &NabfcGains,
    analysis: &GainConditionParams,
) -> f64 {
    measurable_v(plant, signals, adaptive, gains)
        + energy_e(plant, state, setpoint, analysis.beta1)
        + cross_c(plant, state, setpoint, analysis.beta2)
}

/// `phi2 (E + V) <= E + V + C <= phi3 (E + V)`.
pub fn sandwich_holds(e: f64, c: f64, v: f64, phi1: f64) -> bool {
    let phi2 = (1.0 - phi1).min(1.0);
    let phi3 = (1.0 + phi1).max(1.0);
    let base = e + v;
    let h = base + c;
    let tol = 1e-12 * base.abs().max(1e-300);
    phi2 * base <= h + tol && h <= phi3 * base + tol
}

/// Ultimate bounds on `|z1|` and `|z3_i|` for residual constant `h` and
/// decay rate `phi`.
pub fn uub_bounds(
    h: f64,
    phi: f64,
    plant: &Plant,
    gains: &NabfcGains,
    analysis: &GainConditionParams,
) -> (f64, [f64; 2]) {
    let p = plant.params();
    let phi1 = positivity_ratio(analysis.beta1, analysis.beta2, p);
    let phi2 = (1.0 - phi1).min(1.0);
    let phi4 = [
        1.0,
        1.0 / (2.0 * gains.a1),
        1.0 / (2.0 * gains.gamma1),
        1.0 / (2.0 * gains.b1),
        0.5 * p.effective_mass(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let z1 = (2.0 * h / (phi2 * phi4 * phi)).sqrt();
    let z3 = [0, 1].map(|i| {
        let g = &gains.posture[i];
        let phi5 = [
            1.0,
            1.0 / (2.0 * g.a3),
            1.0 / (2.0 * g.zeta1),
            1.0 / (2.0 * g.g1),
            0.5 * p.arms[i].hub_inertia,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        (2.0 * h / (phi2 * phi5 * phi)).sqrt()
    });
    (z1, z3)
}

/// Everything the trace logs about the functional at one sample.
#[allow(clippy::too_many_arguments)]
pub fn energy_report(
    plant: &Plant,
    state: &PlantState,
    setpoint: &Setpoint,
    signals: &LoopSignals,
    adaptive: &AdaptiveState,
    gains: &NabfcGains,
    analysis: &GainConditionParams,
    bound_inputs: Option<(f64, f64)>,
) -> EnergyReport {
    let e = energy_e(plant, state, setpoint, analysis.beta1);
    let c = cross_c(plant, state, setpoint, analysis.beta2);
    let v = measurable_v(plant, signals, adaptive, gains);
    let bounds = bound_inputs.map(|(h, phi)| uub_bounds(h, phi, plant, gains, analysis));
    EnergyReport {
        e,
        c,
        h_meas: e + c + v,
        phi1: positivity_ratio(analysis.beta1, analysis.beta2, plant.params()),
        z1_bound: bounds.map(|b| b.0),
        z3_bound: bounds.map(|b| b.1),
        constraint_residual: plant.constraint_residual(state),
        estimate_norms: adaptive.norms(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{compute_setpoint, NabfcNetworks};
    use crate::plant::PlantParams;
    use approx::assert_relative_eq;

    fn analysis() -> GainConditionParams {
        GainConditionParams {
            beta1: 2.0,
            beta2: 3.0,
            vartheta1: 1.0,
            vartheta2: 1.0,
            vartheta3: 1.0,
            vartheta4: [1.0; 2],
            vartheta5: [1.0; 2],
            vartheta6: [1.0; 2],
            vartheta7: [1.0; 2],
            b3: 2.0,
            gamma3: 2.0,
            g3: [2.0; 2],
            zeta3: [2.0; 2],
        }
    }

    fn setup() -> (Plant, Setpoint) {
        let plant = Plant::new(PlantParams::default(), 39).unwrap();
        let sp = compute_setpoint(-0.5, 3f64.to_radians(), plant.params(), plant.grid());
        (plant, sp)
    }

    #[test]
    fn zero_at_setpoint() {
        let (plant, sp) = setup();
        let mut st = plant.initial_state(sp.y_m_d, sp.theta_d);
        st.deflection = sp.profile.clone();
        plant.project(&mut st);
        assert!(energy_e(&plant, &st, &sp, 2.0).abs() < 1e-20);
        assert_eq!(cross_c(&plant, &st, &sp, 3.0), 0.0);
    }

    #[test]
    fn rigid_rotation_has_no_curvature_energy() {
        let (plant, sp) = setup();
        let mut st = plant.initial_state(sp.y_m_d, sp.theta_d);
        st.deflection = sp.profile.clone();
        // q = 0 and y' = -x e': only the kinetic integral is left
        st.theta_dot = [0.3, 0.0];
        let e = energy_e(&plant, &st, &sp, 2.0);
        let expect = 0.054 * 0.09 * 0.2f64.powi(3) / 3.0;
        assert_relative_eq!(e, expect, max_relative = 1e-3);
    }

    #[test]
    fn beta2_zero_and_still_beams() {
        let (plant, sp) = setup();
        let st = plant.initial_state(0.05, [0.0; 2]);
        assert_eq!(cross_c(&plant, &st, &sp, 0.0), 0.0);
        assert_eq!(cross_c(&plant, &st, &sp, 5.0), 0.0);
    }

    #[test]
    fn exact_estimates_leave_e_plus_c() {
        let (plant, _) = setup();
        let nets = NabfcNetworks::seeded(8, vec![1.0; 7], vec![1.0; 3], 1).unwrap();
        let p = plant.params();
        let ad = AdaptiveState::new(
            &nets,
            p.effective_mass(),
            [p.arms[0].hub_inertia, p.arms[1].hub_inertia],
        );
        let v = measurable_v(&plant, &LoopSignals::default(), &ad, &NabfcGains::default());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn uub_scaling() {
        let (plant, _) = setup();
        let g = NabfcGains::default();
        let a = analysis();
        let (z1, z3) = uub_bounds(0.0, 1.0, &plant, &g, &a);
        assert_eq!((z1, z3), (0.0, [0.0; 2]));
        let (b1, b3) = uub_bounds(1e-3, 1.0, &plant, &g, &a);
        let (b2, b4) = uub_bounds(2e-3, 1.0, &plant, &g, &a);
        assert_relative_eq!(b2 / b1, 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(b4[1] / b3[1], 2f64.sqrt(), epsilon = 1e-12);
    }
}

use crate::controllers::{
    check_gain_conditions, compute_setpoint, nabfc_object_loop, nabfc_posture_loop, pd_control,
    pds_control, AdaptiveDrive, AdaptiveState, BeamSignals, Command, GainReport, LoopSignals,
    NabfcNetworks, Setpoint,
};
use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::monitor;
use crate::plant::{Plant, PlantInputs, PlantState};

use super::config::{ScenarioConfig, ScenarioKind};
use super::trace::{SimTrace, TraceRow};

/// Outcome of one closed-loop run. `aborted` holds the divergence error
/// when the run stopped early; `trace` then ends at the last good sample.
#[derive(Debug)]
pub struct SimRun {
    pub trace: SimTrace,
    pub gain_report: Option<GainReport>,
    pub warnings: Vec<String>,
    pub dt: f64,
    pub steps: usize,
    pub aborted: Option<Error>,
}

/// Step count (a multiple of the stride) and step size covering `duration`
/// exactly with a step no larger than `dt_max`.
pub fn step_plan(duration: f64, dt_max: f64, stride: usize) -> (usize, f64) {
    let samples = (duration / (dt_max * stride as f64) - 1e-9).ceil().max(1.0) as usize;
    let steps = samples * stride;
    (steps, duration / steps as f64)
}

struct Loop<'a> {
    cfg: &'a ScenarioConfig,
    plant: &'a Plant,
    setpoint: &'a Setpoint,
    nets: Option<NabfcNetworks>,
}

struct Sample {
    command: Command,
    signals: LoopSignals,
    drive: Option<AdaptiveDrive>,
}

impl Loop<'_> {
    fn evaluate(&self, state: &PlantState, adaptive: &AdaptiveState) -> Result<Sample> {
        let params = self.plant.params();
        let beam = BeamSignals::new(state, self.setpoint, self.plant.grid());
        let nets = self.nets.as_ref();
        match self.cfg.scenario {
            ScenarioKind::Nabfc => {
                let nets = nets.expect("networks exist for nabfc");
                let g = &self.cfg.nabfc;
                let obj =
                    nabfc_object_loop(state, self.setpoint, adaptive, g, nets, &beam, params)?;
                let arms = [
                    nabfc_posture_loop(state, self.setpoint, adaptive, g, nets, &beam, params, 0)?,
                    nabfc_posture_loop(state, self.setpoint, adaptive, g, nets, &beam, params, 1)?,
                ];
                let mut signals = obj.signals;
                for (i, a) in arms.iter().enumerate() {
                    signals.z3[i] = a.z3;
                    signals.z4[i] = a.z4;
                    signals.s_arm[i] = a.s;
                    signals.alpha2[i] = a.alpha2;
                    signals.alpha2_dot[i] = a.alpha2_dot;
                }
                let [a0, a1] = arms;
                Ok(Sample {
                    command: Command {
                        force: obj.force,
                        torque: [a0.torque, a1.torque],
                    },
                    drive: Some(AdaptiveDrive {
                        s: obj.signals.s,
                        object_basis: obj.basis,
                        object_tanh: obj.tanh_term,
                        mass_regressor: obj.mass_regressor,
                        s_arm: [a0.s, a1.s],
                        inertia_regressor: [a0.inertia_regressor, a1.inertia_regressor],
                        posture_tanh: [a0.tanh_term, a1.tanh_term],
                        posture_basis: [a0.basis, a1.basis],
                    }),
                    signals,
                })
            }
            ScenarioKind::Pds | ScenarioKind::Pd => {
                let command = if self.cfg.scenario == ScenarioKind::Pds {
                    pds_control(state, self.setpoint, &self.cfg.pds, &beam, params)
                } else {
                    pd_control(state, self.setpoint, &self.cfg.pd, &beam, params)
                };
                Ok(Sample {
                    command,
                    signals: observed_signals(state, self.setpoint, &beam, self.cfg),
                    drive: None,
                })
            }
        }
    }
}

/// Backstepping errors of a state, evaluated with the NABFC surface gains
/// so baseline traces carry comparable monitor columns.
fn observed_signals(
    state: &PlantState,
    setpoint: &Setpoint,
    beam: &BeamSignals,
    cfg: &ScenarioConfig,
) -> LoopSignals {
    let g = &cfg.nabfc;
    let z1 = state.y_m - setpoint.y_m_d;
    let alpha1 = -g.c1 * z1 - beam.q_shear_tip.iter().sum::<f64>();
    let alpha1_dot = -g.c1 * state.y_m_dot - beam.shear_rate_tip.iter().sum::<f64>();
    let z2 = state.y_m_dot - alpha1;
    let mut sig = LoopSignals {
        z1,
        z2,
        s: g.mu_bar * z1 + z2,
        alpha1,
        alpha1_dot,
        ..LoopSignals::default()
    };
    for i in 0..2 {
        let p = &g.posture[i];
        let z3 = state.theta[i] - setpoint.theta_d[i];
        sig.z3[i] = z3;
        sig.alpha2[i] = -p.c3 * z3;
        sig.alpha2_dot[i] = -p.c3 * state.theta_dot[i];
        sig.z4[i] = state.theta_dot[i] - sig.alpha2[i];
        sig.s_arm[i] = p.mu * z3 + sig.z4[i];
    }
    sig
}

/// Run one scenario to completion or divergence.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimRun> {
    cfg.validate()?;
    let plant = Plant::new(cfg.plant, cfg.grid)?;
    let setpoint = compute_setpoint(
        cfg.setpoint.lambda1,
        cfg.setpoint.theta1_deg.to_radians(),
        plant.params(),
        plant.grid(),
    );
    let dt_max = cfg.dt.unwrap_or_else(|| plant.default_dt());
    let (steps, dt) = step_plan(cfg.duration, dt_max, cfg.stride);

    let nets = NabfcNetworks::seeded(
        cfg.network.neurons,
        cfg.network.object_scale.clone(),
        cfg.network.posture_scale.clone(),
        cfg.seed,
    )?;
    let mut adaptive = AdaptiveState::new(&nets, cfg.network.m_hat0, cfg.network.j_hat0);

    let mut warnings = Vec::new();
    let gain_report = (cfg.scenario == ScenarioKind::Nabfc).then(|| {
        let report = check_gain_conditions(&cfg.nabfc, &cfg.analysis, plant.params());
        for c in report.failures() {
            warnings.push(format!(
                "gain condition group {} `{}` fails with margin {:.4e}",
                c.group, c.label, c.margin
            ));
        }
        report
    });

    let ctl = Loop {
        cfg,
        plant: &plant,
        setpoint: &setpoint,
        nets: (cfg.scenario == ScenarioKind::Nabfc).then_some(nets),
    };
    let limits = cfg.actuators;
    let mut state = plant.initial_state(cfg.initial.y_m, cfg.initial.theta);
    let mut trace = SimTrace::new(setpoint.lambda_d, setpoint.theta_d, cfg.scenario.name());
    let mut aborted = None;

    for step in 0..=steps {
        let sample = ctl.evaluate(&state, &adaptive)?;
        let cmd = sample.command;
        let inputs = PlantInputs {
            force: limits.tip.apply(cmd.force),
            torque: [
                limits.root.apply(cmd.torque[0]),
                limits.root.apply(cmd.torque[1]),
            ],
        };
        if step % cfg.stride == 0 {
            let report = monitor::energy_report(
                &plant,
                &state,
                &setpoint,
                &sample.signals,
                &adaptive,
                &cfg.nabfc,
                &cfg.analysis,
                None,
            );
            let contact = plant.contact_forces(&state, &inputs, &cfg.uncertainty);
            trace.push(TraceRow::new(
                &state,
                &contact,
                &cmd,
                &inputs,
                &sample.signals,
                &report,
            ));
        }
        if step == steps {
            break;
        }
        match plant.step(&state, &inputs, &cfg.uncertainty, dt) {
            Ok(next) => state = next,
            Err(e) => {
                aborted = Some(e);
                break;
            }
        }
        if let Some(drive) = &sample.drive {
            adaptive = rk4_step(&adaptive, dt, |a| a.rates(drive, &cfg.nabfc));
            if !adaptive.is_finite() {
                aborted = Some(Error::Divergence {
                    t: state.t,
                    magnitude: f64::INFINITY,
                });
                break;
            }
        }
    }

    Ok(SimRun {
        trace,
        gain_report,
        warnings,
        dt,
        steps,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_hits_duration() {
        let (steps, dt) = step_plan(1.0, 8.57e-6, 100);
        assert_eq!(steps % 100, 0);
        assert!(dt <= 8.57e-6);
        assert!((dt * steps as f64 - 1.0).abs() < 1e-12);
        let (steps, dt) = step_plan(1.0, 1e-3, 10);
        assert_eq!(steps, 1000);
        assert_eq!(dt, 1e-3);
    }
}

//! Coupled PDE-ODE model of two flexible arms holding a rigid object.
//!
//! Each arm deflection `w_i(x, t)` obeys `w_tt + (EI/rho) w_xxxx = x theta_tt`
//! on a clamped root; the rotor hubs and the object are ODEs driven by the
//! root curvature and tip shear. The grasp constraint
//! `l theta_i - w_i(l) - y_M + d0 = 0` slaves each tip node algebraically, so
//! the contact forces are recovered in closed form instead of integrated.

use serde::{Deserialize, Serialize};

use crate::beam::{ArmParams, BeamField, BeamGrid};
use crate::error::{Error, Result};
use crate::integrate::{rk4_step, OdeState};

/// Any state component beyond this magnitude is reported as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    pub arms: [ArmParams; 2],
    /// Grasped object mass (kg).
    pub object_mass: f64,
    /// Constant offset in the grasp constraint (m).
    pub constraint_offset: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        let arm = ArmParams {
            flexural_rigidity: 0.115,
            linear_density: 0.054,
            length: 0.2,
            tip_mass: 0.1,
            hub_inertia: 0.0073,
        };
        Self {
            arms: [arm, arm],
            object_mass: 0.3,
            constraint_offset: 0.1,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        for arm in &self.arms {
            arm.validate()?;
        }
        if (self.arms[0].length - self.arms[1].length).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                field: "arms.length".into(),
                reason: "both arms must share one length".into(),
            });
        }
        if !(self.object_mass > 0.0) {
            return Err(Error::InvalidParameter {
                field: "object_mass".into(),
                reason: "must be > 0".into(),
            });
        }
        if !(self.constraint_offset > 0.0) {
            return Err(Error::InvalidParameter {
                field: "constraint_offset".into(),
                reason: "must be > 0".into(),
            });
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.arms[0].length
    }

    /// Translational mass seen by the object equation: object plus both
    /// tip masses, which move with the object through the constraint.
    pub fn effective_mass(&self) -> f64 {
        self.object_mass + self.arms[0].tip_mass + self.arms[1].tip_mass
    }

    /// Default step `0.5 dx^2 sqrt(rho/EI)` for the stiffer arm. The discrete
    /// biharmonic operator has spectral radius near `4 sqrt(EI/rho) / dx^2`,
    /// which this keeps inside the RK4 imaginary-axis stability interval.
    pub fn stable_dt(&self, grid: &BeamGrid) -> f64 {
        let c = self
            .arms
            .iter()
            .map(|a| a.wave_coefficient())
            .fold(0.0_f64, f64::max);
        0.5 * grid.dx() * grid.dx() / c.sqrt()
    }
}

/// Structured model uncertainty: a root torque proportional to root
/// curvature rate and an object force proportional to the tip shear rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UncertaintyModel {
    pub scale_root: f64,
    pub scale_tip: f64,
}

impl Default for UncertaintyModel {
    fn default() -> Self {
        Self {
            scale_root: -0.1,
            scale_tip: -0.05,
        }
    }
}

impl UncertaintyModel {
    pub const NONE: Self = Self {
        scale_root: 0.0,
        scale_tip: 0.0,
    };
}

/// Uncertain force on the object and torques on the hubs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Disturbance {
    pub force: f64,
    pub torque: [f64; 2],
}

/// Actuator outputs actually reaching the plant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantInputs {
    /// End-effector force (N).
    pub force: f64,
    /// Root torques (N·m).
    pub torque: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactForces {
    /// Lagrange multipliers (N).
    pub lambda: [f64; 2],
    /// Reaction forces `f_i = (-1)^i lambda_i` with arms numbered from 1.
    pub reaction: [f64; 2],
    /// Same multipliers via `m_i y_M'' + EI_i w_xxx_i(l)`.
    pub lambda_check: [f64; 2],
}

/// Full plant state. The tip nodes of `deflection` and `deflection_rate`
/// always satisfy the grasp constraint and its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub t: f64,
    pub theta: [f64; 2],
    pub theta_dot: [f64; 2],
    pub y_m: f64,
    pub y_m_dot: f64,
    pub deflection: [BeamField; 2],
    pub deflection_rate: [BeamField; 2],
}

impl OdeState for PlantState {
    fn add_scaled(&mut self, rate: &Self, k: f64) {
        self.t += k * rate.t;
        for i in 0..2 {
            self.theta[i] += k * rate.theta[i];
            self.theta_dot[i] += k * rate.theta_dot[i];
            self.deflection[i].add_scaled(&rate.deflection[i], k);
            self.deflection_rate[i].add_scaled(&rate.deflection_rate[i], k);
        }
        self.y_m += k * rate.y_m;
        self.y_m_dot += k * rate.y_m_dot;
    }
}

impl PlantState {
    pub fn max_abs(&self) -> f64 {
        let mut m = self.y_m.abs().max(self.y_m_dot.abs());
        for i in 0..2 {
            m = m
                .max(self.theta[i].abs())
                .max(self.theta_dot[i].abs())
                .max(self.deflection[i].max_abs())
                .max(self.deflection_rate[i].max_abs());
        }
        m
    }

    fn is_finite(&self) -> bool {
        self.max_abs().is_finite()
    }
}

/// Plant parameters bound to a spatial grid.
#[derive(Debug, Clone)]
pub struct Plant {
    params: PlantParams,
    grid: BeamGrid,
}

impl Plant {
    pub fn new(params: PlantParams, n_interior: usize) -> Result<Self> {
        params.validate()?;
        let grid = BeamGrid::new(params.length(), n_interior)?;
        Ok(Self { params, grid })
    }

    pub fn params(&self) -> &PlantParams {
        &self.params
    }

    pub fn grid(&self) -> &BeamGrid {
        &self.grid
    }

    pub fn default_dt(&self) -> f64 {
        self.params.stable_dt(&self.grid)
    }

    /// Tip deflection required by the grasp constraint.
    pub fn constrained_tip(&self, theta: f64, y_m: f64) -> f64 {
        self.params.length() * theta - y_m + self.params.constraint_offset
    }

    /// Resting state: zero rates, each arm bent into the static tip-load
    /// cubic whose tip value satisfies the constraint.
    pub fn initial_state(&self, y_m0: f64, theta0: [f64; 2]) -> PlantState {
        let l = self.params.length();
        let deflection = theta0.map(|th| {
            let tip = self.constrained_tip(th, y_m0);
            self.grid
                .sample(|x| tip * x * x * (3.0 * l - x) / (2.0 * l.powi(3)))
        });
        let mut state = PlantState {
            t: 0.0,
            theta: theta0,
            theta_dot: [0.0; 2],
            y_m: y_m0,
            y_m_dot: 0.0,
            deflection,
            deflection_rate: [BeamField::zeros(&self.grid), BeamField::zeros(&self.grid)],
        };
        self.project(&mut state);
        state
    }

    /// Reset tip nodes onto the constraint and its rate.
    pub fn project(&self, state: &mut PlantState) {
        let l = self.params.length();
        for i in 0..2 {
            let tip = self.constrained_tip(state.theta[i], state.y_m);
            state.deflection[i].set_tip(tip);
            state.deflection_rate[i].set_tip(l * state.theta_dot[i] - state.y_m_dot);
        }
    }

    /// Constraint residuals `l theta_i - w_i(l) - y_M + d0`.
    pub fn constraint_residual(&self, state: &PlantState) -> [f64; 2] {
        [0, 1].map(|i| self.constrained_tip(state.theta[i], state.y_m) - state.deflection[i].tip())
    }

    pub fn inject_uncertainty(&self, state: &PlantState, unc: &UncertaintyModel) -> Disturbance {
        let g = &self.grid;
        let torque = [0, 1].map(|i| {
            unc.scale_root
                * self.params.arms[i].flexural_rigidity
                * state.deflection_rate[i].d2_at_root(g)
        });
        let ei_sum = self.params.arms[0].flexural_rigidity + self.params.arms[1].flexural_rigidity;
        let shear_rate =
            state.deflection_rate[0].d3_at_tip(g) + state.deflection_rate[1].d3_at_tip(g);
        Disturbance {
            force: unc.scale_tip * ei_sum * shear_rate,
            torque,
        }
    }

    /// Hub and object accelerations `([theta_1'', theta_2''], y_M'')`.
    fn rigid_accelerations(
        &self,
        state: &PlantState,
        inputs: &PlantInputs,
        dist: &Disturbance,
    ) -> ([f64; 2], f64) {
        let g = &self.grid;
        let p = &self.params;
        let theta_dd = [0, 1].map(|i| {
            let arm = &p.arms[i];
            (inputs.torque[i] + dist.torque[i]
                - arm.flexural_rigidity * state.deflection[i].d2_at_root(g))
                / arm.hub_inertia
        });
        let shear: f64 = (0..2)
            .map(|i| p.arms[i].flexural_rigidity * state.deflection[i].d3_at_tip(g))
            .sum();
        let y_dd = (inputs.force + dist.force - shear) / p.effective_mass();
        (theta_dd, y_dd)
    }

    /// Time derivative of the state under actuator outputs `inputs`.
    pub fn derivative(
        &self,
        state: &PlantState,
        inputs: &PlantInputs,
        unc: &UncertaintyModel,
    ) -> PlantState {
        let g = &self.grid;
        let l = self.params.length();
        let dist = self.inject_uncertainty(state, unc);
        let (theta_dd, y_dd) = self.rigid_accelerations(state, inputs, &dist);

        let accel = [0, 1].map(|i| {
            let arm = &self.params.arms[i];
            let c = arm.wave_coefficient();
            let mut d4 = vec![0.0; g.n_interior()];
            state.deflection[i].d4_interior_into(g, &mut d4);
            let mut values = vec![0.0; g.n_nodes()];
            for (k, d) in d4.iter().enumerate() {
                let j = k + 1;
                values[j] = g.node_x()[j] * theta_dd[i] - c * d;
            }
            values[g.tip_index()] = l * theta_dd[i] - y_dd;
            BeamField::from_values(values)
        });

        PlantState {
            t: 1.0,
            theta: state.theta_dot,
            theta_dot: theta_dd,
            y_m: state.y_m_dot,
            y_m_dot: y_dd,
            deflection: state.deflection_rate.clone(),
            deflection_rate: accel,
        }
    }

    /// Advance by `dt` with inputs held over the step, then re-project the
    /// tips onto the constraint.
    pub fn step(
        &self,
        state: &PlantState,
        inputs: &PlantInputs,
        unc: &UncertaintyModel,
        dt: f64,
    ) -> Result<PlantState> {
        let mut next = rk4_step(state, dt, |s| self.derivative(s, inputs, unc));
        self.project(&mut next);
        let magnitude = next.max_abs();
        if !next.is_finite() || magnitude > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                t: next.t,
                magnitude,
            });
        }
        Ok(next)
    }

    /// Sample-and-hold step: `controller` is evaluated once at the start state.
    pub fn step_with<F>(
        &self,
        state: &PlantState,
        unc: &UncertaintyModel,
        dt: f64,
        mut controller: F,
    ) -> Result<PlantState>
    where
        F: FnMut(&PlantState) -> PlantInputs,
    {
        let inputs = controller(state);
        self.step(state, &inputs, unc, dt)
    }

    /// Contact forces from the eliminated-multiplier relations, together
    /// with the tip-mass balance form as a cross-check.
    pub fn contact_forces(
        &self,
        state: &PlantState,
        inputs: &PlantInputs,
        unc: &UncertaintyModel,
    ) -> ContactForces {
        let g = &self.grid;
        let p = &self.params;
        let dist = self.inject_uncertainty(state, unc);
        let m = p.effective_mass();
        let (m1, m2) = (p.arms[0].tip_mass, p.arms[1].tip_mass);
        let s1 = p.arms[0].flexural_rigidity * state.deflection[0].d3_at_tip(g);
        let s2 = p.arms[1].flexural_rigidity * state.deflection[1].d3_at_tip(g);
        let drive = inputs.force + dist.force;
        let lambda = [
            (m1 * drive + (m2 + p.object_mass) * s1 - m1 * s2) / m,
            (m2 * drive + (m1 + p.object_mass) * s2 - m2 * s1) / m,
        ];
        let (_, y_dd) = self.rigid_accelerations(state, inputs, &dist);
        let lambda_check = [m1 * y_dd + s1, m2 * y_dd + s2];
        ContactForces {
            lambda,
            reaction: [-lambda[0], lambda[1]],
            lambda_check,
        }
    }

    pub fn kinetic_energy(&self, state: &PlantState) -> f64 {
        let g = &self.grid;
        let l = self.params.length();
        let mut ke = 0.5 * self.params.object_mass * state.y_m_dot * state.y_m_dot;
        let mut integrand = vec![0.0; g.n_nodes()];
        for i in 0..2 {
            let arm = &self.params.arms[i];
            let rate = state.deflection_rate[i].values();
            for ((slot, &x), &wd) in integrand.iter_mut().zip(g.node_x()).zip(rate) {
                let v = x * state.theta_dot[i] - wd;
                *slot = v * v;
            }
            let tip_speed = l * state.theta_dot[i] - state.deflection_rate[i].tip();
            ke += 0.5 * arm.linear_density * g.integrate(&integrand)
                + 0.5 * arm.tip_mass * tip_speed * tip_speed
                + 0.5 * arm.hub_inertia * state.theta_dot[i] * state.theta_dot[i];
        }
        ke
    }

    pub fn potential_energy(&self, state: &PlantState) -> f64 {
        let g = &self.grid;
        (0..2)
            .map(|i| {
                let curv: Vec<f64> = state.deflection[i]
                    .d2_profile(g)
                    .into_iter()
                    .map(|c| c * c)
                    .collect();
                0.5 * self.params.arms[i].flexural_rigidity * g.integrate(&curv)
            })
            .sum()
    }

    pub fn total_energy(&self, state: &PlantState) -> f64 {
        self.kinetic_energy(state) + self.potential_energy(state)
    }
}

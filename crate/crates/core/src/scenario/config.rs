use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actuators::ActuatorLimits;
use crate::beam::MIN_INTERIOR_NODES;
use crate::controllers::{GainConditionParams, NabfcGains, PdGains, PdsGains};
use crate::error::{Error, Result};
use crate::plant::{PlantParams, UncertaintyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Nabfc,
    Pds,
    Pd,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Nabfc => "nabfc",
            ScenarioKind::Pds => "pds",
            ScenarioKind::Pd => "pd",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nabfc" => Ok(ScenarioKind::Nabfc),
            "pds" => Ok(ScenarioKind::Pds),
            "pd" => Ok(ScenarioKind::Pd),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected nabfc, pds or pd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorConfig {
    pub root: ActuatorLimits,
    pub tip: ActuatorLimits,
}

impl Default for ActuatorConfig {
    fn default() -> Self {
        Self {
            root: ActuatorLimits::ROOT_DEFAULT,
            tip: ActuatorLimits::TIP_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetpointConfig {
    /// Desired multiplier on the first arm (N).
    pub lambda1: f64,
    /// Desired first hub angle (degrees).
    pub theta1_deg: f64,
}

impl Default for SetpointConfig {
    fn default() -> Self {
        Self {
            lambda1: -0.5,
            theta1_deg: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub y_m: f64,
    pub theta: [f64; 2],
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            y_m: 0.05,
            theta: [0.0; 2],
        }
    }
}

/// Approximator layout and initial estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub neurons: usize,
    /// Per-input scale of `[z1, s, alpha1', w_xxx1, w_xxx2, w_xxx1', w_xxx2']`.
    pub object_scale: Vec<f64>,
    /// Per-input scale of `[z3, s_i, alpha2_i']`.
    pub posture_scale: Vec<f64>,
    pub m_hat0: f64,
    pub j_hat0: [f64; 2],
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            neurons: 32,
            object_scale: vec![0.05, 1.0, 10.0, 10.0, 10.0, 100.0, 100.0],
            posture_scale: vec![0.1, 1.0, 1.0],
            m_hat0: 0.0,
            j_hat0: [0.0; 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    /// Simulated time (s).
    pub duration: f64,
    /// Interior nodes per arm.
    pub grid: usize,
    /// Step size (s); derived from the stability bound when absent.
    pub dt: Option<f64>,
    /// Integration steps per logged sample.
    pub stride: usize,
    /// Seed for the approximator centres.
    pub seed: u64,
    pub plant: PlantParams,
    pub actuators: ActuatorConfig,
    pub uncertainty: UncertaintyModel,
    pub setpoint: SetpointConfig,
    pub initial: InitialConfig,
    pub nabfc: NabfcGains,
    pub network: NetworkConfig,
    pub analysis: GainConditionParams,
    pub pds: PdsGains,
    pub pd: PdGains,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::for_scenario(ScenarioKind::Nabfc)
    }
}

impl ScenarioConfig {
    /// Reference configuration of one scenario.
    pub fn for_scenario(kind: ScenarioKind) -> Self {
        Self {
            scenario: kind,
            duration: 3.0,
            grid: 39,
            dt: None,
            stride: 100,
            seed: 7,
            plant: PlantParams::default(),
            actuators: ActuatorConfig::default(),
            uncertainty: UncertaintyModel::default(),
            setpoint: SetpointConfig::default(),
            initial: InitialConfig::default(),
            nabfc: NabfcGains::default(),
            network: NetworkConfig::default(),
            analysis: GainConditionParams::default(),
            pds: PdsGains::default(),
            pd: PdGains::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| {
            Err(Error::InvalidParameter {
                field: field.into(),
                reason,
            })
        };
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration", format!("must be > 0, got {}", self.duration));
        }
        if self.grid < MIN_INTERIOR_NODES {
            return bad(
                "grid",
                format!("must be >= {MIN_INTERIOR_NODES}, got {}", self.grid),
            );
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad("dt", format!("must be > 0, got {dt}"));
            }
        }
        if self.stride == 0 {
            return bad("stride", "must be >= 1".into());
        }
        self.plant.validate()?;
        self.actuators.root.validate()?;
        self.actuators.tip.validate()?;
        for (name, v) in [
            ("setpoint.lambda1", self.setpoint.lambda1),
            ("setpoint.theta1_deg", self.setpoint.theta1_deg),
            ("initial.y_m", self.initial.y_m),
            ("initial.theta[0]", self.initial.theta[0]),
            ("initial.theta[1]", self.initial.theta[1]),
            ("uncertainty.scale_root", self.uncertainty.scale_root),
            ("uncertainty.scale_tip", self.uncertainty.scale_tip),
        ] {
            if !v.is_finite() {
                return bad(name, "must be finite".into());
            }
        }
        match self.scenario {
            ScenarioKind::Nabfc => {
                self.nabfc.validate()?;
                self.analysis.validate()?;
                let n = &self.network;
                if n.neurons == 0 {
                    return bad("network.neurons", "must be >= 1".into());
                }
                if n.object_scale.len() != 7 {
                    return bad(
                        "network.object_scale",
                        format!("needs 7 entries, got {}", n.object_scale.len()),
                    );
                }
                if n.posture_scale.len() != 3 {
                    return bad(
                        "network.posture_scale",
                        format!("needs 3 entries, got {}", n.posture_scale.len()),
                    );
                }
            }
            ScenarioKind::Pds => check_finite_gains("pds", &[self.pds.kp, self.pds.kv])?,
            ScenarioKind::Pd => check_finite_gains("pd", &[self.pd.kp, self.pd.kv])?,
        }
        Ok(())
    }
}

fn check_finite_gains(block: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite() && *v >= 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: format!("{block}.kp/kv"),
            reason: "gains must be finite and >= 0".into(),
        })
    }
}

//! Sufficient stability conditions on the NABFC gains and the analysis
//! constants that accompany them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NabfcGains;
use crate::error::{Error, Result};
use crate::plant::PlantParams;

/// Constants that appear only in the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainConditionParams {
    pub beta1: f64,
    pub beta2: f64,
    pub vartheta1: f64,
    pub vartheta2: f64,
    pub vartheta3: f64,
    pub vartheta4: [f64; 2],
    pub vartheta5: [f64; 2],
    pub vartheta6: [f64; 2],
    pub vartheta7: [f64; 2],
    pub b3: f64,
    pub gamma3: f64,
    pub g3: [f64; 2],
    pub zeta3: [f64; 2],
}

impl Default for GainConditionParams {
    fn default() -> Self {
        Self {
            beta1: 500.0,
            beta2: 2.0e3,
            vartheta1: 0.5,
            vartheta2: 2.0,
            vartheta3: 0.25,
            vartheta4: [100.0; 2],
            vartheta5: [200.0; 2],
            vartheta6: [0.5; 2],
            vartheta7: [1.0; 2],
            b3: 2.0,
            gamma3: 2.0,
            g3: [2.0; 2],
            zeta3: [2.0; 2],
        }
    }
}

impl GainConditionParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("vartheta1", self.vartheta1),
            ("vartheta2", self.vartheta2),
            ("vartheta3", self.vartheta3),
            ("vartheta4[0]", self.vartheta4[0]),
            ("vartheta4[1]", self.vartheta4[1]),
            ("vartheta5[0]", self.vartheta5[0]),
            ("vartheta5[1]", self.vartheta5[1]),
            ("vartheta6[0]", self.vartheta6[0]),
            ("vartheta6[1]", self.vartheta6[1]),
            ("vartheta7[0]", self.vartheta7[0]),
            ("vartheta7[1]", self.vartheta7[1]),
            ("b3", self.b3),
            ("gamma3", self.gamma3),
            ("g3[0]", self.g3[0]),
            ("g3[1]", self.g3[1]),
            ("zeta3[0]", self.zeta3[0]),
            ("zeta3[1]", self.zeta3[1]),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    field: format!("analysis.{name}"),
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// One inequality `margin > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainCheck {
    /// Inequality group, 1-based as `(group, arm)` with arm 0 for object-loop terms.
    pub group: u8,
    pub arm: Option<usize>,
    pub label: String,
    pub margin: f64,
}

impl GainCheck {
    pub fn passed(&self) -> bool {
        self.margin > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub checks: Vec<GainCheck>,
}

impl GainReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(GainCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &GainCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// Smallest margin across all checks.
    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

impl std::fmt::Display for GainReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let arm = c.arm.map(|i| format!(" arm {}", i + 1)).unwrap_or_default();
            writeln!(
                f,
                "{:<4} group {}{:<6} {:<52} margin {:+.6e}",
                if c.passed() { "ok" } else { "FAIL" },
                c.group,
                arm,
                c.label,
                c.margin
            )?;
        }
        Ok(())
    }
}

/// Evaluate every inequality literally and report its margin.
pub fn check_gain_conditions(
    gains: &NabfcGains,
    analysis: &GainConditionParams,
    params: &PlantParams,
) -> GainReport {
    let a = analysis;
    let g = gains;
    let l = params.length();
    let ei = [
        params.arms[0].flexural_rigidity,
        params.arms[1].flexural_rigidity,
    ];
    let rho = [params.arms[0].linear_density, params.arms[1].linear_density];
    let ei_sum = ei[0] + ei[1];
    let obj = g.mu_bar + g.c1;

    let mut checks = Vec::new();
    let mut push = |group: u8, arm: Option<usize>, label: &str, margin: f64| {
        checks.push(GainCheck {
            group,
            arm,
            label: label.to_string(),
            margin,
        });
    };

    push(
        1,
        None,
        "1 - v1/(mu_bar+c1) + beta1 EIsum (1/2 - v3 - 1/v2)",
        1.0 - a.vartheta1 / obj + a.beta1 * ei_sum * (0.5 - a.vartheta3 - 1.0 / a.vartheta2),
    );
    push(2, None, "k - beta1 EIsum / 2", g.k - 0.5 * a.beta1 * ei_sum);
    for i in 0..2 {
        push(
            2,
            Some(i),
            "k_i - beta1 EI_i v4_i - beta1 l^2 rho_i / v6_i",
            g.posture[i].k
                - a.beta1 * ei[i] * a.vartheta4[i]
                - a.beta1 * l * l * rho[i] / a.vartheta6[i],
        );
    }
    push(3, None, "1 - 1/b3", 1.0 - 1.0 / a.b3);
    push(3, None, "1 - 1/gamma3", 1.0 - 1.0 / a.gamma3);
    for i in 0..2 {
        push(3, Some(i), "1 - 1/g3_i", 1.0 - 1.0 / a.g3[i]);
        push(3, Some(i), "1 - 1/zeta3_i", 1.0 - 1.0 / a.zeta3[i]);
    }
    for i in 0..2 {
        push(
            4,
            Some(i),
            "1 - beta1 EI_i / v5_i - beta2 l^2 rho_i v7_i",
            1.0 - a.beta1 * ei[i] / a.vartheta5[i] - a.beta2 * l * l * rho[i] * a.vartheta7[i],
        );
    }
    push(
        5,
        None,
        "beta1 EIsum (1/2 - (mu_bar+c1)/v3) - 1/v1",
        a.beta1 * ei_sum * (0.5 - obj / a.vartheta3) - 1.0 / a.vartheta1,
    );
    for i in 0..2 {
        let arm = g.posture[i].mu + g.posture[i].c3;
        push(
            6,
            Some(i),
            "beta2 l / 2 - beta1 (1/v4_i + v5_i (mu_i+c3_i))",
            0.5 * a.beta2 * l - a.beta1 * (1.0 / a.vartheta4[i] + a.vartheta5[i] * arm),
        );
    }
    for i in 0..2 {
        let arm = g.posture[i].mu + g.posture[i].c3;
        push(
            7,
            Some(i),
            "1/2 - l v6_i - l (mu_i+c3_i) / v7_i",
            0.5 - l * a.vartheta6[i] - l * arm / a.vartheta7[i],
        );
    }
    push(8, None, "1/2 - v2 (mu_bar+c1)", 0.5 - a.vartheta2 * obj);
    GainReport { checks }
}

/// Positivity ratio bounding the cross term by the beam energy.
pub fn positivity_ratio(beta1: f64, beta2: f64, params: &PlantParams) -> f64 {
    let l = params.length();
    let rho_min = params.arms[0]
        .linear_density
        .min(params.arms[1].linear_density);
    let ei_min = params.arms[0]
        .flexural_rigidity
        .min(params.arms[1].flexural_rigidity);
    beta2 * l * rho_min * 1f64.min(l * l) / (0.5 * beta1 * ei_min.min(rho_min))
}

/// Seeded log-uniform random search for analysis constants that satisfy
/// every condition for `gains` and keep the positivity ratio below one.
/// Returns the candidate with the largest worst normalised margin.
pub fn search_analysis_params(
    gains: &NabfcGains,
    params: &PlantParams,
    seed: u64,
    iterations: usize,
) -> (GainConditionParams, GainReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_u = |lo: f64, hi: f64| -> f64 { (rng.gen_range(lo.ln()..hi.ln())).exp() };
    let score = |a: &GainConditionParams| {
        let report = check_gain_conditions(gains, a, params);
        let phi = positivity_ratio(a.beta1, a.beta2, params);
        (report.worst_margin().min(1.0 - phi), report)
    };

    let mut best: Option<(f64, GainConditionParams, GainReport)> = None;
    for _ in 0..iterations {
        let candidate = GainConditionParams {
            beta1: log_u(1e-2, 1e4),
            beta2: log_u(1e-2, 1e7),
            vartheta1: log_u(1e-3, 1e4),
            vartheta2: log_u(1e-4, 1e2),
            vartheta3: log_u(1e-3, 1e2),
            vartheta4: [log_u(1e-4, 1e3); 2],
            vartheta5: [log_u(1e-2, 1e5); 2],
            vartheta6: [log_u(1e-5, 1e1); 2],
            vartheta7: [log_u(1e-4, 1e3); 2],
            b3: 2.0,
            gamma3: 2.0,
            g3: [2.0; 2],
            zeta3: [2.0; 2],
        };
        let (s, report) = score(&candidate);
        if best.as_ref().is_none_or(|b| s > b.0) {
            best = Some((s, candidate, report));
        }
    }
    let (_, a, r) = best.expect("iterations > 0");
    (a, r)
}

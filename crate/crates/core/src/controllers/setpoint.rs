use crate::beam::{BeamField, BeamGrid};
use crate::plant::PlantParams;

/// Static grasp target: contact multipliers, hub angles, object position and
/// the deflection profiles they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct Setpoint {
    pub lambda_d: [f64; 2],
    pub theta_d: [f64; 2],
    pub y_m_d: f64,
    pub profile: [BeamField; 2],
}

/// Static deflection under tip multiplier `lambda`:
/// `lambda x^2 / (2 EI) (x/3 - l)`.
pub fn static_profile(lambda: f64, flexural_rigidity: f64, length: f64, x: f64) -> f64 {
    lambda * x * x / (2.0 * flexural_rigidity) * (x / 3.0 - length)
}

/// Derive the full static target from the first arm's multiplier and angle.
/// The second multiplier is opposite; the second angle and the object
/// position follow from the grasp constraint on both arms.
pub fn compute_setpoint(
    lambda1_d: f64,
    theta1_d: f64,
    params: &PlantParams,
    grid: &BeamGrid,
) -> Setpoint {
    let l = params.length();
    let ei = [
        params.arms[0].flexural_rigidity,
        params.arms[1].flexural_rigidity,
    ];
    let lambda_d = [lambda1_d, -lambda1_d];
    let theta2_d = theta1_d + lambda1_d * l * l / 3.0 * (ei[0] + ei[1]) / (ei[0] * ei[1]);
    let y_m_d = l * theta1_d + l.powi(3) * lambda1_d / (3.0 * ei[0]) + params.constraint_offset;
    let profile = [0, 1].map(|i| grid.sample(|x| static_profile(lambda_d[i], ei[i], l, x)));
    Setpoint {
        lambda_d,
        theta_d: [theta1_d, theta2_d],
        y_m_d,
        profile,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_setpoint() {
        let p = PlantParams::default();
        let g = BeamGrid::new(0.2, 39).unwrap();
        let sp = compute_setpoint(-0.5, 3f64.to_radians(), &p, &g);
        assert_eq!(sp.lambda_d[1], 0.5);
        assert_relative_eq!(sp.theta_d[0], 0.052360, epsilon = 5e-7);
        // hand re-derivation: 3 pi/180 - 0.5 * 0.04 / 3 * 0.23 / 0.115^2
        let theta2 = 3.0 * std::f64::consts::PI / 180.0 - 0.5 * 0.04 / 3.0 * 0.23 / (0.115 * 0.115);
        assert_relative_eq!(sp.theta_d[1], theta2, epsilon = 1e-12);
        assert_relative_eq!(sp.theta_d[1], -0.06358215, epsilon = 5e-9);
        let y = 0.2 * 3.0 * std::f64::consts::PI / 180.0 - 0.008 * 0.5 / (3.0 * 0.115) + 0.1;
        assert_relative_eq!(sp.y_m_d, y, epsilon = 1e-12);
        assert_relative_eq!(sp.y_m_d, 0.098878, epsilon = 5e-7);
        assert_relative_eq!(sp.profile[0].tip(), 0.011594, epsilon = 5e-7);
        assert_relative_eq!(sp.profile[0].d3_at_tip(&g), -0.5 / 0.115, epsilon = 1e-8);
        assert_relative_eq!(sp.profile[1].d3_at_tip(&g), 0.5 / 0.115, epsilon = 1e-8);
    }

    #[test]
    fn zero_setpoint() {
        let p = PlantParams::default();
        let g = BeamGrid::new(0.2, 9).unwrap();
        let sp = compute_setpoint(0.0, 0.0, &p, &g);
        assert_eq!(sp.theta_d, [0.0, 0.0]);
        assert_eq!(sp.y_m_d, p.constraint_offset);
        assert!(sp.profile.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn profile_is_static_discretely() {
        let p = PlantParams::default();
        for n in [19, 39, 79] {
            let g = BeamGrid::new(0.2, n).unwrap();
            let sp = compute_setpoint(-0.5, 0.0, &p, &g);
            for f in &sp.profile {
                let curv = f.d2_profile(&g);
                assert!(curv.last().unwrap().abs() < 1e-9);
                let resid = f
                    .d4_interior(&g)
                    .iter()
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                // exact on cubics; only rounding remains
                assert!(0.115 * resid < 1e-3, "n = {n}: {resid}");
            }
        }
    }
}

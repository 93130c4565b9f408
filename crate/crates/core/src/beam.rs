//! Spatial discretization of a clamped Euler-Bernoulli arm.
//!
//! Each arm is sampled on a uniform grid with `n_interior + 2` nodes: node 0
//! is the clamped root, the last node is the tip (slaved to the grasp
//! constraint by the plant). Derivatives use second-order central
//! differences; the stencils that reach past either end read ghost values
//! synthesized from the boundary conditions `q(0) = q_x(0) = 0` and
//! `q_xx(l) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest interior node count for which every stencil has support.
pub const MIN_INTERIOR_NODES: usize = 8;

/// Physical constants of one flexible arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmParams {
    /// Flexural rigidity (N·m²).
    pub flexural_rigidity: f64,
    /// Mass per unit length (kg/m).
    pub linear_density: f64,
    /// Arm length (m).
    pub length: f64,
    /// Point mass carried at the tip (kg).
    pub tip_mass: f64,
    /// Rotor hub inertia (kg·m²).
    pub hub_inertia: f64,
}

impl ArmParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("flexural_rigidity", self.flexural_rigidity),
            ("linear_density", self.linear_density),
            ("length", self.length),
            ("tip_mass", self.tip_mass),
            ("hub_inertia", self.hub_inertia),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    field: format!("arm.{name}"),
                    reason: format!("must be strictly positive, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// Bending wave coefficient `EI / rho`.
    pub fn wave_coefficient(&self) -> f64 {
        self.flexural_rigidity / self.linear_density
    }
}

/// Uniform grid on `[0, l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGrid {
    n_interior: usize,
    length: f64,
    dx: f64,
    node_x: Vec<f64>,
}

impl BeamGrid {
    pub fn new(length: f64, n_interior: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter {
                field: "grid.length".into(),
                reason: format!("must be strictly positive, got {length}"),
            });
        }
        if n_interior < MIN_INTERIOR_NODES {
            return Err(Error::InvalidParameter {
                field: "grid.n_interior".into(),
                reason: format!(
                    "needs at least {MIN_INTERIOR_NODES} interior nodes, got {n_interior}"
                ),
            });
        }
        let dx = length / (n_interior + 1) as f64;
        let mut node_x: Vec<f64> = (0..n_interior + 2).map(|j| j as f64 * dx).collect();
        // pin the tip to the exact length rather than the accumulated product
        node_x[n_interior + 1] = length;
        Ok(Self {
            n_interior,
            length,
            dx,
            node_x,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_nodes(&self) -> usize {
        self.n_interior + 2
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn node_x(&self) -> &[f64] {
        &self.node_x
    }

    pub fn tip_index(&self) -> usize {
        self.n_interior + 1
    }

    /// Sample `f` at every node. The root value is forced to zero.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> BeamField {
        let mut values: Vec<f64> = self.node_x.iter().map(|&x| f(x)).collect();
        values[0] = 0.0;
        BeamField { values }
    }

    /// Trapezoidal quadrature of nodal values over `[0, l]`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_nodes());
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.dx * (inner + 0.5 * (values[0] + values[n - 1]))
    }
}

/// Nodal values of a deflection (m) or deflection-rate (m/s) field,
/// including both endpoints. The root value is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamField {
    values: Vec<f64>,
}

impl BeamField {
    pub fn zeros(grid: &BeamGrid) -> Self {
        Self {
            values: vec![0.0; grid.n_nodes()],
        }
    }

    /// Wrap raw nodal values; the root entry is clamped to zero.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        if let Some(root) = values.first_mut() {
            *root = 0.0;
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tip(&self) -> f64 {
        *self.values.last().expect("beam field has nodes")
    }

    pub fn set_tip(&mut self, value: f64) {
        *self.values.last_mut().expect("beam field has nodes") = value;
    }

    /// Mutable access to nodes `1..`; the clamped root stays untouched.
    pub fn free_nodes_mut(&mut self) -> &mut [f64] {
        &mut self.values[1..]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self += k * other`
    pub fn add_scaled(&mut self, other: &BeamField, k: f64) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += k * b;
        }
    }

    /// Node-wise difference `self - other`.
    pub fn minus(&self, other: &BeamField) -> BeamField {
        BeamField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Ghost value left of the root, from the cubic through the root that
    /// satisfies `q(0) = 0` and `q_x(0) = 0`.
    pub(crate) fn root_ghost(&self) -> f64 {
        3.0 * self.values[1] - 0.5 * self.values[2]
    }

    /// Ghost value right of the tip, from `q_xx(l) = 0`.
    pub(crate) fn tip_ghost(&self) -> f64 {
        let n = self.values.len();
        2.0 * self.values[n - 1] - self.values[n - 2]
    }

    /// Value at node `j`, where `j = -1` and `j = n_nodes` return ghosts.
    fn extended(&self, j: isize) -> f64 {
        let n = self.values.len() as isize;
        if j < 0 {
            self.root_ghost()
        } else if j >= n {
            self.tip_ghost()
        } else {
            self.values[j as usize]
        }
    }

    /// Second derivative at the clamped root.
    pub fn d2_at_root(&self, grid: &BeamGrid) -> f64 {
        (self.values[1] + self.root_ghost()) / (grid.dx * grid.dx)
    }

    /// Third derivative at the tip, consistent with `q_xx(l) = 0`.
    pub fn d3_at_tip(&self, grid: &BeamGrid) -> f64 {
        let n = self.values.len();
        let (t, a, b) = (self.values[n - 1], self.values[n - 2], self.values[n - 3]);
        (-t + 2.0 * a - b) / grid.dx.powi(3)
    }

    /// Central first derivative at every node, ghosts included at the ends.
    pub fn d1_profile(&self, grid: &BeamGrid) -> Vec<f64> {
        (0..self.values.len() as isize)
            .map(|j| (self.extended(j + 1) - self.extended(j - 1)) / (2.0 * grid.dx))
            .collect()
    }

    /// Second derivative at every node, ghosts included at the ends.
    pub fn d2_profile(&self, grid: &BeamGrid) -> Vec<f64> {
        let h2 = grid.dx * grid.dx;
        (0..self.values.len() as isize)
            .map(|j| (self.extended(j - 1) - 2.0 * self.extended(j) + self.extended(j + 1)) / h2)
            .collect()
    }

    /// Fourth derivative at the interior nodes `1..=n_interior`.
    pub fn d4_interior(&self, grid: &BeamGrid) -> Vec<f64> {
        let mut out = vec![0.0; grid.n_interior];
        self.d4_interior_into(grid, &mut out);
        out
    }

    pub(crate) fn d4_interior_into(&self, grid: &BeamGrid, out: &mut [f64]) {
        let h4 = grid.dx.powi(4);
        let n_int = grid.n_interior;
        let v = &self.values;
        for (k, slot) in out.iter_mut().enumerate().take(n_int) {
            let j = k + 1;
            let w = if j >= 2 && j + 2 < v.len() {
                [v[j - 2], v[j - 1], v[j], v[j + 1], v[j + 2]]
            } else {
                let j = j as isize;
                [-2, -1, 0, 1, 2].map(|o| self.extended(j + o))
            };
            // repeated differencing of neighbours rounds far less than the
            // expanded 1 -4 6 -4 1 sum, which matters once divided by dx^4
            let d1 = [w[1] - w[0], w[2] - w[1], w[3] - w[2], w[4] - w[3]];
            let d2 = [d1[1] - d1[0], d1[2] - d1[1], d1[3] - d1[2]];
            let stencil = (d2[2] - d2[1]) - (d2[1] - d2[0]);
            *slot = stencil / h4;
        }
    }

    pub fn derivatives(&self, grid: &BeamGrid) -> SpatialDerivatives {
        SpatialDerivatives {
            d2_at_root: self.d2_at_root(grid),
            d2_profile: self.d2_profile(grid),
            d3_at_tip: self.d3_at_tip(grid),
            d4_interior: self.d4_interior(grid),
        }
    }
}

/// Boundary and interior derivatives of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDerivatives {
    pub d2_at_root: f64,
    pub d2_profile: Vec<f64>,
    pub d3_at_tip: f64,
    pub d4_interior: Vec<f64>,
}

/// Third derivative of a velocity field at the tip. Spatial and temporal
/// differencing commute on the semi-discrete state, so this is the same
/// stencil applied to the rate field.
pub fn velocity_third_derivative_at_tip(vel_field: &BeamField, grid: &BeamGrid) -> f64 {
    vel_field.d3_at_tip(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_spacing() {
        let g = BeamGrid::new(0.2, 39).unwrap();
        assert_relative_eq!(g.dx(), 0.005, epsilon = 1e-15);
        assert_eq!(g.n_nodes(), 41);
        assert_eq!(g.node_x()[40], 0.2);

        let g = BeamGrid::new(1.0, 9).unwrap();
        assert_relative_eq!(g.dx(), 0.1, epsilon = 1e-15);
        assert_eq!(g.n_nodes(), 11);
        assert!((g.dx() * 10.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_too_few_nodes() {
        assert!(BeamGrid::new(0.2, 4).is_err());
        assert!(BeamGrid::new(0.0, 39).is_err());
        assert!(BeamGrid::new(0.2, 8).is_ok());
    }

    #[test]
    fn clamped_cubic_tip_shear_is_exact() {
        let g = BeamGrid::new(0.2, 39).unwrap();
        let l = g.length();
        let f = g.sample(|x| x * x * (3.0 * l - x));
        assert_relative_eq!(f.d3_at_tip(&g), -6.0, epsilon = 1e-8);
        for v in f.d4_interior(&g) {
            assert!(v.abs() < 1e-4, "d4 of a cubic should vanish, got {v}");
        }
        assert_relative_eq!(f.d2_at_root(&g), 6.0 * l, epsilon = 1e-10);
    }

    #[test]
    fn zero_field_has_zero_derivatives() {
        let g = BeamGrid::new(0.2, 12).unwrap();
        let d = BeamField::zeros(&g).derivatives(&g);
        assert_eq!(d.d2_at_root, 0.0);
        assert_eq!(d.d3_at_tip, 0.0);
        assert!(d.d2_profile.iter().all(|v| *v == 0.0));
        assert!(d.d4_interior.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn static_contact_profile_tip_shear() {
        // w(x) = lambda x^2 / (2 EI) (x/3 - l), so w''' = lambda / EI
        let (lambda, ei) = (-0.5, 0.115);
        let g = BeamGrid::new(0.2, 39).unwrap();
        let l = g.length();
        let f = g.sample(|x| lambda * x * x / (2.0 * ei) * (x / 3.0 - l));
        assert_relative_eq!(f.d3_at_tip(&g), lambda / ei, epsilon = 1e-8);
        assert_relative_eq!(f.d3_at_tip(&g), -4.3478260869, epsilon = 1e-8);
    }

    #[test]
    fn velocity_tip_stencil() {
        let g = BeamGrid::new(0.2, 39).unwrap();
        let l = g.length();
        assert_eq!(
            velocity_third_derivative_at_tip(&BeamField::zeros(&g), &g),
            0.0
        );
        // x^3 shifted by -3 l x^2 so that the tip curvature vanishes
        let v = g.sample(|x| x.powi(3) - 3.0 * l * x * x);
        assert_relative_eq!(
            velocity_third_derivative_at_tip(&v, &g),
            6.0,
            epsilon = 1e-8
        );
    }

    #[test]
    fn ghosts_reproduce_boundary_conditions() {
        let g = BeamGrid::new(0.2, 15).unwrap();
        let f = g.sample(|x| (3.0 * x).sin() * x * x + 0.3 * x.powi(3));
        let h = g.dx();
        let v = f.values();
        let ghost = f.root_ghost();
        // four-point one-sided slope through (-h, 0, h, 2h)
        let slope = (-2.0 * ghost - 3.0 * v[0] + 6.0 * v[1] - v[2]) / (6.0 * h);
        assert!(slope.abs() < 1e-12);
        assert_eq!(v[0], 0.0);
        let n = v.len();
        let curv_tip = (f.tip_ghost() - 2.0 * v[n - 1] + v[n - 2]) / (h * h);
        assert!(curv_tip.abs() < 1e-9);
        assert_eq!(*f.d2_profile(&g).last().unwrap(), curv_tip);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = BeamGrid::new(2.0, 9).unwrap();
        let vals: Vec<f64> = g.node_x().iter().map(|x| 3.0 * x).collect();
        assert_relative_eq!(g.integrate(&vals), 6.0, epsilon = 1e-14);
    }
}

//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use flexgrasp::beam::{BeamField, BeamGrid};
use flexgrasp::scenario::ScenarioConfig;
use nalgebra::DMatrix;

/// One of the configs shipped in the repository's `configs/` directory.
pub fn shipped_config(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `sin(kx) - kx - k^5 x^5 / 120 + c6 x^6 + c7 x^7` on `[0, 1]`, with the
/// last two coefficients fixed so that `f''(1) = f''''(1) = 0`. Every
/// derivative from zeroth to fifth vanishes at the root except the third.
pub struct Smooth {
    pub k: f64,
    pub c6: f64,
    pub c7: f64,
}

impl Smooth {
    pub fn new(k: f64) -> Self {
        // 30 c6 + 42 c7 = k^2 sin k + k^5/6
        // 360 c6 + 840 c7 = k^5 - k^4 sin k
        let (r1, r2) = (
            k * k * k.sin() + k.powi(5) / 6.0,
            k.powi(5) - k.powi(4) * k.sin(),
        );
        let det = 30.0 * 840.0 - 42.0 * 360.0;
        Self {
            k,
            c6: (r1 * 840.0 - 42.0 * r2) / det,
            c7: (30.0 * r2 - 360.0 * r1) / det,
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        let k = self.k;
        (k * x).sin() - k * x - k.powi(5) * x.powi(5) / 120.0
            + self.c6 * x.powi(6)
            + self.c7 * x.powi(7)
    }

    pub fn d2(&self, x: f64) -> f64 {
        let k = self.k;
        -k * k * (k * x).sin() - k.powi(5) * x.powi(3) / 6.0
            + 30.0 * self.c6 * x.powi(4)
            + 42.0 * self.c7 * x.powi(5)
    }

    pub fn d4(&self, x: f64) -> f64 {
        let k = self.k;
        k.powi(4) * (k * x).sin() - k.powi(5) * x
            + 360.0 * self.c6 * x * x
            + 840.0 * self.c7 * x.powi(3)
    }
}

/// Lowest natural frequency of a clamped-free beam built from the module's
/// stencils: interior rows from the fourth difference, and a tip row that
/// balances a half-cell of mass against the tip shear.
pub fn clamped_free_fundamental(ei: f64, rho: f64, l: f64, n: usize) -> f64 {
    let grid = BeamGrid::new(l, n).unwrap();
    let dofs = grid.n_nodes() - 1;
    let mut a = DMatrix::<f64>::zeros(dofs, dofs);
    for j in 0..dofs {
        let mut v = vec![0.0; grid.n_nodes()];
        v[j + 1] = 1.0;
        let field = BeamField::from_values(v);
        for (i, d4) in field.d4_interior(&grid).iter().enumerate() {
            a[(i, j)] = -ei / rho * d4;
        }
        a[(dofs - 1, j)] = ei * field.d3_at_tip(&grid) / (0.5 * rho * grid.dx());
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| (-z.re).sqrt())
        .fold(f64::INFINITY, f64::min)
}

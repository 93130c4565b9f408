//! Gaussian radial-basis-function approximator with sigma-modified weights.
//!
//! Inputs are first divided component-wise by `input_scale` so that signals
//! of very different magnitude (positions, shears, shear rates) share one
//! isotropic width per neuron.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RbfNetwork {
    dim: usize,
    /// Row-major `n_neurons x dim`, in scaled input coordinates.
    centers: Vec<f64>,
    widths: Vec<f64>,
    input_scale: Vec<f64>,
    /// Current weight estimate, one per neuron.
    pub weights: Vec<f64>,
}

impl RbfNetwork {
    pub fn new(centers: Vec<Vec<f64>>, widths: Vec<f64>, input_scale: Vec<f64>) -> Result<Self> {
        let dim = input_scale.len();
        if centers.len() != widths.len() || centers.is_empty() {
            return Err(Error::InvalidParameter {
                field: "rbf.widths".into(),
                reason: "need one width per center and at least one center".into(),
            });
        }
        if let Some(bad) = centers.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        if widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter {
                field: "rbf.widths".into(),
                reason: "widths must be finite and > 0".into(),
            });
        }
        if input_scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter {
                field: "rbf.input_scale".into(),
                reason: "scales must be finite and > 0".into(),
            });
        }
        if centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "rbf.centers".into(),
                reason: "centers must be finite".into(),
            });
        }
        let n = centers.len();
        Ok(Self {
            dim,
            centers: centers.into_iter().flatten().collect(),
            widths,
            input_scale,
            weights: vec![0.0; n],
        })
    }

    /// Centers on a seeded Latin lattice inside `[-1, 1]^dim` (scaled
    /// coordinates): each axis gets `n_neurons` evenly spaced levels, shuffled
    /// independently. Every width is twice the mean nearest-center distance.
    pub fn latin_lattice(n_neurons: usize, input_scale: Vec<f64>, seed: u64) -> Result<Self> {
        let dim = input_scale.len();
        if n_neurons == 0 || dim == 0 {
            return Err(Error::InvalidParameter {
                field: "rbf.neurons".into(),
                reason: "need at least one neuron and one input".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels: Vec<f64> = if n_neurons == 1 {
            vec![0.0]
        } else {
            (0..n_neurons)
                .map(|k| -1.0 + 2.0 * k as f64 / (n_neurons - 1) as f64)
                .collect()
        };
        let mut columns = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut col = levels.clone();
            col.shuffle(&mut rng);
            columns.push(col);
        }
        let centers: Vec<Vec<f64>> = (0..n_neurons)
            .map(|j| columns.iter().map(|col| col[j]).collect())
            .collect();
        let width = 2.0 * mean_nearest_distance(&centers).max(1e-3);
        Self::new(centers, vec![width; n_neurons], input_scale)
    }

    /// Regular product lattice over `[-1, 1]^dim` with `levels[k]` points on
    /// axis `k`; widths are `width_factor` times the mean nearest-center distance.
    pub fn product_lattice(
        levels: &[usize],
        width_factor: f64,
        input_scale: Vec<f64>,
    ) -> Result<Self> {
        if levels.len() != input_scale.len() || levels.contains(&0) {
            return Err(Error::InvalidParameter {
                field: "rbf.levels".into(),
                reason: "one positive level count per input".into(),
            });
        }
        let axis = |n: usize, k: usize| {
            if n == 1 {
                0.0
            } else {
                -1.0 + 2.0 * k as f64 / (n - 1) as f64
            }
        };
        let mut centers: Vec<Vec<f64>> = vec![Vec::new()];
        for &n in levels {
            centers = centers
                .into_iter()
                .flat_map(|prefix| {
                    (0..n).map(move |k| {
                        let mut c = prefix.clone();
                        c.push(axis(n, k));
                        c
                    })
                })
                .collect();
        }
        let width = width_factor * mean_nearest_distance(&centers);
        let n = centers.len();
        Self::new(centers, vec![width; n], input_scale)
    }

    /// Evenly spaced 1-D centers on `[lo, hi]` sharing one absolute width.
    pub fn uniform_1d(n_neurons: usize, lo: f64, hi: f64, width: f64) -> Result<Self> {
        let spacing = if n_neurons > 1 {
            (hi - lo) / (n_neurons - 1) as f64
        } else {
            0.0
        };
        let centers = (0..n_neurons)
            .map(|k| vec![lo + spacing * k as f64])
            .collect();
        Self::new(centers, vec![width; n_neurons], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_neurons(&self) -> usize {
        self.widths.len()
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn width(&self, j: usize) -> f64 {
        self.widths[j]
    }

    pub fn input_scale(&self) -> &[f64] {
        &self.input_scale
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Neuron activations `exp(-|x - c_j|^2 / (2 width_j^2))`.
    pub fn basis(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: input.len(),
            });
        }
        let scaled: Vec<f64> = input
            .iter()
            .zip(&self.input_scale)
            .map(|(x, s)| x / s)
            .collect();
        Ok(self
            .centers
            .chunks_exact(self.dim)
            .zip(&self.widths)
            .map(|(c, w)| {
                let d2: f64 = c.iter().zip(&scaled).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * w * w)).exp()
            })
            .collect())
    }

    pub fn evaluate(&self, input: &[f64]) -> Result<f64> {
        let phi = self.basis(input)?;
        Ok(dot(&self.weights, &phi))
    }

    /// Weight rate `a s phi - a sigma W`.
    pub fn weight_rate(&self, s: f64, a_gain: f64, sigma: f64, basis: &[f64]) -> Vec<f64> {
        weight_rate(&self.weights, s, a_gain, sigma, basis)
    }
}

/// Sigma-modified gradient law for a weight vector.
pub fn weight_rate(weights: &[f64], s: f64, a_gain: f64, sigma: f64, basis: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(basis)
        .map(|(w, phi)| a_gain * s * phi - a_gain * sigma * w)
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean_nearest_distance(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return 1.0;
    }
    let total: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| {
                    p.iter()
                        .zip(q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::rk4_step;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    /// Offline least-squares fit of `target` at `samples`, used as an
    /// independent approximation oracle. Returns the max error on `checks`.
    fn ls_fit_max_error(
        net: &RbfNetwork,
        samples: &[Vec<f64>],
        checks: &[Vec<f64>],
        target: impl Fn(&[f64]) -> f64,
    ) -> f64 {
        let n = net.n_neurons();
        let a = DMatrix::from_fn(samples.len(), n, |r, c| net.basis(&samples[r]).unwrap()[c]);
        let b = DVector::from_iterator(samples.len(), samples.iter().map(|x| target(x)));
        let svd = a.svd(true, true);
        let w = svd.solve(&b, 1e-12).unwrap();
        let mut fitted = net.clone();
        fitted.weights = w.iter().copied().collect();
        checks
            .iter()
            .map(|x| (fitted.evaluate(x).unwrap() - target(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn basis_values() {
        let net = RbfNetwork::new(vec![vec![0.5, -1.0]], vec![0.3], vec![1.0, 1.0]).unwrap();
        assert_eq!(net.basis(&[0.5, -1.0]).unwrap(), vec![1.0]);
        let r = 0.3 * (2.0 * 2f64.ln()).sqrt();
        assert_relative_eq!(
            net.basis(&[0.5 + r, -1.0]).unwrap()[0],
            0.5,
            epsilon = 1e-14
        );
        assert!(net.basis(&[100.0, 100.0]).unwrap()[0] < 1e-300);
        assert!(matches!(
            net.basis(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn evaluate_inner_product() {
        let mut net = RbfNetwork::latin_lattice(8, vec![1.0; 3], 7).unwrap();
        assert_eq!(net.evaluate(&[0.3, -0.2, 0.9]).unwrap(), 0.0);
        let mut one = RbfNetwork::new(vec![vec![1.0]], vec![1.0], vec![1.0]).unwrap();
        one.weights[0] = 2.0;
        assert_eq!(one.evaluate(&[1.0]).unwrap(), 2.0);
        net.weights = vec![1.0; 8];
        let phi = net.basis(&[0.1, 0.1, 0.1]).unwrap();
        assert_relative_eq!(
            net.evaluate(&[0.1, 0.1, 0.1]).unwrap(),
            phi.iter().sum::<f64>(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn lattice_is_seeded() {
        let a = RbfNetwork::latin_lattice(32, vec![1.0; 7], 42).unwrap();
        let b = RbfNetwork::latin_lattice(32, vec![1.0; 7], 42).unwrap();
        let c = RbfNetwork::latin_lattice(32, vec![1.0; 7], 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.width(0) > 0.0);
        for j in 0..32 {
            assert!(a.center(j).iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn rate_structure() {
        let w = vec![0.0; 4];
        assert_eq!(weight_rate(&w, 0.0, 3.0, 0.5, &[0.2; 4]), vec![0.0; 4]);
        let one_hot = [0.0, 0.0, 1.0, 0.0];
        assert_eq!(
            weight_rate(&w, 1.0, 3.0, 0.0, &one_hot),
            vec![0.0, 0.0, 3.0, 0.0]
        );
    }

    #[test]
    fn sigma_decay_matches_closed_form() {
        let (a, sigma, dt) = (4.0, 0.5, 1e-3);
        let w0 = vec![1.0, -2.0, 0.5];
        let phi = [0.3, 0.1, 0.7];
        let mut w = w0.clone();
        for _ in 0..1000 {
            w = rk4_step(&w, dt, |v| weight_rate(v, 0.0, a, sigma, &phi));
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let expected = norm(&w0) * (-a * sigma * 1.0f64).exp();
        assert_relative_eq!(norm(&w), expected, max_relative = 1e-9);
    }

    #[test]
    fn sin_fit_improves_with_neurons() {
        let samples: Vec<Vec<f64>> = (0..=400).map(|k| vec![-1.0 + k as f64 / 200.0]).collect();
        let checks: Vec<Vec<f64>> = (0..=997)
            .map(|k| vec![-1.0 + k as f64 * 2.0 / 997.0])
            .collect();
        let errs: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&n| {
                let net = RbfNetwork::uniform_1d(n, -1.0, 1.0, 0.3).unwrap();
                ls_fit_max_error(&net, &samples, &checks, |x| x[0].sin())
            })
            .collect();
        for pair in errs.windows(2) {
            assert!(pair[1] < pair[0], "{errs:?}");
        }
        assert!(errs[3] < 1e-5, "{errs:?}");
    }

    #[test]
    fn lattice_fit_within_five_percent() {
        // smooth bounded target on [-1, 1]^2, range 2
        let target = |x: &[f64]| (1.5 * x[0]).sin() * (x[1]).cos() + 0.3 * x[1];
        let net = RbfNetwork::product_lattice(&[8, 4], 2.0, vec![1.0, 1.0]).unwrap();
        assert_eq!(net.n_neurons(), 32);
        let grid = |n: usize| -> Vec<Vec<f64>> {
            let mut pts = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let a = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                    let b = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                    pts.push(vec![a, b]);
                }
            }
            pts
        };
        let samples = grid(41);
        let values: Vec<f64> = samples.iter().map(|x| target(x)).collect();
        let range = values.iter().cloned().fold(f64::MIN, f64::max)
            - values.iter().cloned().fold(f64::MAX, f64::min);
        let err = ls_fit_max_error(&net, &samples, &grid(37), target);
        assert!(err < 0.05 * range, "max error {err}, range {range}");
    }

    proptest! {
        #[test]
        fn basis_bounded(x in prop::collection::vec(-1e3f64..1e3, 3)) {
            let net = RbfNetwork::latin_lattice(16, vec![2.0, 0.5, 10.0], 9).unwrap();
            for phi in net.basis(&x).unwrap() {
                prop_assert!((0.0..=1.0).contains(&phi));
            }
        }

        #[test]
        fn sigma_modification_keeps_weights_bounded(
            seed in 0u64..1000,
            s_max in 0.1f64..5.0,
        ) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = RbfNetwork::latin_lattice(8, vec![1.0; 2], seed).unwrap();
            let (a, sigma, dt) = (5.0, 0.8, 1e-3);
            let mut w = vec![0.0; 8];
            let bound = s_max * (8f64).sqrt() / sigma;
            for _ in 0..5000 {
                let s = rng.gen_range(-s_max..=s_max);
                let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
                let phi = net.basis(&x).unwrap();
                w = rk4_step(&w, dt, |v| weight_rate(v, s, a, sigma, &phi));
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(norm <= bound + 1e-9);
            }
        }
    }
}

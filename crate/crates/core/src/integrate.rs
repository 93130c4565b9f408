//! Fixed-step classical Runge-Kutta.

/// A state that can be advanced along a rate of the same shape.
pub trait OdeState: Clone {
    /// `self += k * rate`
    fn add_scaled(&mut self, rate: &Self, k: f64);
}

/// One classical 4-stage Runge-Kutta step of size `dt` for `x' = f(x)`.
pub fn rk4_step<S: OdeState>(state: &S, dt: f64, mut f: impl FnMut(&S) -> S) -> S {
    let k1 = f(state);
    let mut probe = state.clone();
    probe.add_scaled(&k1, 0.5 * dt);
    let k2 = f(&probe);
    let mut probe = state.clone();
    probe.add_scaled(&k2, 0.5 * dt);
    let k3 = f(&probe);
    let mut probe = state.clone();
    probe.add_scaled(&k3, dt);
    let k4 = f(&probe);

    let mut next = state.clone();
    next.add_scaled(&k1, dt / 6.0);
    next.add_scaled(&k2, dt / 3.0);
    next.add_scaled(&k3, dt / 3.0);
    next.add_scaled(&k4, dt / 6.0);
    next
}

impl OdeState for f64 {
    fn add_scaled(&mut self, rate: &Self, k: f64) {
        *self += k * rate;
    }
}

impl OdeState for Vec<f64> {
    fn add_scaled(&mut self, rate: &Self, k: f64) {
        for (a, b) in self.iter_mut().zip(rate) {
            *a += k * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let err = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let mut x = 1.0_f64;
            for _ in 0..n {
                x = rk4_step(&x, dt, |v| -2.0 * v);
            }
            (x - (-2.0_f64).exp()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let mut s = vec![1.0, 0.0];
        for _ in 0..1000 {
            s = rk4_step(&s, 0.01, |v| vec![v[1], -v[0]]);
        }
        let e = 0.5 * (s[0] * s[0] + s[1] * s[1]);
        assert!((e - 0.5).abs() < 1e-8);
    }
}

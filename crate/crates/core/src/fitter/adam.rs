//! Adam update rule with bias correction, operating on flat parameter
//! vectors. Deterministic: no randomness, fixed iteration order.

/// First/second-moment state of the Adam optimizer.
#[derive(Debug, Clone)]
pub struct Adam {
    step_size: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    /// Standard coefficients: `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`.
    pub fn new(dim: usize, step_size: f64) -> Self {
        Self {
            step_size,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// Consume one gradient and return the parameter delta to apply
    /// (already negated, i.e. `x <- x + delta`).
    pub fn update(&mut self, grad: &[f64]) -> Vec<f64> {
        assert_eq!(grad.len(), self.m.len(), "gradient dimension changed");
        self.t += 1;
        let bias1 = 1.0 - self.beta1.powi(self.t as i32);
        let bias2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut delta = vec![0.0; grad.len()];
        for i in 0..grad.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            delta[i] = -self.step_size * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_step_size() {
        // With bias correction the very first update is -lr * sign(g).
        let mut adam = Adam::new(3, 0.01);
        let delta = adam.update(&[2.0, -5.0, 0.0]);
        assert!((delta[0] + 0.01).abs() < 1e-9);
        assert!((delta[1] - 0.01).abs() < 1e-9);
        assert_eq!(delta[2], 0.0);
    }

    #[test]
    fn converges_on_quadratic() {
        let mut x = [5.0f64, -3.0];
        let mut adam = Adam::new(2, 0.1);
        for _ in 0..2000 {
            let grad = [2.0 * x[0], 2.0 * x[1]];
            let d = adam.update(&grad);
            x[0] += d[0];
            x[1] += d[1];
        }
        assert!(x[0].abs() < 1e-3 && x[1].abs() < 1e-3, "{x:?}");
    }
}

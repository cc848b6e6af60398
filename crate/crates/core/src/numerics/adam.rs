use super::mlp::Real;
use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 4e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam moments for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        AdamState {
            config,
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[T] {
        &self.m
    }

    pub fn second_moment(&self) -> &[T] {
        &self.v
    }

    /// One descent step: `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<(), NumericsError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.m.len(),
                got: if params.len() != self.m.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        self.t += 1;
        let c = self.config;
        let cast = |v: f64| T::from_f64(v).unwrap();
        let (b1, b2) = (cast(c.beta1), cast(c.beta2));
        let (one_m_b1, one_m_b2) = (cast(1.0 - c.beta1), cast(1.0 - c.beta2));
        let bc1 = cast(1.0 - c.beta1.powi(self.t as i32));
        let bc2 = cast(1.0 - c.beta2.powi(self.t as i32));
        let (lr, eps) = (cast(c.learning_rate), cast(c.epsilon));
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + one_m_b1 * g;
            self.v[i] = b2 * self.v[i] + one_m_b2 * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_magnitude() {
        let mut adam = AdamState::<f64>::new(1, AdamConfig::default());
        let mut theta = [0.0];
        adam.step(&mut theta, &[1.0]).unwrap();
        assert!((theta[0] + 4e-4 / (1.0 + 1e-8)).abs() < 1e-18);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = AdamState::<f32>::new(3, AdamConfig::default());
        let mut theta = [1.0f32, -2.0, 0.5];
        for _ in 0..10 {
            adam.step(&mut theta, &[0.0; 3]).unwrap();
        }
        assert_eq!(theta, [1.0, -2.0, 0.5]);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut adam = AdamState::<f64>::new(1, AdamConfig::default());
        let mut theta = [1.0];
        let mut reached = None;
        for step in 1..=5_000 {
            let g = [2.0 * theta[0]];
            adam.step(&mut theta, &g).unwrap();
            if reached.is_none() && theta[0].abs() < 0.01 {
                reached = Some(step);
            }
        }
        assert!(reached.is_some(), "theta = {}", theta[0]);
        assert!(adam.second_moment().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn shape_mismatch() {
        let mut adam = AdamState::<f64>::new(2, AdamConfig::default());
        assert!(adam.step(&mut [0.0; 3], &[0.0; 3]).is_err());
        assert!(adam.step(&mut [0.0; 2], &[0.0; 1]).is_err());
    }
}

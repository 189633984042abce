use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn update(&mut self, cfg: &AdamConfig, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                expected: self.m.len(),
                got: if params.len() != self.m.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - libm::pow(cfg.beta1, t);
        let c2 = 1.0 - libm::pow(cfg.beta2, t);
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.lr * m_hat / (libm::sqrt(v_hat) + cfg.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_fixed_and_decays_moments() {
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(3);
        let mut params = [1.0, -2.0, 0.5];
        state.update(&cfg, &mut params, &[1.0, 1.0, 1.0]).unwrap();
        let after_first = params;
        let m_before = state.m.clone();
        state.update(&cfg, &mut params, &[0.0; 3]).unwrap();
        // m decays by beta1, so m_hat shrinks but is nonzero: the fixed point
        // only holds from fresh moments.
        for (m, m0) in state.m.iter().zip(&m_before) {
            assert!((m - 0.9 * m0).abs() < 1e-15);
        }
        let mut fresh = AdamState::new(3);
        let mut p2 = after_first;
        fresh.update(&cfg, &mut p2, &[0.0; 3]).unwrap();
        assert_eq!(p2, after_first);
        assert_eq!(fresh.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(1);
        let mut p = [0.0];
        state.update(&cfg, &mut p, &[1.0]).unwrap();
        assert!((p[0] + 0.001).abs() < 1e-10);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut state = AdamState::new(2);
        let mut p = [0.0; 3];
        assert!(state
            .update(&AdamConfig::default(), &mut p, &[0.0; 3])
            .is_err());
    }
}

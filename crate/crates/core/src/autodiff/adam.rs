use serde::{Deserialize, Serialize};

use super::{Gradients, ParamStore, Tensor};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(store: &ParamStore<T>, config: AdamConfig) -> Self {
        let zeros = || {
            store
                .iter()
                .map(|p| Tensor::zeros(p.tensor.shape()))
                .collect()
        };
        Adam {
            config,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn update(&mut self, store: &mut ParamStore<T>, grads: &Gradients<T>) {
        assert_eq!(
            store.len(),
            grads.len(),
            "gradient/parameter count mismatch"
        );
        assert_eq!(
            store.len(),
            self.m.len(),
            "optimizer built for another store"
        );
        self.step += 1;
        let c = &self.config;
        let (b1, b2) = (T::of(c.beta1), T::of(c.beta2));
        let lr = T::of(c.learning_rate);
        let eps = T::of(c.epsilon);
        let t = self.step as i32;
        let corr1 = T::one() - b1.powi(t);
        let corr2 = T::one() - b2.powi(t);

        for (((id, g), m), v) in store
            .ids()
            .collect::<Vec<_>>()
            .into_iter()
            .zip(grads.iter())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            let p = store.get_mut(id);
            assert_eq!(p.shape(), m.shape(), "moment shape mismatch");
            for (((w, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut().iter_mut())
                .zip(v.data_mut().iter_mut())
            {
                *mi = b1 * *mi + (T::one() - b1) * gi;
                *vi = b2 * *vi + (T::one() - b2) * gi * gi;
                let m_hat = *mi / corr1;
                let v_hat = *vi / corr2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_param(vals: Vec<f64>) -> ParamStore<f64> {
        let mut s = ParamStore::new();
        s.add("p", Tensor::vector(vals));
        s
    }

    fn grads_of(store: &ParamStore<f64>, vals: Vec<f64>) -> Gradients<f64> {
        let mut g = Gradients::zeros_like(store);
        g.get_mut(super::super::ParamId(0))
            .data_mut()
            .copy_from_slice(&vals);
        g
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut s = one_param(vec![0.3, -1.2]);
        let mut adam = Adam::new(&s, AdamConfig::default());
        let g = grads_of(&s, vec![0.0, 0.0]);
        adam.update(&mut s, &g);
        adam.update(&mut s, &g);
        assert_eq!(s.iter().next().unwrap().tensor.data(), &[0.3, -1.2]);
        assert_eq!(adam.step_count(), 2);
    }

    #[test]
    fn first_step_moves_by_learning_rate_times_sign() {
        let mut s = one_param(vec![1.0, 1.0]);
        let mut adam = Adam::new(&s, AdamConfig::default());
        let g = grads_of(&s, vec![2.5, -0.04]);
        adam.update(&mut s, &g);
        let p = s.iter().next().unwrap().tensor.data().to_vec();
        // m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps)
        assert!((p[0] - (1.0 - 0.001 * 2.5 / (2.5 + 1e-8))).abs() < 1e-15);
        assert!((p[1] - (1.0 + 0.001 * 0.04 / (0.04 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn two_steps_match_scripted_trace() {
        // Reference trace written out step by step for g = 0.5 twice, w0 = 0.2.
        let (lr, b1, b2, eps) = (0.001f64, 0.9f64, 0.999f64, 1e-8f64);
        let g = 0.5;
        let mut w = 0.2;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            w -= lr * mh / (vh.sqrt() + eps);
        }

        let mut s = one_param(vec![0.2]);
        let mut adam = Adam::new(&s, AdamConfig::default());
        let gr = grads_of(&s, vec![g]);
        adam.update(&mut s, &gr);
        adam.update(&mut s, &gr);
        let got = s.iter().next().unwrap().tensor.data()[0];
        assert!((got - w).abs() < 1e-16, "{got} vs {w}");
        assert!((got - (0.2 - 0.002)).abs() < 1e-9);
    }
}

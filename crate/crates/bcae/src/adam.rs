//! Adam optimizer with bias-corrected moment estimates.

use crate::error::{Error, Result};
use crate::nn::{DenseNet, NetGrads};

/// Per-parameter first/second moment accumulators for one layer.
#[derive(Debug, Clone, PartialEq)]
struct LayerMoments {
    m_weights: Vec<f64>,
    v_weights: Vec<f64>,
    m_bias: Vec<f64>,
    v_bias: Vec<f64>,
}

/// Optimizer state mirroring a specific net's parameter shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    moments: Vec<LayerMoments>,
}

impl AdamState {
    /// State for `net` with the standard defaults beta1 = 0.9,
    /// beta2 = 0.999, epsilon = 1e-8.
    pub fn new(net: &DenseNet, lr: f64) -> Self {
        let moments = net
            .layers()
            .iter()
            .map(|l| LayerMoments {
                m_weights: vec![0.0; l.weights().len()],
                v_weights: vec![0.0; l.weights().len()],
                m_bias: vec![0.0; l.bias().len()],
                v_bias: vec![0.0; l.bias().len()],
            })
            .collect();
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            moments,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update:
    ///
    /// ```text
    /// m <- b1 m + (1-b1) g        m_hat = m / (1 - b1^t)
    /// v <- b2 v + (1-b2) g^2      v_hat = v / (1 - b2^t)
    /// w <- w - lr * m_hat / (sqrt(v_hat) + eps)
    /// ```
    ///
    /// Rejects non-finite gradients up front and verifies that the updated
    /// parameters stay finite, reporting the failing step index.
    pub fn step(&mut self, net: &mut DenseNet, grads: &NetGrads) -> Result<()> {
        if grads.layers.len() != self.moments.len() || net.layers().len() != self.moments.len() {
            return Err(Error::Config(
                "gradient/net shapes do not match this optimizer state".into(),
            ));
        }
        let step = self.step_count + 1;
        if !grads.all_finite() {
            return Err(Error::Training {
                step,
                reason: "non-finite gradient".into(),
            });
        }

        let bc1 = 1.0 - self.beta1.powi(step as i32);
        let bc2 = 1.0 - self.beta2.powi(step as i32);

        for (layer_idx, layer) in net.layers_mut().iter_mut().enumerate() {
            let g = &grads.layers[layer_idx];
            let mom = &mut self.moments[layer_idx];
            if g.weights.len() != mom.m_weights.len() || g.bias.len() != mom.m_bias.len() {
                return Err(Error::Config(format!(
                    "gradient shapes for layer {layer_idx} do not match optimizer state"
                )));
            }
            update_params(
                layer.weights_mut(),
                &g.weights,
                &mut mom.m_weights,
                &mut mom.v_weights,
                self.lr,
                self.beta1,
                self.beta2,
                self.epsilon,
                bc1,
                bc2,
            );
            update_params(
                layer.bias_mut(),
                &g.bias,
                &mut mom.m_bias,
                &mut mom.v_bias,
                self.lr,
                self.beta1,
                self.beta2,
                self.epsilon,
                bc1,
                bc2,
            );
            let finite = layer
                .weights()
                .iter()
                .chain(layer.bias().iter())
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::Training {
                    step,
                    reason: format!("non-finite parameter in layer {layer_idx} after update"),
                });
            }
        }
        self.step_count = step;
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn update_params(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, DenseLayer, LayerGrads};

    fn scalar_net(w: f64) -> DenseNet {
        let layer =
            DenseLayer::from_params(1, 1, Activation::Linear, vec![w], vec![0.0]).unwrap();
        DenseNet::from_layers(1, vec![layer]).unwrap()
    }

    fn unit_grads() -> NetGrads {
        NetGrads {
            layers: vec![LayerGrads {
                weights: vec![1.0],
                bias: vec![0.0],
            }],
        }
    }

    /// Hand-evaluated Adam recurrence for a scalar parameter, used as the
    /// independent oracle for the optimizer.
    fn hand_adam(w0: f64, grads: &[f64], lr: f64) -> f64 {
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let (mut w, mut m, mut v) = (w0, 0.0, 0.0);
        for (t, &g) in grads.iter().enumerate() {
            let t = (t + 1) as i32;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t));
            let v_hat = v / (1.0 - b2.powi(t));
            w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        w
    }

    #[test]
    fn first_step_matches_hand_evaluation() {
        let mut net = scalar_net(0.0);
        let mut state = AdamState::new(&net, 0.001);
        state.step(&mut net, &unit_grads()).unwrap();
        let w = net.layers()[0].weights()[0];
        assert!((w - (-0.001)).abs() < 1e-6);
        assert_eq!(w, hand_adam(0.0, &[1.0], 0.001));
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn two_steps_match_hand_recurrence() {
        let mut net = scalar_net(0.0);
        let mut state = AdamState::new(&net, 0.001);
        state.step(&mut net, &unit_grads()).unwrap();
        state.step(&mut net, &unit_grads()).unwrap();
        let w = net.layers()[0].weights()[0];
        assert_eq!(w, hand_adam(0.0, &[1.0, 1.0], 0.001));
        assert_eq!(state.step_count(), 2);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut net = scalar_net(0.7);
        let before = net.clone();
        let mut state = AdamState::new(&net, 0.001);
        let zero = NetGrads {
            layers: vec![LayerGrads {
                weights: vec![0.0],
                bias: vec![0.0],
            }],
        };
        for _ in 0..5 {
            state.step(&mut net, &zero).unwrap();
        }
        assert_eq!(net, before);
    }

    #[test]
    fn rejects_non_finite_gradient_with_step_index() {
        let mut net = scalar_net(0.0);
        let mut state = AdamState::new(&net, 0.001);
        state.step(&mut net, &unit_grads()).unwrap();
        let bad = NetGrads {
            layers: vec![LayerGrads {
                weights: vec![f64::NAN],
                bias: vec![0.0],
            }],
        };
        match state.step(&mut net, &bad) {
            Err(Error::Training { step, .. }) => assert_eq!(step, 2),
            other => panic!("expected training error, got {other:?}"),
        }
    }

    #[test]
    fn update_is_deterministic() {
        let run = || {
            let mut net = scalar_net(0.25);
            let mut state = AdamState::new(&net, 0.001);
            for _ in 0..10 {
                state.step(&mut net, &unit_grads()).unwrap();
            }
            net.layers()[0].weights()[0].to_bits()
        };
        assert_eq!(run(), run());
    }
}

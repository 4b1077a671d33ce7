use serde::{Deserialize, Serialize};

use super::{Gradients, NetworkParams, NnError};

/// Squared error over known labels only, divided by the number of known
/// labels (at least one). Returns the loss and its derivative with respect
/// to `pred`. Masked entries contribute exactly zero to both.
pub fn masked_mse(pred: &[f64], labels: &[f64], mask: &[f64]) -> Result<(f64, Vec<f64>), NnError> {
    if pred.len() != labels.len() || pred.len() != mask.len() {
        return Err(NnError::ShapeMismatch(format!(
            "prediction {}, labels {}, mask {}",
            pred.len(),
            labels.len(),
            mask.len()
        )));
    }
    let known: f64 = mask.iter().sum();
    let norm = known.max(1.0);
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(labels)
        .zip(mask)
        .map(|((&p, &l), &m)| {
            if m == 0.0 {
                return 0.0;
            }
            let e = m * (p - l);
            loss += e * e;
            2.0 * e / norm
        })
        .collect();
    Ok((loss / norm, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.0002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let ok = self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NnError::InvalidConfig(format!("bad optimizer settings {self:?}")))
        }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(params: &mut NetworkParams, grads: &Gradients, config: &AdamConfig) -> Result<(), NnError> {
    if grads.layers.len() != params.layers.len()
        || grads
            .layers
            .iter()
            .zip(&params.layers)
            .any(|(g, p)| g.weights.len() != p.weights.len() || g.bias.len() != p.bias.len())
    {
        return Err(NnError::ShapeMismatch("gradients do not match parameters".into()));
    }
    params.step += 1;
    let t = params.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for l in 0..params.layers.len() {
        let g = grads.layers[l].values();
        let p = params.layers[l].values_mut();
        let m = params.first_moment[l].values_mut();
        let v = params.second_moment[l].values_mut();
        for (((g, p), m), v) in g.zip(p).zip(m).zip(v) {
            *m = config.beta1 * *m + (1.0 - config.beta1) * g;
            *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
            let mh = *m / c1;
            let vh = *v / c2;
            *p -= config.learning_rate * mh / (vh.sqrt() + config.epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Layer, NetworkSpec, Shape};

    #[test]
    fn masked_loss_example() {
        let (loss, grad) = masked_mse(&[0.5, 0.2], &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((loss - 0.25).abs() < 1e-15);
        assert_eq!(grad, vec![-1.0, 0.0]);
    }

    #[test]
    fn fully_masked_is_zero() {
        let (loss, grad) = masked_mse(&[0.9, 0.1, 0.4], &[0.0, 1.0, 1.0], &[0.0; 3]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|g| g.to_bits() == 0));
    }

    #[test]
    fn masked_entries_ignore_label_value() {
        let a = masked_mse(&[0.3, 0.7], &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        let b = masked_mse(&[0.3, 0.7], &[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn first_adam_step_moves_by_learning_rate() {
        let spec = NetworkSpec::new(Shape::flat(1), vec![Layer::dense(1)]).unwrap();
        let mut params = NetworkParams::zeros(&spec).unwrap();
        params.layers[0].weights[0] = 0.0;
        let mut grads = Gradients::zeros_like(&params);
        grads.layers[0].weights[0] = 1.0;
        adam_step(&mut params, &grads, &AdamConfig::default()).unwrap();
        assert!((params.layers[0].weights[0] + 0.0002).abs() < 1e-9);
        assert_eq!(params.layers[0].bias[0], 0.0);
        assert_eq!(params.step, 1);
    }

    #[test]
    fn adam_rejects_mismatched_gradients() {
        let spec = NetworkSpec::mlp(Shape::flat(3), 2, 1).unwrap();
        let mut params = NetworkParams::zeros(&spec).unwrap();
        let other = NetworkSpec::mlp(Shape::flat(4), 2, 1).unwrap();
        let grads = Gradients::zeros_like(&NetworkParams::zeros(&other).unwrap());
        assert!(adam_step(&mut params, &grads, &AdamConfig::default()).is_err());
        assert!(AdamConfig { beta1: 1.0, ..AdamConfig::default() }.validate().is_err());
    }
}

use std::borrow::Borrow;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{adam_step, backward, forward, masked_mse, AdamConfig, Gradients, NetworkParams, NetworkSpec, NnError};
use crate::dataset::LabeledInstance;

/// Samples per forward/backward chunk. Fixed so that the summation order, and
/// therefore the result, does not depend on the thread count.
const CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub seed: u64,
    pub optimizer: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 15,
            steps_per_epoch: 1000,
            seed: 0,
            optimizer: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch_size must be at least 1".into()));
        }
        self.optimizer.validate()
    }
}

/// Called once per sampled instance with a per-sample seed.
pub type AugmentHook<'a> = &'a (dyn Fn(&LabeledInstance, u64) -> LabeledInstance + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    /// Mean minibatch loss of each epoch.
    pub loss_history: Vec<f64>,
}

fn to_f64(v: &[u8]) -> impl Iterator<Item = f64> + '_ {
    v.iter().map(|&b| b as f64)
}

/// Loss and summed gradients of one minibatch.
pub fn batch_gradients<T: Borrow<LabeledInstance> + Sync>(
    params: &NetworkParams,
    spec: &NetworkSpec,
    batch: &[T],
) -> Result<(f64, Gradients), NnError> {
    let outputs = spec.output_len()?;
    let passes = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let inputs: Vec<f64> = chunk
                .iter()
                .flat_map(|i| i.borrow().input.iter().map(|&v| v as f64))
                .collect();
            forward(params, spec, &inputs, chunk.len())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut pred = Vec::with_capacity(batch.len() * outputs);
    let mut labels = Vec::with_capacity(batch.len() * outputs);
    let mut mask = Vec::with_capacity(batch.len() * outputs);
    for p in &passes {
        pred.extend_from_slice(p.outputs());
    }
    for inst in batch {
        let inst = inst.borrow();
        if inst.labels.len() != outputs || inst.mask.len() != outputs {
            return Err(NnError::ShapeMismatch(format!(
                "instance has {} labels, network emits {outputs}",
                inst.labels.len()
            )));
        }
        labels.extend(to_f64(&inst.labels));
        mask.extend(to_f64(&inst.mask));
    }
    let (loss, signal) = masked_mse(&pred, &labels, &mask)?;
    let partial = passes
        .par_iter()
        .zip(signal.par_chunks(CHUNK * outputs))
        .map(|(pass, s)| backward(params, spec, pass, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grads = Gradients::zeros_like(params);
    for g in partial {
        for (acc, part) in grads.layers.iter_mut().zip(g.layers) {
            for (a, b) in acc.values_mut().zip(part.values()) {
                *a += b;
            }
        }
    }
    Ok((loss, grads))
}

/// Trains freshly initialized parameters (seeded from `config.seed`).
pub fn train<T: Borrow<LabeledInstance> + Sync>(
    train_set: &[T],
    spec: &NetworkSpec,
    config: &TrainConfig,
    augment_hook: Option<AugmentHook<'_>>,
) -> Result<TrainOutcome, NnError> {
    let params = NetworkParams::init(spec, config.seed)?;
    train_from(params, train_set, spec, config, augment_hook)
}

/// Continues training from `params`.
pub fn train_from<T: Borrow<LabeledInstance> + Sync>(
    mut params: NetworkParams,
    train_set: &[T],
    spec: &NetworkSpec,
    config: &TrainConfig,
    augment_hook: Option<AugmentHook<'_>>,
) -> Result<TrainOutcome, NnError> {
    config.validate()?;
    params.check_matches(spec)?;
    if train_set.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let input_len = spec.input.len();
    if let Some(bad) = train_set.iter().map(Borrow::borrow).find(|i: &&LabeledInstance| i.input.len() != input_len) {
        return Err(NnError::ShapeMismatch(format!(
            "instance input has {} values, network expects {input_len}",
            bad.input.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7a5e_5eed_0000_0001);
    let mut history = Vec::new();
    if config.steps_per_epoch == 0 {
        return Ok(TrainOutcome {
            params,
            loss_history: history,
        });
    }
    for _ in 0..config.epochs {
        let mut total = 0.0;
        for _ in 0..config.steps_per_epoch {
            let picks: Vec<(usize, u64)> = (0..config.batch_size)
                .map(|_| (rng.random_range(0..train_set.len()), rng.next_u64()))
                .collect();
            let (loss, grads) = match augment_hook {
                Some(hook) => {
                    let batch: Vec<LabeledInstance> = picks
                        .par_iter()
                        .map(|&(k, s)| hook(train_set[k].borrow(), s))
                        .collect();
                    batch_gradients(&params, spec, &batch)?
                }
                None => {
                    let batch: Vec<&LabeledInstance> = picks.iter().map(|&(k, _)| train_set[k].borrow()).collect();
                    batch_gradients(&params, spec, &batch)?
                }
            };
            adam_step(&mut params, &grads, &config.optimizer)?;
            total += loss;
        }
        history.push(total / config.steps_per_epoch as f64);
    }
    Ok(TrainOutcome {
        params,
        loss_history: history,
    })
}

/// Network outputs for every instance, `instances.len() * outputs` values.
pub fn predict<T: Borrow<LabeledInstance> + Sync>(
    params: &NetworkParams,
    spec: &NetworkSpec,
    instances: &[T],
) -> Result<Vec<f64>, NnError> {
    let chunks = instances
        .par_chunks(64)
        .map(|chunk| {
            let inputs: Vec<f64> = chunk
                .iter()
                .flat_map(|i| i.borrow().input.iter().map(|&v| v as f64))
                .collect();
            forward(params, spec, &inputs, chunk.len()).map(|p| p.outputs().to_vec())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(chunks.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::InstanceSource;
    use crate::nn::{Layer, Shape};

    /// Labels: cell 0 above 0.5, and cell 1 above 0.3 (second label masked
    /// out half of the time).
    fn toy(n: usize, seed: u64) -> Vec<LabeledInstance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let input: Vec<f32> = (0..4).map(|_| rng.random::<f32>()).collect();
                LabeledInstance {
                    labels: vec![(input[0] > 0.5) as u8, (input[1] > 0.3) as u8],
                    mask: vec![1, (k % 2) as u8],
                    input,
                    source: InstanceSource { scenario: 0, t: k as f64 },
                }
            })
            .collect()
    }

    fn toy_spec() -> NetworkSpec {
        NetworkSpec::with_outputs(
            Shape::flat(4),
            vec![Layer::dense(8), Layer::Relu, Layer::dense(2), Layer::Sigmoid],
            2,
        )
        .unwrap()
    }

    #[test]
    fn loss_decreases_on_separable_toy() {
        let data = toy(500, 1);
        let config = TrainConfig {
            epochs: 5,
            steps_per_epoch: 200,
            batch_size: 32,
            optimizer: AdamConfig {
                learning_rate: 0.01,
                ..AdamConfig::default()
            },
            seed: 4,
        };
        let out = train(&data, &toy_spec(), &config, None).unwrap();
        assert_eq!(out.loss_history.len(), 5);
        for w in out.loss_history.windows(2) {
            assert!(w[1] < w[0], "{:?}", out.loss_history);
        }
        assert_eq!(out.params.step, 1000);
    }

    #[test]
    fn zero_steps_leave_params_alone() {
        let data = toy(10, 2);
        let config = TrainConfig {
            steps_per_epoch: 0,
            ..TrainConfig::default()
        };
        let out = train(&data, &toy_spec(), &config, None).unwrap();
        assert_eq!(out.params, NetworkParams::init(&toy_spec(), 0).unwrap());
        assert!(out.loss_history.is_empty());
    }

    #[test]
    fn empty_dataset_rejected() {
        let data: Vec<LabeledInstance> = Vec::new();
        assert!(matches!(
            train(&data, &toy_spec(), &TrainConfig::default(), None),
            Err(NnError::EmptyDataset)
        ));
    }

    #[test]
    fn same_seed_same_params() {
        let data = toy(100, 3);
        let config = TrainConfig {
            epochs: 2,
            steps_per_epoch: 20,
            batch_size: 19,
            ..TrainConfig::default()
        };
        let a = train(&data, &toy_spec(), &config, None).unwrap();
        let b = train(&data, &toy_spec(), &config, None).unwrap();
        assert_eq!(a, b);
        let c = train(&data, &toy_spec(), &TrainConfig { seed: 1, ..config }, None).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn hook_sees_every_sample() {
        let data = toy(20, 5);
        let config = TrainConfig {
            epochs: 1,
            steps_per_epoch: 3,
            batch_size: 7,
            ..TrainConfig::default()
        };
        let count = std::sync::atomic::AtomicUsize::new(0);
        let hook = |i: &LabeledInstance, _seed: u64| {
            count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            i.clone()
        };
        let with = train(&data, &toy_spec(), &config, Some(&hook)).unwrap();
        assert_eq!(count.into_inner(), 21);
        assert_eq!(with, train(&data, &toy_spec(), &config, None).unwrap());
    }

    #[test]
    fn predictions_are_probabilities() {
        let data = toy(70, 6);
        let params = NetworkParams::init(&toy_spec(), 9).unwrap();
        let out = predict(&params, &toy_spec(), &data).unwrap();
        assert_eq!(out.len(), 140);
        assert!(out.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}

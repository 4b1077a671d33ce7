//! Stochastic input augmentation with label-consistent horizontal flips.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DatasetError, LabeledInstance};
use crate::sim::CameraLayout;

/// Cell grid of the input plus the left/right pairing of short-range sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentLayout {
    pub camera: CameraLayout,
    pub sensors: usize,
    pub sensor_pairs: Vec<(usize, usize)>,
}

impl AugmentLayout {
    /// Five proximity sensors ordered right to left (or left to right).
    pub fn five_sensors(camera: CameraLayout) -> Self {
        Self {
            camera,
            sensors: 5,
            sensor_pairs: vec![(0, 4), (1, 3)],
        }
    }

    fn permutation(&self) -> Result<Vec<usize>, DatasetError> {
        let mut perm: Vec<usize> = (0..self.sensors).collect();
        let mut seen = vec![false; self.sensors];
        for &(a, b) in &self.sensor_pairs {
            if a >= self.sensors || b >= self.sensors || a == b || seen[a] || seen[b] {
                return Err(DatasetError::LayoutMismatch(format!(
                    "invalid sensor pair ({a}, {b}) for {} sensors",
                    self.sensors
                )));
            }
            seen[a] = true;
            seen[b] = true;
            perm[a] = b;
            perm[b] = a;
        }
        Ok(perm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentConfig {
    pub flip: bool,
    pub noise: bool,
    pub grayscale: bool,
    pub shadow: bool,
    pub flip_probability: f64,
    pub noise_probability: f64,
    pub noise_sigma: f64,
    pub grayscale_probability: f64,
    pub shadow_max_amplitude: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            flip: true,
            noise: true,
            grayscale: true,
            shadow: true,
            flip_probability: 0.5,
            noise_probability: 1.0 / 3.0,
            noise_sigma: 0.02,
            grayscale_probability: 1.0 / 3.0,
            shadow_max_amplitude: 0.2,
        }
    }
}

impl AugmentConfig {
    pub fn none() -> Self {
        Self {
            flip: false,
            noise: false,
            grayscale: false,
            shadow: false,
            ..Self::default()
        }
    }

    pub fn any(&self) -> bool {
        self.flip || self.noise || self.grayscale || self.shadow
    }
}

fn check(inst: &LabeledInstance, layout: &AugmentLayout) -> Result<Vec<usize>, DatasetError> {
    if inst.input.len() != layout.camera.len() {
        return Err(DatasetError::LayoutMismatch(format!(
            "input has {} cells, layout describes {}",
            inst.input.len(),
            layout.camera.len()
        )));
    }
    if layout.sensors == 0 || !inst.labels.len().is_multiple_of(layout.sensors) || inst.mask.len() != inst.labels.len() {
        return Err(DatasetError::LayoutMismatch(format!(
            "{} labels do not split into {} sensors",
            inst.labels.len(),
            layout.sensors
        )));
    }
    layout.permutation()
}

/// Mirrors every row of the input and swaps paired sensors at every target.
pub fn flip_horizontal(
    inst: &LabeledInstance,
    layout: &AugmentLayout,
) -> Result<LabeledInstance, DatasetError> {
    let perm = check(inst, layout)?;
    Ok(flipped(inst, layout, &perm))
}

fn flipped(inst: &LabeledInstance, layout: &AugmentLayout, perm: &[usize]) -> LabeledInstance {
    let cam = layout.camera;
    let mut input = inst.input.clone();
    for row in 0..cam.height {
        for col in 0..cam.width {
            for ch in 0..cam.channels {
                input[cam.index(row, col, ch)] = inst.input[cam.index(row, cam.width - 1 - col, ch)];
            }
        }
    }
    let m = layout.sensors;
    let mut labels = inst.labels.clone();
    let mut mask = inst.mask.clone();
    for j in 0..inst.labels.len() / m {
        for i in 0..m {
            labels[j * m + i] = inst.labels[j * m + perm[i]];
            mask[j * m + i] = inst.mask[j * m + perm[i]];
        }
    }
    LabeledInstance {
        input,
        labels,
        mask,
        source: inst.source,
    }
}

/// Applies the enabled transforms, each with its own probability:
/// flip, additive Gaussian noise, channel-average grayscale, then a linear
/// luminance ramp of random direction. Inputs are clamped to `[0, 1]`.
pub fn augment(
    inst: &LabeledInstance,
    layout: &AugmentLayout,
    config: &AugmentConfig,
    seed: u64,
) -> Result<LabeledInstance, DatasetError> {
    let perm = check(inst, layout)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cam = layout.camera;

    let do_flip = rng.random_bool(config.flip_probability.clamp(0.0, 1.0));
    let mut out = if config.flip && do_flip {
        flipped(inst, layout, &perm)
    } else {
        inst.clone()
    };

    let do_noise = rng.random_bool(config.noise_probability.clamp(0.0, 1.0));
    if config.noise && do_noise && config.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, config.noise_sigma).expect("positive sigma");
        for v in out.input.iter_mut() {
            *v = (*v as f64 + normal.sample(&mut rng)).clamp(0.0, 1.0) as f32;
        }
    }

    let do_gray = rng.random_bool(config.grayscale_probability.clamp(0.0, 1.0));
    if config.grayscale && do_gray && cam.channels > 1 {
        for cell in out.input.chunks_exact_mut(cam.channels) {
            let mean = cell.iter().map(|&v| v as f64).sum::<f64>() / cam.channels as f64;
            cell.fill(mean as f32);
        }
    }

    let amplitude = rng.random_range(0.0..=config.shadow_max_amplitude.max(0.0));
    let direction = rng.random_range(0.0..TAU);
    if config.shadow && amplitude > 0.0 {
        let (s, c) = direction.sin_cos();
        for row in 0..cam.height {
            let v = (row as f64 + 0.5) / cam.height as f64 - 0.5;
            for col in 0..cam.width {
                let u = (col as f64 + 0.5) / cam.width as f64 - 0.5;
                let ramp = amplitude * (u * c + v * s);
                for ch in 0..cam.channels {
                    let k = cam.index(row, col, ch);
                    out.input[k] = (out.input[k] as f64 + ramp).clamp(0.0, 1.0) as f32;
                }
            }
        }
    }
    Ok(out)
}

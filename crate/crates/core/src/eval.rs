//! Per-label ROC AUC with bootstrap intervals, CSV tables and PGM heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledInstance;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("both classes are needed")]
    SingleClass,
    #[error("bootstrap gave up after {0} single-class resamples")]
    RedrawCapExceeded(usize),
    #[error("nothing to evaluate: {0}")]
    Empty(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Mann-Whitney AUC with average ranks for ties. `None` when a class is
/// missing.
pub fn auc(scores: &[f64], truths: &[u8]) -> Result<Option<f64>, EvalError> {
    if scores.len() != truths.len() {
        return Err(EvalError::LengthMismatch(format!(
            "{} scores, {} truths",
            scores.len(),
            truths.len()
        )));
    }
    Ok(auc_indexed(scores, truths, &mut (0..scores.len()).collect::<Vec<_>>()))
}

/// AUC over `idx` (reordered in place).
fn auc_indexed(scores: &[f64], truths: &[u8], idx: &mut [usize]) -> Option<f64> {
    let pos = idx.iter().filter(|&&k| truths[k] != 0).count();
    let neg = idx.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    idx.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of positives, kept integral
    let mut rank2_sum: u128 = 0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        let p = idx[start..end].iter().filter(|&&k| truths[k] != 0).count() as u128;
        // ranks start+1 ..= end, average (start + 1 + end) / 2
        rank2_sum += p * (start as u128 + 1 + end as u128);
        start = end;
    }
    let (p, n) = (pos as u128, neg as u128);
    let u2 = rank2_sum - p * (p + 1);
    Some(u2 as f64 / (2 * p * n) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapAuc {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean AUC over `rounds` resamples with 2.5 / 97.5 percentile bounds.
/// Resamples missing a class are redrawn, at most `10 * rounds` draws total.
pub fn bootstrap_auc(scores: &[f64], truths: &[u8], rounds: usize, seed: u64) -> Result<BootstrapAuc, EvalError> {
    bootstrap_capped(scores, truths, rounds, 10 * rounds, seed)
}

fn bootstrap_capped(
    scores: &[f64],
    truths: &[u8],
    rounds: usize,
    cap: usize,
    seed: u64,
) -> Result<BootstrapAuc, EvalError> {
    if auc(scores, truths)?.is_none() {
        return Err(EvalError::SingleClass);
    }
    if rounds == 0 {
        return Err(EvalError::Empty("zero bootstrap rounds".into()));
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // tie groups as ranges of `order`
    let mut groups = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        groups.push(start..end);
        start = end;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(rounds);
    let mut counts = vec![0u64; n];
    let mut draws = 0;
    while values.len() < rounds {
        if draws == cap {
            return Err(EvalError::RedrawCapExceeded(draws - values.len()));
        }
        draws += 1;
        counts.fill(0);
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1;
        }
        let p: u64 = (0..n).filter(|&k| truths[k] != 0).map(|k| counts[k]).sum();
        let q = n as u64 - p;
        if p == 0 || q == 0 {
            continue;
        }
        // same integral rank-sum as `auc_indexed`, with multiplicities
        let mut rank2_sum: u128 = 0;
        let mut below: u128 = 0;
        for g in &groups {
            let (mut total, mut pos) = (0u128, 0u128);
            for &k in &order[g.clone()] {
                total += counts[k] as u128;
                if truths[k] != 0 {
                    pos += counts[k] as u128;
                }
            }
            rank2_sum += pos * (2 * below + 1 + total);
            below += total;
        }
        let (p, q) = (p as u128, q as u128);
        values.push((rank2_sum - p * (p + 1)) as f64 / (2 * p * q) as f64);
    }
    let mean = values.iter().sum::<f64>() / rounds as f64;
    values.sort_by(f64::total_cmp);
    // keep low <= mean <= high even for skewed, tiny resample sets
    let low = percentile(&values, 0.025).min(mean);
    let high = percentile(&values, 0.975).max(mean);
    Ok(BootstrapAuc { mean, low, high })
}

/// Scores and truths of one label, restricted to instances where it is known.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoredLabel {
    pub scores: Vec<f64>,
    pub truths: Vec<u8>,
}

/// Splits `predictions` (instance-major, `labels` values each) into
/// per-label known sets.
pub fn scored_labels(
    predictions: &[f64],
    instances: &[LabeledInstance],
    labels: usize,
) -> Result<Vec<ScoredLabel>, EvalError> {
    if predictions.len() != instances.len() * labels {
        return Err(EvalError::LengthMismatch(format!(
            "{} predictions for {} instances of {labels} labels",
            predictions.len(),
            instances.len()
        )));
    }
    let mut out = vec![ScoredLabel::default(); labels];
    for (inst, pred) in instances.iter().zip(predictions.chunks_exact(labels.max(1))) {
        if inst.labels.len() != labels || inst.mask.len() != labels {
            return Err(EvalError::LengthMismatch(format!(
                "instance has {} labels, expected {labels}",
                inst.labels.len()
            )));
        }
        for k in 0..labels {
            if inst.mask[k] == 1 {
                out[k].scores.push(pred[k]);
                out[k].truths.push(inst.labels[k]);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelAuc {
    pub target_index: usize,
    pub sensor_index: usize,
    /// `None` when the label has a single class in the test set.
    pub auc: Option<BootstrapAuc>,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl LabelAuc {
    pub fn defined(&self) -> bool {
        self.auc.is_some()
    }

    pub fn known(&self) -> usize {
        self.n_pos + self.n_neg
    }

    pub fn mean(&self) -> Option<f64> {
        self.auc.map(|a| a.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    pub targets: usize,
    pub sensors: usize,
    /// Label `j * sensors + i` for target `j`, sensor `i`.
    pub labels: Vec<LabelAuc>,
}

impl AucReport {
    pub fn label(&self, target: usize, sensor: usize) -> &LabelAuc {
        &self.labels[target * self.sensors + sensor]
    }
}

/// Bootstraps every label in parallel, label `k` seeded with `seed ^ k`.
pub fn report(
    predictions: &[f64],
    instances: &[LabeledInstance],
    targets: usize,
    sensors: usize,
    rounds: usize,
    seed: u64,
) -> Result<AucReport, EvalError> {
    if instances.is_empty() {
        return Err(EvalError::Empty("test set has no instances".into()));
    }
    let sets = scored_labels(predictions, instances, targets * sensors)?;
    let labels = sets
        .par_iter()
        .enumerate()
        .map(|(k, set)| {
            let n_pos = set.truths.iter().filter(|&&t| t != 0).count();
            let n_neg = set.truths.len() - n_pos;
            let auc = if n_pos > 0 && n_neg > 0 {
                Some(bootstrap_auc(&set.scores, &set.truths, rounds, seed ^ k as u64)?)
            } else {
                None
            };
            Ok(LabelAuc {
                target_index: k / sensors,
                sensor_index: k % sensors,
                auc,
                n_pos,
                n_neg,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(AucReport {
        targets,
        sensors,
        labels,
    })
}

pub fn write_auc_csv(path: &Path, report: &AucReport) -> Result<(), EvalError> {
    let mut out = String::from("target_index,sensor_index,mean,lo,hi,n_pos,n_neg\n");
    for l in &report.labels {
        let (m, lo, hi) = match l.auc {
            Some(a) => (format!("{:.6}", a.mean), format!("{:.6}", a.low), format!("{:.6}", a.high)),
            None => Default::default(),
        };
        writeln!(out, "{},{},{m},{lo},{hi},{},{}", l.target_index, l.sensor_index, l.n_pos, l.n_neg)
            .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Gray value used for undefined cells.
pub const UNDEFINED_GRAY: u8 = 64;

fn auc_gray(a: Option<f64>) -> u8 {
    match a {
        Some(v) => (((v - 0.5) / 0.5).clamp(0.0, 1.0) * 255.0).round() as u8,
        None => UNDEFINED_GRAY,
    }
}

/// Lays labels out as `rows x (cols * sensors)` pixels: target `r * cols + c`
/// and sensor `i` land at row `r`, column `c * sensors + i`.
fn heat_pixels(report: &AucReport, grid: (usize, usize), value: impl Fn(&LabelAuc) -> u8) -> Result<Vec<u8>, EvalError> {
    let (rows, cols) = grid;
    if rows * cols != report.targets {
        return Err(EvalError::LengthMismatch(format!(
            "{rows}x{cols} grid for {} targets",
            report.targets
        )));
    }
    let m = report.sensors;
    let mut px = vec![0u8; rows * cols * m];
    for r in 0..rows {
        for c in 0..cols {
            for i in 0..m {
                px[(r * cols + c) * m + i] = value(report.label(r * cols + c, i));
            }
        }
    }
    Ok(px)
}

fn write_pgm(path: &Path, width: usize, height: usize, px: &[u8]) -> Result<(), EvalError> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(px);
    std::fs::write(path, out)?;
    Ok(())
}

/// AUC 0.5 (or below) is black, 1.0 white, undefined [`UNDEFINED_GRAY`].
pub fn write_auc_heatmap(path: &Path, report: &AucReport, grid: (usize, usize)) -> Result<(), EvalError> {
    let px = heat_pixels(report, grid, |l| auc_gray(l.mean()))?;
    write_pgm(path, grid.1 * report.sensors, grid.0, &px)
}

/// Known-label counts on a log scale, brightest at the maximum.
pub fn write_count_heatmap(path: &Path, report: &AucReport, grid: (usize, usize)) -> Result<(), EvalError> {
    let max = report.labels.iter().map(LabelAuc::known).max().unwrap_or(0);
    let denom = (1.0 + max as f64).log10();
    let px = heat_pixels(report, grid, |l| {
        if max == 0 {
            0
        } else {
            (255.0 * (1.0 + l.known() as f64).log10() / denom).round() as u8
        }
    })?;
    write_pgm(path, grid.1 * report.sensors, grid.0, &px)
}

//! Minibatch SGD for the hash layer.
//!
//! Per batch the objective is
//!
//! ```text
//!   J(batch) =   Σ over unordered in-batch pairs  ½((1/L)·z_iᵀz_j − s_ij)²
//!              + λ1 · Σ over batch items          ½‖z_i − b_i‖²
//!              + λ2/2 · (‖W‖² + ‖c‖²)
//! ```
//!
//! with `s_ij = +1` for pairs in the [`PairSet`] and −1 otherwise, and
//! `b_i = sign(z_i)` refreshed every forward pass and held constant during
//! differentiation. The gradient is the exact analytic derivative of this
//! expression, accumulated into both endpoints of every pair.
//!
//! Parameter updates are scaled by the batch size:
//! `params ← params − (lr/|batch|)·∇J`. The per-batch sums above grow
//! linearly (quantization) and quadratically (pairs) with the batch, and an
//! unscaled step at the usual learning rates sends the bias into a growing
//! common-mode oscillation. Framework SGD conventionally folds a 1/batch
//! factor into the step, which is the regime the usual learning-rate values
//! come from, so the trainer does the same.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::model::{sign_binarize, HashModel};
use crate::neighborhood::PairSet;

/// Hyperparameters for [`train`]. Defaults mirror the usual configuration:
/// λ1 = 15, λ2 = 1e-5, lr = 0.001, batch 128, 50 epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Quantization weight λ1 ≥ 0.
    pub lambda1: f64,
    /// Parameter regularization weight λ2 ≥ 0.
    pub lambda2: f64,
    /// Learning rate ≥ 0 (zero makes every update a no-op).
    pub learning_rate: f64,
    /// Items per minibatch, at least 2 so every batch carries a pair.
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda1: 15.0,
            lambda2: 1e-5,
            learning_rate: 0.001,
            batch_size: 128,
            epochs: 50,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::Config("lambda1 and lambda2 must be >= 0".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning rate must be finite and >= 0".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epoch count must be at least 1".into()));
        }
        Ok(())
    }
}

/// One completed epoch: batch-mean objective, batch-mean quantization term
/// (unweighted by λ1), wall-clock seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub objective: f64,
    pub quantization: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
}

impl TrainReport {
    /// Sidecar text form: one line per epoch.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, e) in self.epochs.iter().enumerate() {
            out.push_str(&format!(
                "epoch={} objective={} quant={} seconds={:.3}\n",
                k + 1,
                e.objective,
                e.quantization,
                e.seconds
            ));
        }
        out
    }
}

/// ½((1/L)·z_iᵀz_j − s_ij)² for one pair; `s` must be ±1.
pub fn pair_loss(z_i: &[f64], z_j: &[f64], s: f64, code_len: usize) -> f64 {
    debug_assert!(s == 1.0 || s == -1.0);
    let theta: f64 = z_i.iter().zip(z_j).map(|(a, b)| a * b).sum();
    let d = theta / code_len as f64 - s;
    0.5 * d * d
}

/// ½‖z − b‖² with `b = sign(z)` as the binarization target.
pub fn quantization_loss(z: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(z.len(), b.len());
    debug_assert!(
        z.iter().zip(b).all(|(&zv, &bv)| bv == if zv >= 0.0 { 1.0 } else { -1.0 }),
        "b must equal sign(z)"
    );
    0.5 * z.iter().zip(b).map(|(zv, bv)| (zv - bv) * (zv - bv)).sum::<f64>()
}

fn activations(batch: &[usize], features: &FeatureMatrix, model: &HashModel) -> Vec<Vec<f64>> {
    batch
        .iter()
        .map(|&i| model.forward_unchecked(features.row(i)))
        .collect()
}

fn sign_of(batch_z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    batch_z.iter().map(|z| sign_binarize(z)).collect()
}

fn check_batch(batch: &[usize], features: &FeatureMatrix, model: &HashModel) -> Result<()> {
    if batch.len() < 2 {
        return Err(Error::Config(format!(
            "batch needs at least 2 items, got {}",
            batch.len()
        )));
    }
    if features.dim() != model.dim() {
        return Err(Error::Shape(format!(
            "features have {} dims, model expects {}",
            features.dim(),
            model.dim()
        )));
    }
    if let Some(&i) = batch.iter().find(|&&i| i >= features.n_items()) {
        return Err(Error::Shape(format!(
            "batch index {i} out of range for {} items",
            features.n_items()
        )));
    }
    Ok(())
}

/// Objective restricted to one batch; see the module docs for the formula.
pub fn batch_objective(
    batch: &[usize],
    features: &FeatureMatrix,
    pairs: &PairSet,
    model: &HashModel,
    cfg: &TrainConfig,
) -> Result<f64> {
    check_batch(batch, features, model)?;
    let z = activations(batch, features, model);
    let b = sign_of(&z);
    Ok(objective_given_activations(batch, &z, &b, pairs, model, cfg).0)
}

/// Returns (objective, quantization sum) given precomputed activations.
fn objective_given_activations(
    batch: &[usize],
    z: &[Vec<f64>],
    b: &[Vec<f64>],
    pairs: &PairSet,
    model: &HashModel,
    cfg: &TrainConfig,
) -> (f64, f64) {
    let code_len = model.code_len();
    let mut pair_sum = 0.0;
    for a in 0..batch.len() {
        for c in (a + 1)..batch.len() {
            let s = if pairs.is_positive(batch[a], batch[c]) {
                1.0
            } else {
                -1.0
            };
            pair_sum += pair_loss(&z[a], &z[c], s, code_len);
        }
    }
    let quant_sum: f64 = z
        .iter()
        .zip(b)
        .map(|(zi, bi)| quantization_loss(zi, bi))
        .sum();
    let (w_sq, c_sq) = model.param_norms_sq();
    let obj = pair_sum + cfg.lambda1 * quant_sum + cfg.lambda2 / 2.0 * (w_sq + c_sq);
    (obj, quant_sum)
}

/// Exact analytic gradient of [`batch_objective`] with respect to W and c,
/// holding each `b_i` fixed at `sign(z_i)`.
pub fn batch_gradient(
    batch: &[usize],
    features: &FeatureMatrix,
    pairs: &PairSet,
    model: &HashModel,
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_batch(batch, features, model)?;
    let z = activations(batch, features, model);
    let b = sign_of(&z);
    Ok(gradient_given_activations(batch, &z, &b, features, pairs, model, cfg))
}

fn gradient_given_activations(
    batch: &[usize],
    z: &[Vec<f64>],
    b: &[Vec<f64>],
    features: &FeatureMatrix,
    pairs: &PairSet,
    model: &HashModel,
    cfg: &TrainConfig,
) -> (Vec<f64>, Vec<f64>) {
    let m = batch.len();
    let code_len = model.code_len();
    let inv_len = 1.0 / code_len as f64;

    // dJ/dz per batch item: quantization part, then both pair endpoints.
    let mut g: Vec<Vec<f64>> = z
        .iter()
        .zip(b)
        .map(|(zi, bi)| {
            zi.iter()
                .zip(bi)
                .map(|(zv, bv)| cfg.lambda1 * (zv - bv))
                .collect()
        })
        .collect();

    for a in 0..m {
        for c in (a + 1)..m {
            let s = if pairs.is_positive(batch[a], batch[c]) {
                1.0
            } else {
                -1.0
            };
            let theta: f64 = z[a].iter().zip(&z[c]).map(|(x, y)| x * y).sum();
            let coeff = (theta * inv_len - s) * inv_len;
            for l in 0..code_len {
                g[a][l] += coeff * z[c][l];
                g[c][l] += coeff * z[a][l];
            }
        }
    }

    // Chain rule through z = Wᵀx + c, plus the λ2 regularizer.
    let mut dw: Vec<f64> = model.weights().iter().map(|w| cfg.lambda2 * w).collect();
    let mut dc: Vec<f64> = model.bias().iter().map(|c| cfg.lambda2 * c).collect();
    for (a, &item) in batch.iter().enumerate() {
        let x = features.row(item);
        for (d, &xd) in x.iter().enumerate() {
            let row = &mut dw[d * code_len..(d + 1) * code_len];
            for (slot, &gl) in row.iter_mut().zip(&g[a]) {
                *slot += xd * gl;
            }
        }
        for (slot, &gl) in dc.iter_mut().zip(&g[a]) {
            *slot += gl;
        }
    }
    (dw, dc)
}

/// Runs `epochs × ⌈N/batch⌉` SGD steps over shuffled items and returns the
/// trained model with its per-epoch report.
///
/// Model init draws W ~ N(0, 1/D) and the per-epoch shuffles continue from
/// the same seeded generator, so a fixed config reproduces the model
/// bit-for-bit. A trailing batch shorter than `batch_size` is processed as
/// long as it still has two items, otherwise skipped.
pub fn train(
    features: &FeatureMatrix,
    pairs: &PairSet,
    cfg: &TrainConfig,
    code_len: usize,
) -> Result<(HashModel, TrainReport)> {
    cfg.validate()?;
    if code_len == 0 {
        return Err(Error::Config("code length must be at least 1".into()));
    }
    if pairs.n_items() != features.n_items() {
        return Err(Error::Shape(format!(
            "pair set covers {} items, features have {}",
            pairs.n_items(),
            features.n_items()
        )));
    }
    if features.n_items() < 2 {
        return Err(Error::Config("training needs at least 2 items".into()));
    }

    let dim = features.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = HashModel::random_normal(dim, code_len, 1.0 / (dim as f64).sqrt(), &mut rng);

    let mut order: Vec<usize> = (0..features.n_items()).collect();
    let mut report = TrainReport::default();
    let mut step = 0usize;

    for _ in 0..cfg.epochs {
        let tick = Instant::now();
        order.shuffle(&mut rng);

        let mut obj_sum = 0.0;
        let mut quant_sum = 0.0;
        let mut n_batches = 0usize;

        for batch in order.chunks(cfg.batch_size) {
            if batch.len() < 2 {
                continue;
            }
            step += 1;

            let z = activations(batch, features, &model);
            let b = sign_of(&z);
            let (obj, quant) = objective_given_activations(batch, &z, &b, pairs, &model, cfg);
            if !obj.is_finite() {
                return Err(Error::Divergence { step });
            }
            obj_sum += obj;
            quant_sum += quant;
            n_batches += 1;

            let (dw, dc) = gradient_given_activations(batch, &z, &b, features, pairs, &model, cfg);
            let step_size = cfg.learning_rate / batch.len() as f64;
            let (w, c) = model.params_mut();
            for (p, g) in w.iter_mut().zip(&dw) {
                *p -= step_size * g;
            }
            for (p, g) in c.iter_mut().zip(&dc) {
                *p -= step_size * g;
            }
        }

        report.epochs.push(EpochStats {
            objective: obj_sum / n_batches as f64,
            quantization: quant_sum / n_batches as f64,
            seconds: tick.elapsed().as_secs_f64(),
        });
    }

    Ok((model, report))
}

//! The affine hash layer and its binarization.
//!
//! A model is a weight matrix W (D×L) plus bias c (L). Real activations are
//! `z = Wᵀx + c`; codes are the elementwise sign with `sign(0) = +1`. The
//! same forward pass encodes items seen or unseen in training.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::{BinaryCodeSet, FeatureMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HashModel {
    dim: usize,
    code_len: usize,
    /// Row-major D×L: `weights[d * code_len + l]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl HashModel {
    pub fn new(dim: usize, code_len: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if dim == 0 || code_len == 0 {
            return Err(Error::Config(format!(
                "model must be at least 1x1, got {dim}x{code_len}"
            )));
        }
        if weights.len() != dim * code_len {
            return Err(Error::Shape(format!(
                "expected {} weights for a {dim}x{code_len} model, got {}",
                dim * code_len,
                weights.len()
            )));
        }
        if bias.len() != code_len {
            return Err(Error::Shape(format!(
                "expected {code_len} bias entries, got {}",
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Data("model parameters must be finite".into()));
        }
        Ok(Self {
            dim,
            code_len,
            weights,
            bias,
        })
    }

    /// Weights drawn i.i.d. N(0, std²) from the given generator; zero bias.
    pub fn random_normal(dim: usize, code_len: usize, std: f64, rng: &mut impl Rng) -> Self {
        let weights = (0..dim * code_len)
            .map(|_| std * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self {
            dim,
            code_len,
            weights,
            bias: vec![0.0; code_len],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.bias)
    }

    /// Squared Frobenius norms of the parameters: (‖W‖², ‖c‖²).
    pub fn param_norms_sq(&self) -> (f64, f64) {
        let w = self.weights.iter().map(|v| v * v).sum();
        let c = self.bias.iter().map(|v| v * v).sum();
        (w, c)
    }

    /// Real-valued activation z = Wᵀx + c.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!(
                "input has {} dims, model expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.bias.clone();
        for (d, &xd) in x.iter().enumerate() {
            let row = &self.weights[d * self.code_len..(d + 1) * self.code_len];
            for (zl, &w) in z.iter_mut().zip(row) {
                *zl += xd * w;
            }
        }
        z
    }

    /// Encodes every row of `features`; rows are independent, so this is the
    /// out-of-sample extension as well.
    pub fn encode(&self, features: &FeatureMatrix) -> Result<BinaryCodeSet> {
        if features.dim() != self.dim {
            return Err(Error::Shape(format!(
                "features have {} dims, model expects {}",
                features.dim(),
                self.dim
            )));
        }
        let rows: Vec<Vec<f64>> = (0..features.n_items())
            .into_par_iter()
            .map(|i| sign_binarize(&self.forward_unchecked(features.row(i))))
            .collect();
        BinaryCodeSet::from_sign_rows(&rows)
    }
}

/// Elementwise sign with `u ≥ 0 → +1` (this includes −0.0) and `u < 0 → −1`.
pub fn sign_binarize(u: &[f64]) -> Vec<f64> {
    u.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect()
}

/// Random-hyperplane baseline: W ~ N(0,1) from a seeded generator, c = 0.
pub fn lsh_init(dim: usize, code_len: usize, seed: u64) -> Result<HashModel> {
    if dim == 0 || code_len == 0 {
        return Err(Error::Config(format!(
            "lsh model must be at least 1x1, got {dim}x{code_len}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(HashModel::random_normal(dim, code_len, 1.0, &mut rng))
}

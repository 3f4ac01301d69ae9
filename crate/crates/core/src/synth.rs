//! Clustered Gaussian benchmark generator, a desk-scale stand-in for real
//! image-feature corpora.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{FeatureMatrix, LabelSet};
use crate::error::{Error, Result};

/// Generator settings. `noise` is relative to the unit per-coordinate spread
/// of the cluster centers; `scale` multiplies the whole dataset. The default
/// scale puts row norms in the range of penultimate-layer CNN activations,
/// which also keeps the hash layer's initial activations at unit order.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub clusters: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub noise: f64,
    pub scale: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            clusters: 10,
            per_cluster: 200,
            dim: 64,
            noise: 0.8,
            scale: 2.2,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.per_cluster == 0 || self.dim == 0 {
            return Err(Error::Config(
                "clusters, per-cluster and dim must all be at least 1".into(),
            ));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::Config("noise must be finite and >= 0".into()));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::Config("scale must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Draws `clusters × per_cluster` points: cluster centers with standard
/// normal coordinates, points jittered around them by `noise`, everything
/// shifted to exact zero mean (balanced sign bits) and multiplied by
/// `scale`. Labels are the generating cluster ids, in block order.
pub fn generate(cfg: &SynthConfig) -> Result<(FeatureMatrix, LabelSet)> {
    cfg.validate()?;
    let n = cfg.clusters * cfg.per_cluster;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let centers: Vec<Vec<f64>> = (0..cfg.clusters)
        .map(|_| {
            (0..cfg.dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();

    let mut values = Vec::with_capacity(n * cfg.dim);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..cfg.per_cluster {
            for &mu in center {
                values.push(mu + cfg.noise * rng.sample::<f64, _>(StandardNormal));
            }
            labels.push(c as i64);
        }
    }

    // Center the dataset, then scale.
    for d in 0..cfg.dim {
        let mean = (0..n).map(|i| values[i * cfg.dim + d]).sum::<f64>() / n as f64;
        for i in 0..n {
            values[i * cfg.dim + d] = (values[i * cfg.dim + d] - mean) * cfg.scale;
        }
    }

    Ok((
        FeatureMatrix::new(n, cfg.dim, values)?,
        LabelSet::new(labels)?,
    ))
}

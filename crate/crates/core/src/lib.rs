//! Self-supervised binary hashing over precomputed feature vectors.
//!
//! The pipeline: construct pseudo pairwise labels from the feature-space
//! neighborhood structure (two-stage KNN with expansion), train an affine
//! hash layer against a pairwise + quantization objective, binarize with
//! sign, and evaluate retrieval in Hamming space. A random-hyperplane
//! encoder serves as the untrained baseline.
//!
//! Modules follow the pipeline stages:
//!
//! - [`data`]: feature matrices, bit-packed codes, labels, cosine similarity
//! - [`io`]: the binary/text file formats
//! - [`neighborhood`]: ranking lists, expansion, the positive-pair set
//! - [`model`]: the affine hash layer, sign binarization, LSH baseline
//! - [`train`]: the pairwise + quantization objective and minibatch SGD
//! - [`eval`]: Hamming retrieval, mAP@R, precision–recall curves
//! - [`synth`]: clustered Gaussian benchmark generator

pub mod data;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod neighborhood;
pub mod synth;
pub mod train;

pub use data::{cosine_similarity, BinaryCodeSet, FeatureMatrix, LabelSet};
pub use error::{Error, Result};
pub use eval::{
    hamming_distance, mean_average_precision, precision_recall_curve, retrieve, RetrievalResult,
};
pub use model::{lsh_init, sign_binarize, HashModel};
pub use neighborhood::{
    build_pair_set, build_pairs, build_ranking_lists, expand_neighbors, label_precision, PairSet,
    RankingLists,
};
pub use synth::SynthConfig;
pub use train::{
    batch_gradient, batch_objective, pair_loss, quantization_loss, train, TrainConfig, TrainReport,
};

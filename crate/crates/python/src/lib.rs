//! Python bindings for the core types and the whole pipeline: synth data or
//! load feature files, build pairwise labels, train, encode, evaluate.
//!
//! Matrices cross the boundary as plain lists of lists of floats, which is
//! plenty for the scales this toolkit targets.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use ddh_core::{io, synth as synth_mod, train as train_mod, Error};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// N×D real-valued feature vectors; item ids are row indices.
#[pyclass(name = "FeatureMatrix")]
struct PyFeatureMatrix {
    inner: ddh_core::FeatureMatrix,
}

#[pymethods]
impl PyFeatureMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: ddh_core::FeatureMatrix::from_rows(&rows).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.n_items() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn select_rows(&self, indices: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.select_rows(&indices).map_err(to_py_err)?,
        })
    }

    /// Writes a `.ddhf` file (f32 payload).
    fn save(&self, path: &str) -> PyResult<()> {
        io::write_features(&self.inner, path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_features(path).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn load_csv(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_features_csv(path).map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n_items()
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureMatrix(n_items={}, dim={})",
            self.inner.n_items(),
            self.inner.dim()
        )
    }
}

/// Bit-packed ±1 codes, one row per item.
#[pyclass(name = "BinaryCodeSet")]
struct PyBinaryCodeSet {
    inner: ddh_core::BinaryCodeSet,
}

#[pymethods]
impl PyBinaryCodeSet {
    #[getter]
    fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    #[getter]
    fn code_len(&self) -> usize {
        self.inner.code_len()
    }

    /// Row i as a list of +1/-1 integers.
    fn signs(&self, i: usize) -> PyResult<Vec<i8>> {
        if i >= self.inner.n_items() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.signs(i).iter().map(|&v| v as i8).collect())
    }

    fn hamming(&self, i: usize, other: &PyBinaryCodeSet, j: usize) -> PyResult<u32> {
        if i >= self.inner.n_items() || j >= other.inner.n_items() {
            return Err(PyValueError::new_err("row index out of range"));
        }
        ddh_core::hamming_distance(self.inner.row(i), other.inner.row(j)).map_err(to_py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_codes(&self.inner, path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_codes(path).map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n_items()
    }

    fn __repr__(&self) -> String {
        format!(
            "BinaryCodeSet(n_items={}, code_len={})",
            self.inner.n_items(),
            self.inner.code_len()
        )
    }
}

/// One integer class id per item (evaluation ground truth).
#[pyclass(name = "LabelSet")]
struct PyLabelSet {
    inner: ddh_core::LabelSet,
}

#[pymethods]
impl PyLabelSet {
    #[new]
    fn new(labels: Vec<i64>) -> PyResult<Self> {
        Ok(Self {
            inner: ddh_core::LabelSet::new(labels).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn labels(&self) -> Vec<i64> {
        self.inner.labels().to_vec()
    }

    fn select(&self, indices: Vec<usize>) -> PyResult<Self> {
        for &i in &indices {
            if i >= self.inner.n_items() {
                return Err(PyValueError::new_err(format!("index {i} out of range")));
            }
        }
        Ok(Self {
            inner: self.inner.select(&indices).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_labels(&self.inner, path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_labels(path).map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n_items()
    }
}

/// Symmetric positive-pair adjacency built from the neighborhood structure.
#[pyclass(name = "PairSet")]
struct PyPairSet {
    inner: ddh_core::PairSet,
}

#[pymethods]
impl PyPairSet {
    #[getter]
    fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    #[getter]
    fn n_positive_pairs(&self) -> usize {
        self.inner.n_positive_pairs()
    }

    fn positives(&self, i: usize) -> PyResult<Vec<u32>> {
        if i >= self.inner.n_items() {
            return Err(PyValueError::new_err(format!("item {i} out of range")));
        }
        Ok(self.inner.positives(i).to_vec())
    }

    fn is_positive(&self, i: usize, j: usize) -> bool {
        self.inner.is_positive(i, j)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_pairs(&self.inner, path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_pairs(path).map_err(to_py_err)?,
        })
    }
}

/// Affine hash layer: z = Wᵀx + c, code = sign(z).
#[pyclass(name = "HashModel")]
struct PyHashModel {
    inner: ddh_core::HashModel,
}

#[pymethods]
impl PyHashModel {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn code_len(&self) -> usize {
        self.inner.code_len()
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forward(&x).map_err(to_py_err)
    }

    fn encode(&self, features: &PyFeatureMatrix) -> PyResult<PyBinaryCodeSet> {
        Ok(PyBinaryCodeSet {
            inner: self.inner.encode(&features.inner).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_model(&self.inner, path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_model(path).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "HashModel(dim={}, code_len={})",
            self.inner.dim(),
            self.inner.code_len()
        )
    }
}

/// Per-epoch training statistics.
#[pyclass(name = "TrainReport")]
struct PyTrainReport {
    inner: train_mod::TrainReport,
}

#[pymethods]
impl PyTrainReport {
    /// List of per-epoch mean objectives.
    #[getter]
    fn objectives(&self) -> Vec<f64> {
        self.inner.epochs.iter().map(|e| e.objective).collect()
    }

    #[getter]
    fn quantization(&self) -> Vec<f64> {
        self.inner.epochs.iter().map(|e| e.quantization).collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.epochs.len()
    }
}

#[pyfunction]
fn cosine_similarity(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    ddh_core::cosine_similarity(&a, &b).map_err(to_py_err)
}

/// Full label construction: K1-NN ranking lists, K2 expansion, pair set.
#[pyfunction]
fn build_pairs(features: &PyFeatureMatrix, k1: usize, k2: usize) -> PyResult<PyPairSet> {
    Ok(PyPairSet {
        inner: ddh_core::build_pairs(&features.inner, k1, k2).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn label_precision(pairs: &PyPairSet, truth: &PyLabelSet) -> PyResult<f64> {
    ddh_core::label_precision(&pairs.inner, &truth.inner).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (features, pairs, bits, lambda1=15.0, lambda2=1e-5, learning_rate=0.001, batch_size=128, epochs=50, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train(
    features: &PyFeatureMatrix,
    pairs: &PyPairSet,
    bits: usize,
    lambda1: f64,
    lambda2: f64,
    learning_rate: f64,
    batch_size: usize,
    epochs: usize,
    seed: u64,
) -> PyResult<(PyHashModel, PyTrainReport)> {
    let cfg = train_mod::TrainConfig {
        lambda1,
        lambda2,
        learning_rate,
        batch_size,
        epochs,
        seed,
    };
    let (model, report) =
        ddh_core::train(&features.inner, &pairs.inner, &cfg, bits).map_err(to_py_err)?;
    Ok((PyHashModel { inner: model }, PyTrainReport { inner: report }))
}

/// Random-hyperplane baseline model.
#[pyfunction]
fn lsh_init(dim: usize, code_len: usize, seed: u64) -> PyResult<PyHashModel> {
    Ok(PyHashModel {
        inner: ddh_core::lsh_init(dim, code_len, seed).map_err(to_py_err)?,
    })
}

/// Ranked database ids per query (ascending Hamming, ties by index),
/// truncated at `r`.
#[pyfunction]
#[pyo3(signature = (queries, database, r, exclude_self=false))]
fn retrieve(
    queries: &PyBinaryCodeSet,
    database: &PyBinaryCodeSet,
    r: usize,
    exclude_self: bool,
) -> PyResult<Vec<Vec<u32>>> {
    let result =
        ddh_core::retrieve(&queries.inner, &database.inner, r, exclude_self).map_err(to_py_err)?;
    Ok(result.rankings().to_vec())
}

#[pyfunction]
fn mean_average_precision(
    queries: &PyBinaryCodeSet,
    database: &PyBinaryCodeSet,
    query_labels: &PyLabelSet,
    db_labels: &PyLabelSet,
    r: usize,
) -> PyResult<f64> {
    let result = ddh_core::retrieve(&queries.inner, &database.inner, database.inner.n_items(), false)
        .map_err(to_py_err)?;
    ddh_core::mean_average_precision(&result, &query_labels.inner, &db_labels.inner, r)
        .map_err(to_py_err)
}

/// Full-ranking precision-recall curve as a list of (recall, precision).
#[pyfunction]
fn precision_recall_curve(
    queries: &PyBinaryCodeSet,
    database: &PyBinaryCodeSet,
    query_labels: &PyLabelSet,
    db_labels: &PyLabelSet,
) -> PyResult<Vec<(f64, f64)>> {
    let result = ddh_core::retrieve(&queries.inner, &database.inner, database.inner.n_items(), false)
        .map_err(to_py_err)?;
    ddh_core::precision_recall_curve(&result, &query_labels.inner, &db_labels.inner)
        .map_err(to_py_err)
}

/// Clustered Gaussian benchmark; returns (features, labels).
#[pyfunction]
#[pyo3(signature = (clusters=10, per_cluster=200, dim=64, noise=0.8, scale=2.2, seed=0))]
fn synth(
    clusters: usize,
    per_cluster: usize,
    dim: usize,
    noise: f64,
    scale: f64,
    seed: u64,
) -> PyResult<(PyFeatureMatrix, PyLabelSet)> {
    let cfg = synth_mod::SynthConfig {
        clusters,
        per_cluster,
        dim,
        noise,
        scale,
        seed,
    };
    let (features, labels) = synth_mod::generate(&cfg).map_err(to_py_err)?;
    Ok((
        PyFeatureMatrix { inner: features },
        PyLabelSet { inner: labels },
    ))
}

#[pymodule]
fn ddh_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFeatureMatrix>()?;
    m.add_class::<PyBinaryCodeSet>()?;
    m.add_class::<PyLabelSet>()?;
    m.add_class::<PyPairSet>()?;
    m.add_class::<PyHashModel>()?;
    m.add_class::<PyTrainReport>()?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(build_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(label_precision, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(lsh_init, m)?)?;
    m.add_function(wrap_pyfunction!(retrieve, m)?)?;
    m.add_function(wrap_pyfunction!(mean_average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(precision_recall_curve, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}

//! Core domain types: feature matrices, bit-packed code sets, label sets.
//!
//! All values are held in `f64`; the on-disk formats store `f32` payloads
//! (see [`crate::io`]). Types are immutable after construction and safe to
//! share across threads.

use crate::error::{Error, Result};

/// N×D row-major matrix of real-valued feature vectors. Item ids are the
/// row indices `0..n_items`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_items: usize,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major values, checking shape and finiteness.
    pub fn new(n_items: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if n_items == 0 || dim == 0 {
            return Err(Error::Data(format!(
                "feature matrix must be at least 1x1, got {n_items}x{dim}"
            )));
        }
        if values.len() != n_items * dim {
            return Err(Error::Shape(format!(
                "expected {} values for a {n_items}x{dim} matrix, got {}",
                n_items * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {} column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            n_items,
            dim,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("feature matrix needs at least one row".into()));
        }
        let dim = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Data(format!(
                "ragged rows: row 0 has {dim} columns, row {i} has {}",
                r.len()
            )));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), dim, values)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copies the given rows into a new matrix, preserving their order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n_items {
                return Err(Error::Shape(format!(
                    "row index {i} out of range for {} items",
                    self.n_items
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.dim, values)
    }
}

/// N×L binary codes, one bit-packed row per item. Bit 1 encodes code value
/// +1 and bit 0 encodes −1. Rows are packed MSB-first with the final byte
/// zero-padded, so Hamming distances can be taken directly over the bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCodeSet {
    n_items: usize,
    code_len: usize,
    row_bytes: usize,
    codes: Vec<u8>,
}

impl BinaryCodeSet {
    /// Packs rows of ±1 values. Any non-negative value maps to bit 1.
    pub fn from_sign_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("code set needs at least one row".into()));
        }
        let code_len = rows[0].len();
        if code_len == 0 {
            return Err(Error::Data("code length must be at least 1".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != code_len) {
            return Err(Error::Shape(format!(
                "row {i} has length {}, expected {code_len}",
                r.len()
            )));
        }
        let row_bytes = code_len.div_ceil(8);
        let mut codes = vec![0u8; rows.len() * row_bytes];
        for (i, row) in rows.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                if v >= 0.0 {
                    codes[i * row_bytes + l / 8] |= 0x80 >> (l % 8);
                }
            }
        }
        Ok(Self {
            n_items: rows.len(),
            code_len,
            row_bytes,
            codes,
        })
    }

    /// Reassembles a code set from packed bytes, validating the padding.
    pub fn from_packed(n_items: usize, code_len: usize, codes: Vec<u8>) -> Result<Self> {
        if n_items == 0 || code_len == 0 {
            return Err(Error::Data(format!(
                "code set must be at least 1 item x 1 bit, got {n_items}x{code_len}"
            )));
        }
        let row_bytes = code_len.div_ceil(8);
        if codes.len() != n_items * row_bytes {
            return Err(Error::Shape(format!(
                "expected {} packed bytes, got {}",
                n_items * row_bytes,
                codes.len()
            )));
        }
        // Padding bits must be zero or byte-level Hamming counts would lie.
        let pad_bits = row_bytes * 8 - code_len;
        if pad_bits > 0 {
            let mask = (1u8 << pad_bits) - 1;
            for i in 0..n_items {
                let last = codes[(i + 1) * row_bytes - 1];
                if last & mask != 0 {
                    return Err(Error::Data(format!(
                        "nonzero padding bits in row {i}"
                    )));
                }
            }
        }
        Ok(Self {
            n_items,
            code_len,
            row_bytes,
            codes,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn row_bytes(&self) -> usize {
        self.row_bytes
    }

    pub fn packed(&self) -> &[u8] {
        &self.codes
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.codes[i * self.row_bytes..(i + 1) * self.row_bytes]
    }

    pub fn bit(&self, i: usize, l: usize) -> bool {
        self.codes[i * self.row_bytes + l / 8] & (0x80 >> (l % 8)) != 0
    }

    /// Unpacks row `i` into its ±1 representation.
    pub fn signs(&self, i: usize) -> Vec<f64> {
        (0..self.code_len)
            .map(|l| if self.bit(i, l) { 1.0 } else { -1.0 })
            .collect()
    }
}

/// One integer class id per item. Used only to score retrieval; labels never
/// feed training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<i64>,
}

impl LabelSet {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Data("label set needs at least one entry".into()));
        }
        Ok(Self { labels })
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> i64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let picked: Vec<i64> = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(picked)
    }
}

/// Cosine similarity a·b / (‖a‖‖b‖).
///
/// Fails on dimension mismatch and on zero-norm inputs; the caller decides
/// any fallback.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cosine of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("cosine of a zero-norm vector".into()));
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

//! On-disk formats. All multi-byte integers are little-endian; all float
//! payloads are `f32` even though in-memory arithmetic is `f64`.
//!
//! | format   | layout                                                              |
//! |----------|---------------------------------------------------------------------|
//! | `.ddhf`  | magic `DDHF`, version `0x01`, u64 n_items, u32 dim, f32 values row-major |
//! | `.ddhb`  | magic `DDHB`, version `0x01`, u64 n_items, u32 code_len, packed rows (MSB-first, zero-padded) |
//! | `.ddhp`  | magic `DDHP`, version `0x01`, u64 n_items, per item: u32 count + sorted u32 neighbor ids |
//! | `.ddhm`  | magic `DDHM`, version `0x01`, u32 dim, u32 code_len, f32 W row-major (D×L), f32 c (L) |
//! | labels   | plain text, one integer per line                                    |
//! | csv      | no header, comma-separated, all-numeric                             |
//!
//! Every format satisfies `load(write(x)) == x` bit-exactly (float payloads
//! compare after the one-time f32 rounding on write).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::{BinaryCodeSet, FeatureMatrix, LabelSet};
use crate::error::{Error, Result};
use crate::model::HashModel;
use crate::neighborhood::PairSet;

pub const FORMAT_VERSION: u8 = 0x01;

const MAGIC_FEATURES: &[u8; 4] = b"DDHF";
const MAGIC_CODES: &[u8; 4] = b"DDHB";
const MAGIC_PAIRS: &[u8; 4] = b"DDHP";
const MAGIC_MODEL: &[u8; 4] = b"DDHM";

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format(format!("{}: truncated while reading {what}", path.display()))
        } else {
            Error::io(path, e)
        }
    })
}

fn check_header(r: &mut impl Read, magic: &[u8; 4], path: &Path) -> Result<()> {
    let mut got = [0u8; 5];
    read_exact(r, &mut got, path, "magic and version")?;
    if &got[..4] != magic {
        return Err(Error::Format(format!(
            "{}: bad magic {:02x?}, expected {:?}",
            path.display(),
            &got[..4],
            std::str::from_utf8(magic).unwrap()
        )));
    }
    if got[4] != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported version {}, expected {FORMAT_VERSION}",
            path.display(),
            got[4]
        )));
    }
    Ok(())
}

fn read_u64(r: &mut impl Read, path: &Path, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path, what)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read, path: &Path, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32_payload(r: &mut impl Read, count: usize, path: &Path, what: &str) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 4];
    read_exact(r, &mut bytes, path, what)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

fn write_f32_payload(w: &mut impl Write, values: &[f64], path: &Path) -> Result<()> {
    for &v in values {
        w.write_all(&(v as f32).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Reads a `.ddhf` feature file.
pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut r = open(path)?;
    check_header(&mut r, MAGIC_FEATURES, path)?;
    let n_items = read_u64(&mut r, path, "item count")? as usize;
    let dim = read_u32(&mut r, path, "dimension")? as usize;
    let n_values = n_items
        .checked_mul(dim)
        .ok_or_else(|| Error::Format(format!("{}: header overflows", path.display())))?;
    let values = read_f32_payload(&mut r, n_values, path, "feature values")?;
    FeatureMatrix::new(n_items, dim, values)
}

/// Writes a `.ddhf` feature file (values rounded to f32).
pub fn write_features(m: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_all(MAGIC_FEATURES).map_err(|e| Error::io(path, e))?;
    w.write_all(&[FORMAT_VERSION]).map_err(|e| Error::io(path, e))?;
    w.write_all(&(m.n_items() as u64).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.write_all(&(m.dim() as u32).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    write_f32_payload(&mut w, m.values(), path)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads features from a headerless all-numeric CSV.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let r = open(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "{}: line {}: not a number: {tok:?}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Data(format!(
                    "{}: line {}: ragged row, {} fields vs {}",
                    path.display(),
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    FeatureMatrix::from_rows(&rows)
}

pub fn load_codes(path: impl AsRef<Path>) -> Result<BinaryCodeSet> {
    let path = path.as_ref();
    let mut r = open(path)?;
    check_header(&mut r, MAGIC_CODES, path)?;
    let n_items = read_u64(&mut r, path, "item count")? as usize;
    let code_len = read_u32(&mut r, path, "code length")? as usize;
    if n_items == 0 || code_len == 0 {
        return Err(Error::Format(format!(
            "{}: empty code set in header",
            path.display()
        )));
    }
    let mut packed = vec![0u8; n_items * code_len.div_ceil(8)];
    read_exact(&mut r, &mut packed, path, "packed codes")?;
    BinaryCodeSet::from_packed(n_items, code_len, packed)
}

pub fn write_codes(codes: &BinaryCodeSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_all(MAGIC_CODES).map_err(|e| Error::io(path, e))?;
    w.write_all(&[FORMAT_VERSION]).map_err(|e| Error::io(path, e))?;
    w.write_all(&(codes.n_items() as u64).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.write_all(&(codes.code_len() as u32).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.write_all(codes.packed()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a label file: one integer per line.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelSet> {
    let path = path.as_ref();
    let r = open(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let tok = line.trim();
        if tok.is_empty() {
            continue;
        }
        labels.push(tok.parse::<i64>().map_err(|_| {
            Error::Data(format!(
                "{}: line {}: not an integer label: {tok:?}",
                path.display(),
                lineno + 1
            ))
        })?);
    }
    LabelSet::new(labels)
}

pub fn write_labels(labels: &LabelSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for &l in labels.labels() {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a `.ddhp` positive-pair adjacency file.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<PairSet> {
    let path = path.as_ref();
    let mut r = open(path)?;
    check_header(&mut r, MAGIC_PAIRS, path)?;
    let n_items = read_u64(&mut r, path, "item count")? as usize;
    let mut positives = Vec::with_capacity(n_items);
    for i in 0..n_items {
        let count = read_u32(&mut r, path, "neighbor count")? as usize;
        let mut bytes = vec![0u8; count * 4];
        read_exact(&mut r, &mut bytes, path, "neighbor ids")?;
        let row: Vec<u32> = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if !row.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Format(format!(
                "{}: neighbors of item {i} not strictly sorted",
                path.display()
            )));
        }
        positives.push(row);
    }
    PairSet::from_adjacency(n_items, positives)
}

pub fn write_pairs(pairs: &PairSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_all(MAGIC_PAIRS).map_err(|e| Error::io(path, e))?;
    w.write_all(&[FORMAT_VERSION]).map_err(|e| Error::io(path, e))?;
    w.write_all(&(pairs.n_items() as u64).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    for i in 0..pairs.n_items() {
        let row = pairs.positives(i);
        w.write_all(&(row.len() as u32).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
        for &j in row {
            w.write_all(&j.to_le_bytes()).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a `.ddhm` hash-model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<HashModel> {
    let path = path.as_ref();
    let mut r = open(path)?;
    check_header(&mut r, MAGIC_MODEL, path)?;
    let dim = read_u32(&mut r, path, "dimension")? as usize;
    let code_len = read_u32(&mut r, path, "code length")? as usize;
    let weights = read_f32_payload(&mut r, dim * code_len, path, "weights")?;
    let bias = read_f32_payload(&mut r, code_len, path, "bias")?;
    HashModel::new(dim, code_len, weights, bias)
}

pub fn write_model(model: &HashModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_all(MAGIC_MODEL).map_err(|e| Error::io(path, e))?;
    w.write_all(&[FORMAT_VERSION]).map_err(|e| Error::io(path, e))?;
    w.write_all(&(model.dim() as u32).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.write_all(&(model.code_len() as u32).to_le_bytes())
        .map_err(|e| Error::io(path, e))?;
    write_f32_payload(&mut w, model.weights(), path)?;
    write_f32_payload(&mut w, model.bias(), path)?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> tempfile::TempDir {
        tempfile::Builder::new().prefix(name).tempdir().unwrap()
    }

    #[test]
    fn feature_file_layout_is_bit_exact() {
        let dir = tmp("feat");
        let path = dir.path().join("m.ddhf");
        let m = FeatureMatrix::new(2, 3, vec![1.0, 2.0, 3.0, -4.0, 5.5, 0.25]).unwrap();
        write_features(&m, &path).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"DDHF");
        assert_eq!(bytes[4], 0x01);
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[13..17].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 17 + 6 * 4);

        let back = load_features(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn load_then_write_reproduces_the_file() {
        let dir = tmp("feat2");
        let a = dir.path().join("a.ddhf");
        let b = dir.path().join("b.ddhf");
        let m = FeatureMatrix::new(3, 2, vec![0.1, -0.2, 3.5, 1e-3, -7.25, 42.0]).unwrap();
        write_features(&m, &a).unwrap();
        write_features(&load_features(&a).unwrap(), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tmp("magic");
        let path = dir.path().join("x.ddhf");
        std::fs::write(&path, b"NOPE\x01junkjunkjunk").unwrap();
        assert!(matches!(load_features(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload_is_a_format_error() {
        let dir = tmp("trunc");
        let path = dir.path().join("x.ddhf");
        let m = FeatureMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        write_features(&m, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(load_features(&path), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_payload_is_a_data_error() {
        let dir = tmp("nan");
        let path = dir.path().join("x.ddhf");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"DDHF\x01");
        bytes.extend_from_slice(&1u64.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load_features(&path), Err(Error::Data(_))));
    }

    #[test]
    fn csv_parses_and_rejects_ragged() {
        let dir = tmp("csv");
        let good = dir.path().join("good.csv");
        std::fs::write(&good, "1,0\n0,1\n").unwrap();
        let m = load_features_csv(&good).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0]);
        assert_eq!(m.row(1), &[0.0, 1.0]);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "1,0\n0\n").unwrap();
        assert!(matches!(load_features_csv(&bad), Err(Error::Data(_))));
    }

    #[test]
    fn codes_round_trip_including_padded_byte() {
        let dir = tmp("codes");
        let path = dir.path().join("c.ddhb");
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                (0..33)
                    .map(|l| if (i * 7 + l * 3) % 2 == 0 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        let codes = BinaryCodeSet::from_sign_rows(&rows).unwrap();
        write_codes(&codes, &path).unwrap();
        assert_eq!(load_codes(&path).unwrap(), codes);
    }

    #[test]
    fn labels_round_trip() {
        let dir = tmp("labels");
        let path = dir.path().join("l.txt");
        let l = LabelSet::new(vec![3, -1, 0, 3]).unwrap();
        write_labels(&l, &path).unwrap();
        assert_eq!(load_labels(&path).unwrap(), l);
    }

    #[test]
    fn missing_file_reports_io_error() {
        let err = load_labels("/nonexistent/deeply/nested.txt").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}

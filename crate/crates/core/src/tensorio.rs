//! Binary tensor persistence: little-endian f64 matrices with a JSON manifest.
//!
//! Checkpoints are a `.bin` file holding named matrices back to back plus a
//! `.json` sidecar listing each matrix's name and shape, so a checkpoint is
//! self-describing and byte-stable.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense row-major f64 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n * cols);
        for r in &rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: n, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointManifest {
    tensors: Vec<TensorEntry>,
    #[serde(default)]
    meta: serde_json::Value,
}

/// Write named matrices to `<stem>.bin` + `<stem>.json`, with arbitrary
/// caller metadata embedded in the manifest.
pub fn save_tensors(stem: &Path, tensors: &[(&str, &Matrix)], meta: serde_json::Value) -> Result<()> {
    let bin_path = stem.with_extension("bin");
    let json_path = stem.with_extension("json");
    let mut bin = Vec::new();
    let mut entries = Vec::new();
    for (name, m) in tensors {
        entries.push(TensorEntry {
            name: name.to_string(),
            rows: m.rows,
            cols: m.cols,
        });
        for &x in &m.data {
            bin.extend_from_slice(&x.to_le_bytes());
        }
    }
    let manifest = CheckpointManifest {
        tensors: entries,
        meta,
    };
    fs::File::create(&bin_path)
        .and_then(|mut f| f.write_all(&bin))
        .map_err(|e| Error::file(bin_path.display().to_string(), e))?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&json_path, json).map_err(|e| Error::file(json_path.display().to_string(), e))?;
    Ok(())
}

/// Read back matrices and metadata written by [`save_tensors`].
pub fn load_tensors(stem: &Path) -> Result<(Vec<(String, Matrix)>, serde_json::Value)> {
    let bin_path = stem.with_extension("bin");
    let json_path = stem.with_extension("json");
    let manifest_str =
        fs::read_to_string(&json_path).map_err(|e| Error::file(json_path.display().to_string(), e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&manifest_str)
        .map_err(|e| Error::format(0, format!("checkpoint manifest: {e}")))?;
    let mut bin = Vec::new();
    fs::File::open(&bin_path)
        .and_then(|mut f| f.read_to_end(&mut bin))
        .map_err(|e| Error::file(bin_path.display().to_string(), e))?;

    let expected: usize = manifest.tensors.iter().map(|t| t.rows * t.cols * 8).sum();
    if bin.len() != expected {
        return Err(Error::format(
            0,
            format!(
                "checkpoint body is {} bytes, manifest expects {}",
                bin.len(),
                expected
            ),
        ));
    }

    let mut out = Vec::new();
    let mut offset = 0usize;
    for t in manifest.tensors {
        let n = t.rows * t.cols;
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let mut b = [0u8; 8];
            b.copy_from_slice(&bin[offset + i * 8..offset + i * 8 + 8]);
            data.push(f64::from_le_bytes(b));
        }
        offset += n * 8;
        out.push((
            t.name,
            Matrix {
                rows: t.rows,
                cols: t.cols,
                data,
            },
        ));
    }
    Ok((out, manifest.meta))
}

/// Hex-encoded SHA-256 of a list of strings (newline-joined); used to fingerprint
/// vocabularies in checkpoint sidecars.
pub fn vocab_hash(names: &[String]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(b"\n");
    }
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensors_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("ckpt");
        let a = Matrix::from_rows(vec![vec![1.0, 2.5], vec![-3.0, 0.125]]);
        let b = Matrix::from_rows(vec![vec![0.0, -1.0, 9.75]]);
        save_tensors(
            &stem,
            &[("a", &a), ("b", &b)],
            serde_json::json!({"k": 2}),
        )
        .unwrap();
        let (tensors, meta) = load_tensors(&stem).unwrap();
        assert_eq!(tensors.len(), 2);
        assert_eq!(tensors[0].1, a);
        assert_eq!(tensors[1].1, b);
        assert_eq!(meta["k"], 2);
    }

    #[test]
    fn vocab_hash_is_order_sensitive() {
        let a = vocab_hash(&["x".into(), "y".into()]);
        let b = vocab_hash(&["y".into(), "x".into()]);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }
}

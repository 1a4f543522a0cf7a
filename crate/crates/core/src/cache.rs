//! Binary cache for Gram factors and coefficient tensors.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! b"HAMCACHE"            8 bytes
//! version: u32           currently 1
//! header_len: u64
//! header: JSON           header_len bytes, UTF-8
//! arrays                 concatenated, in header order
//! ```
//!
//! The header lists each array as `{"name", "dtype": "f64" | "u32", "len"}`
//! next to free-form metadata. Files are named by the SHA-256 of a key string.

use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::wick::{NoiseGrid, SymTensor};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"HAMCACHE";
pub const VERSION: u32 = 1;

/// A named array stored in a cache file.
#[derive(Debug, Clone, PartialEq)]
pub enum Array {
    F64(Vec<f64>),
    U32(Vec<u32>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ArraySpec {
    name: String,
    dtype: String,
    len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    meta: serde_json::Value,
    arrays: Vec<ArraySpec>,
}

fn io(e: std::io::Error) -> Error {
    Error::Numerical(format!("cache I/O: {e}"))
}

/// Hex SHA-256 of `text`.
pub fn content_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `arrays` with metadata to `path`.
pub fn write_file(path: &Path, meta: serde_json::Value, arrays: &[(String, Array)]) -> Result<()> {
    let header = Header {
        meta,
        arrays: arrays
            .iter()
            .map(|(name, a)| match a {
                Array::F64(v) => ArraySpec { name: name.clone(), dtype: "f64".into(), len: v.len() },
                Array::U32(v) => ArraySpec { name: name.clone(), dtype: "u32".into(), len: v.len() },
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut buf = Vec::with_capacity(20 + json.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for (_, a) in arrays {
        match a {
            Array::F64(v) => v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
            Array::U32(v) => v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
        }
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::File::create(&tmp).and_then(|mut f| f.write_all(&buf)).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Reads a cache file into its metadata and named arrays.
pub fn read_file(path: &Path) -> Result<(serde_json::Value, Vec<(String, Array)>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(io)?;
    let bad = |m: &str| Error::InvalidInput(format!("cache file {}: {m}", path.display()));
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(20..20 + hlen).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| bad(&e.to_string()))?;
    let mut pos = 20 + hlen;
    let mut arrays = Vec::with_capacity(header.arrays.len());
    for spec in header.arrays {
        let width = match spec.dtype.as_str() {
            "f64" => 8,
            "u32" => 4,
            other => return Err(bad(&format!("unknown dtype {other}"))),
        };
        let chunk = bytes.get(pos..pos + width * spec.len).ok_or_else(|| bad("truncated data"))?;
        pos += width * spec.len;
        let a = if width == 8 {
            Array::F64(chunk.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
        } else {
            Array::U32(chunk.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
        };
        arrays.push((spec.name, a));
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok((header.meta, arrays))
}

fn take_f64(arrays: &mut Vec<(String, Array)>, name: &str) -> Result<Vec<f64>> {
    let i = arrays.iter().position(|(n, _)| n == name).ok_or_else(|| Error::InvalidInput(format!("cache entry lacks {name}")))?;
    match arrays.swap_remove(i).1 {
        Array::F64(v) => Ok(v),
        Array::U32(_) => Err(Error::InvalidInput(format!("{name} has the wrong type"))),
    }
}

fn take_u32(arrays: &mut Vec<(String, Array)>, name: &str) -> Result<Vec<u32>> {
    let i = arrays.iter().position(|(n, _)| n == name).ok_or_else(|| Error::InvalidInput(format!("cache entry lacks {name}")))?;
    match arrays.swap_remove(i).1 {
        Array::U32(v) => Ok(v),
        Array::F64(_) => Err(Error::InvalidInput(format!("{name} has the wrong type"))),
    }
}

/// Directory-backed cache keyed by content hashes.
#[derive(Debug, Clone)]
pub struct Cache {
    pub dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.bin", content_hash(key)))
    }

    fn grid_key(half_width: f64, cells: usize, model: &CovarianceModel) -> String {
        format!("grid|{}|{half_width:e}|{cells}", serde_json::to_string(model).unwrap_or_default())
    }

    /// Loads the grid from the cache or builds and stores it.
    pub fn grid(&self, half_width: f64, cells: usize, model: &CovarianceModel) -> Result<NoiseGrid> {
        let path = self.path(&Self::grid_key(half_width, cells, model));
        if let Ok((meta, mut arrays)) = read_file(&path) {
            let gram = take_f64(&mut arrays, "gram")?;
            let factor = take_f64(&mut arrays, "factor")?;
            let clamped = meta.get("clamped").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
            if gram.len() == cells * cells && factor.len() == cells * cells {
                return Ok(NoiseGrid::from_parts(
                    half_width,
                    model,
                    DMatrix::from_column_slice(cells, cells, &gram),
                    DMatrix::from_column_slice(cells, cells, &factor),
                    clamped,
                ));
            }
        }
        let grid = NoiseGrid::build(half_width, cells, model)?;
        let meta = serde_json::json!({ "kind": "grid", "half_width": half_width, "cells": cells, "clamped": grid.clamped });
        write_file(
            &path,
            meta,
            &[("gram".into(), Array::F64(grid.gram().as_slice().to_vec())), ("factor".into(), Array::F64(grid.factor().as_slice().to_vec()))],
        )?;
        Ok(grid)
    }

    /// Stores tensors under `key` (e.g. model, grid, t and N_sim).
    pub fn store_tensors(&self, key: &str, tensors: &[SymTensor]) -> Result<()> {
        let mut arrays = Vec::new();
        let mut orders = Vec::new();
        for (i, t) in tensors.iter().enumerate() {
            let (idx, val) = t.raw();
            orders.push(serde_json::json!({ "order": t.order, "dim": t.dim }));
            arrays.push((format!("idx{i}"), Array::U32(idx.to_vec())));
            arrays.push((format!("val{i}"), Array::F64(val.to_vec())));
        }
        write_file(&self.path(key), serde_json::json!({ "kind": "tensors", "key": key, "tensors": orders }), &arrays)
    }

    /// Loads tensors stored under `key`, if present.
    pub fn load_tensors(&self, key: &str) -> Result<Option<Vec<SymTensor>>> {
        let path = self.path(key);
        if !path.exists() {
            return Ok(None);
        }
        let (meta, mut arrays) = read_file(&path)?;
        let specs = meta.get("tensors").and_then(|v| v.as_array()).cloned().unwrap_or_default();
        let mut out = Vec::with_capacity(specs.len());
        for (i, s) in specs.iter().enumerate() {
            let order = s.get("order").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
            let dim = s.get("dim").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
            let idx = take_u32(&mut arrays, &format!("idx{i}"))?;
            let val = take_f64(&mut arrays, &format!("val{i}"))?;
            out.push(SymTensor::from_raw(order, dim, idx, val)?);
        }
        Ok(Some(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bin");
        let arrays = vec![("x".to_string(), Array::F64(vec![1.5, -2.0, f64::MIN_POSITIVE])), ("k".to_string(), Array::U32(vec![7, 0]))];
        write_file(&p, serde_json::json!({"note": "t"}), &arrays).unwrap();
        let (meta, back) = read_file(&p).unwrap();
        assert_eq!(meta["note"], "t");
        assert_eq!(back, arrays);
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], b"HAMCACHE");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.bin");
        std::fs::write(&p, b"NOTACACHEFILE.........").unwrap();
        assert!(read_file(&p).is_err());
        write_file(&p, serde_json::json!({}), &[("x".into(), Array::F64(vec![1.0]))]).unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.pop();
        std::fs::write(&p, bytes).unwrap();
        assert!(read_file(&p).is_err());
    }

    #[test]
    fn grid_and_tensors_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let m = CovarianceModel::riesz(0.5, 1).unwrap();
        let a = cache.grid(2.0, 8, &m).unwrap();
        let b = cache.grid(2.0, 8, &m).unwrap();
        assert_eq!(a.gram(), b.gram());
        assert_eq!(a.factor(), b.factor());
        let t = SymTensor::symmetrize(2, 8, [(vec![1, 3], 2.0), (vec![2, 2], -1.0)]);
        cache.store_tensors("k", &[t.clone(), SymTensor::scalar(3.0, 8)]).unwrap();
        let back = cache.load_tensors("k").unwrap().unwrap();
        assert_eq!(back, vec![t, SymTensor::scalar(3.0, 8)]);
        assert!(cache.load_tensors("missing").unwrap().is_none());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(content_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}

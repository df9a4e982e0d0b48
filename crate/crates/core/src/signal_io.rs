//! Reading and writing signals and support sidecars.
//!
//! The binary format is little-endian: the magic `SOFT1`, `u32 d`, `u32 n`,
//! `u64 N`, then `N` interleaved `f64` pairs `(re, im)` in flat order. A JSON
//! form `{"d":..,"n":..,"values":[[re,im],..]}` is accepted for grids of at
//! most [`JSON_MAX_LEN`] points.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridDims, Signal};

pub const MAGIC: &[u8; 5] = b"SOFT1";
pub const JSON_MAX_LEN: usize = 4096;
const HEADER_LEN: usize = 5 + 4 + 4 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalFormat {
    #[default]
    Binary,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonSignal {
    d: usize,
    n: usize,
    values: Vec<[f64; 2]>,
}

pub fn encode_binary(signal: &Signal) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * signal.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(signal.dims.d() as u32).to_le_bytes());
    out.extend_from_slice(&(signal.dims.n() as u32).to_le_bytes());
    out.extend_from_slice(&(signal.values.len() as u64).to_le_bytes());
    for v in &signal.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().expect("4 bytes"))
}

pub fn decode_binary(bytes: &[u8], path: &Path) -> Result<Signal> {
    if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
        return Err(Error::format(path, "missing SOFT1 header"));
    }
    let d = le_u32(&bytes[5..9]) as usize;
    let n = le_u32(&bytes[9..13]) as usize;
    let len = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes"));
    let dims = GridDims::new(d, n).map_err(|e| Error::format(path, e.to_string()))?;
    if len != dims.len() as u64 {
        return Err(Error::format(path, format!("header says N={len} but {n}^{d} = {}", dims.len())));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * dims.len() {
        return Err(Error::format(
            path,
            format!("expected {} payload bytes, found {}", 16 * dims.len(), body.len()),
        ));
    }
    let values = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Signal::new(dims, values, Domain::Time)
}

pub fn encode_json(signal: &Signal) -> Result<String> {
    if signal.values.len() > JSON_MAX_LEN {
        return Err(Error::param(format!(
            "JSON output is limited to {JSON_MAX_LEN} points, signal has {}",
            signal.values.len()
        )));
    }
    let doc = JsonSignal {
        d: signal.dims.d(),
        n: signal.dims.n(),
        values: signal.values.iter().map(|v| [v.re, v.im]).collect(),
    };
    Ok(serde_json::to_string(&doc).expect("plain data serializes"))
}

pub fn decode_json(text: &str, path: &Path) -> Result<Signal> {
    let doc: JsonSignal = serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    let dims = GridDims::new(doc.d, doc.n).map_err(|e| Error::format(path, e.to_string()))?;
    if dims.len() > JSON_MAX_LEN {
        return Err(Error::format(path, format!("JSON signals are limited to {JSON_MAX_LEN} points")));
    }
    let values = doc.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    Signal::new(dims, values, Domain::Time).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_signal(signal: &Signal, path: &Path, format: SignalFormat) -> Result<()> {
    let bytes = match format {
        SignalFormat::Binary => encode_binary(signal),
        SignalFormat::Json => encode_json(signal)?.into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads either format, telling them apart by the magic bytes.
pub fn read_signal(path: &Path) -> Result<Signal> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        return decode_binary(&bytes, path);
    }
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::format(path, "neither SOFT1 nor UTF-8 JSON"))?;
    decode_json(text, path)
}

/// Ground truth written next to a generated signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportFile {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub model: String,
    pub seed: u64,
    /// Flat indices of the nonzero entries, ascending.
    pub support: Vec<usize>,
}

pub fn write_support(support: &SupportFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(support).expect("plain data serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_support(path: &Path) -> Result<SupportFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// `signal.bin` -> `signal.bin.support.json`.
pub fn support_path(signal_path: &Path) -> std::path::PathBuf {
    let mut name = signal_path.as_os_str().to_owned();
    name.push(".support.json");
    name.into()
}

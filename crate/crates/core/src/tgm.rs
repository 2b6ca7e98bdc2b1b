//! `TGM1` binary matrix files.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `b"TGM1"`               |
//! | 4      | 1    | dtype code, `1` = f32         |
//! | 5      | 3    | reserved, zero                |
//! | 8      | 4    | rows (u32)                    |
//! | 12     | 4    | cols (u32)                    |
//! | 16     | 4·rows·cols | f32 values, row-major  |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub const MAGIC: &[u8; 4] = b"TGM1";
pub const DTYPE_F32: u8 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encode(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * m.data().len());
    out.extend_from_slice(MAGIC);
    out.push(DTYPE_F32);
    out.extend_from_slice(&[0, 0, 0]);
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::invalid("TGM1 file shorter than its header"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::invalid("missing TGM1 magic"));
    }
    if bytes[4] != DTYPE_F32 {
        return Err(Error::invalid(format!(
            "unsupported TGM1 dtype code {}",
            bytes[4]
        )));
    }
    if bytes[5..8] != [0, 0, 0] {
        return Err(Error::invalid("TGM1 reserved bytes are not zero"));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::invalid("TGM1 dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::invalid(format!(
            "TGM1 payload is {} bytes, expected {} for {rows}x{cols}",
            bytes.len(),
            expected
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::new(rows, cols, data)
}

pub fn write(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    fs::write(path, encode(m))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    decode(&fs::read(path)?)
}

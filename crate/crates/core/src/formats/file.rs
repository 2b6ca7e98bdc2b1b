//! `CTO1` on-disk form of a [`CtoEncoding`] and its JSON geometry sidecar.
//!
//! All integers are little-endian `u32` unless noted.
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"CTO1"`                         |
//! | 4      | 1    | format version, `1`                     |
//! | 5      | 1    | payload dtype, `1` = f32                |
//! | 6      | 2    | reserved, zero                          |
//! | 8      | 4    | K (rows of the unpruned weights)        |
//! | 12     | 4    | N (columns of the unpruned weights)     |
//! | 16     | 4    | G (tile width)                          |
//! | 20     | 4    | T (activation rows per block)           |
//! | 24     | 4    | tile count `P`                          |
//! | 28     | 4    | `R`, longest row-offset list            |
//! | 32     | 4    | `C`, longest column-offset list         |
//! | 36     | 4    | reserved, zero                          |
//!
//! The 40-byte header is followed by `row_counts[P]`, `col_counts[P]`,
//! the `P x R` row-offset matrix, the `P x C` column-offset matrix (both
//! row-major, zero padded) and finally the transposed tile payloads as f32,
//! `sum(row_counts[i] * col_counts[i])` values. No trailing bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cto::{indices_from_offsets, CtoEncoding};
use crate::error::{Error, Result};
use crate::matrix::TileConfig;

pub const CTO_MAGIC: &[u8; 4] = b"CTO1";
pub const CTO_HEADER_LEN: usize = 40;
const VERSION: u8 = 1;
const DTYPE_F32: u8 = 1;

fn put(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

pub fn to_bytes(c: &CtoEncoding) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        CTO_HEADER_LEN
            + 4 * (2 * c.tile_count()
                + c.row_offsets.len()
                + c.col_offsets.len()
                + c.payload.len()),
    );
    out.extend_from_slice(CTO_MAGIC);
    out.extend_from_slice(&[VERSION, DTYPE_F32, 0, 0]);
    put(&mut out, c.original_dims.0);
    put(&mut out, c.original_dims.1);
    put(&mut out, c.config.granularity_g);
    put(&mut out, c.config.input_tile_t);
    put(&mut out, c.tile_count());
    put(&mut out, c.max_rows);
    put(&mut out, c.max_cols);
    put(&mut out, 0);
    for v in c
        .row_counts
        .iter()
        .chain(&c.col_counts)
        .chain(&c.row_offsets)
        .chain(&c.col_offsets)
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &c.payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::corrupt("CTO1 file is truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>> {
        let len = n
            .checked_mul(4)
            .ok_or_else(|| Error::corrupt("CTO1 array length overflows"))?;
        Ok(self
            .take(len)?
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<CtoEncoding> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CTO_MAGIC {
        return Err(Error::corrupt("missing CTO1 magic"));
    }
    let head = r.take(4)?;
    if head[0] != VERSION || head[1] != DTYPE_F32 || head[2] != 0 || head[3] != 0 {
        return Err(Error::corrupt(
            "unsupported CTO1 version, dtype or reserved bytes",
        ));
    }
    let k = r.u32()? as usize;
    let n = r.u32()? as usize;
    let g = r.u32()? as usize;
    let t = r.u32()? as usize;
    let tiles = r.u32()? as usize;
    let max_rows = r.u32()? as usize;
    let max_cols = r.u32()? as usize;
    if r.u32()? != 0 {
        return Err(Error::corrupt("CTO1 reserved header word is not zero"));
    }
    let config = TileConfig::new(g, t).map_err(|e| Error::corrupt(e.to_string()))?;
    let row_counts = r.u32s(tiles)?;
    let col_counts = r.u32s(tiles)?;
    let row_offsets = r.u32s(tiles.saturating_mul(max_rows))?;
    let col_offsets = r.u32s(tiles.saturating_mul(max_cols))?;
    let values: usize = row_counts
        .iter()
        .zip(&col_counts)
        .map(|(&a, &b)| a as usize * b as usize)
        .sum();
    let payload = r.u32s(values)?.into_iter().map(f32::from_bits).collect();
    if r.pos != bytes.len() {
        return Err(Error::corrupt("trailing bytes after CTO1 payload"));
    }
    let c = CtoEncoding {
        config,
        original_dims: (k, n),
        row_counts,
        col_counts,
        max_rows,
        max_cols,
        row_offsets,
        col_offsets,
        payload,
    };
    c.validate()?;
    Ok(c)
}

pub fn write_cto(path: impl AsRef<Path>, c: &CtoEncoding) -> Result<()> {
    fs::write(path, to_bytes(c))?;
    Ok(())
}

pub fn read_cto(path: impl AsRef<Path>) -> Result<CtoEncoding> {
    from_bytes(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileGeometry {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Human-readable description of an encoding's tiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtoGeometry {
    pub schema: String,
    pub k: usize,
    pub n: usize,
    pub g: usize,
    pub t: usize,
    pub tile_count: usize,
    pub max_rows: usize,
    pub max_cols: usize,
    pub tiles: Vec<TileGeometry>,
}

pub fn geometry(c: &CtoEncoding) -> CtoGeometry {
    CtoGeometry {
        schema: "cto-geometry-v1".to_string(),
        k: c.original_dims.0,
        n: c.original_dims.1,
        g: c.config.granularity_g,
        t: c.config.input_tile_t,
        tile_count: c.tile_count(),
        max_rows: c.max_rows,
        max_cols: c.max_cols,
        tiles: (0..c.tile_count())
            .map(|i| TileGeometry {
                rows: indices_from_offsets(c.row_offsets_of(i)),
                cols: indices_from_offsets(c.col_offsets_of(i)),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::encode_cto;
    use crate::patterns::prune_tw;
    use crate::scoring::ScoreProvider;
    use crate::synth::gaussian;

    fn sample() -> CtoEncoding {
        let w = gaussian(12, 10, 3).unwrap();
        encode_cto(
            &prune_tw(&w, 0.5, 4, &ScoreProvider::Magnitude)
                .unwrap()
                .tiles,
        )
    }

    #[test]
    fn bytes_round_trip() {
        let c = sample();
        let bytes = to_bytes(&c);
        assert_eq!(&bytes[..4], b"CTO1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 12);
        assert_eq!(from_bytes(&bytes).unwrap(), c);
    }

    #[test]
    fn rejects_truncation_and_trailing() {
        let bytes = to_bytes(&sample());
        assert!(from_bytes(&bytes[..bytes.len() - 2]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(from_bytes(&long).is_err());
        let mut bad = bytes;
        bad[6] = 1;
        assert!(matches!(from_bytes(&bad), Err(Error::CorruptEncoding(_))));
    }

    #[test]
    fn geometry_lists_indices() {
        let c = sample();
        let geo = geometry(&c);
        assert_eq!(geo.tile_count, c.tile_count());
        assert_eq!(geo.tiles[0].rows.len(), c.row_counts[0] as usize);
        let json = serde_json::to_string(&geo).unwrap();
        assert!(json.contains("cto-geometry-v1"));
    }
}

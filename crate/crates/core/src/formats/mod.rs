//! Execution-oriented encodings of tile-wise matrices.

mod cto;
mod file;

pub use cto::{
    decode_cto, encode_cto, indices_from_offsets, offsets_from_indices, CtoEncoding, TileSpan,
    TransposedTile, PAD,
};
pub use file::{
    from_bytes, geometry, read_cto, to_bytes, write_cto, CtoGeometry, TileGeometry, CTO_HEADER_LEN,
    CTO_MAGIC,
};

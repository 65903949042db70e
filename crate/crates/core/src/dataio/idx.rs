//! The IDX container used by the MNIST distribution.
//!
//! Layout (big-endian throughout):
//!
//! ```text
//! images: 0x00000803 | u32 count | u32 rows | u32 cols | count*rows*cols bytes
//! labels: 0x00000801 | u32 count | count bytes, each 0..=9
//! ```

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

const GZIP_PREFIX: [u8; 2] = [0x1F, 0x8B];

/// Unnormalized images, image-major then row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLabels {
    pub count: usize,
    pub labels: Vec<u8>,
}

impl RawImages {
    /// Pixels of image `i`.
    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[i * size..(i + 1) * size]
    }

    pub fn to_idx_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
        for dim in [self.count, self.rows, self.cols] {
            out.extend_from_slice(&(dim as u32).to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

impl RawLabels {
    pub fn to_idx_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.labels.len());
        out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        out.extend_from_slice(&(self.count as u32).to_be_bytes());
        out.extend_from_slice(&self.labels);
        out
    }
}

struct Header<'a> {
    dims: Vec<usize>,
    payload: &'a [u8],
}

fn read_header(bytes: &[u8], magic: u32, n_dims: usize) -> Result<Header<'_>> {
    let header_len = 4 + 4 * n_dims;
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let found = u32::from_be_bytes(bytes[0..4].try_into().unwrap());
    if found != magic {
        return Err(Error::BadMagic {
            expected: magic,
            found,
        });
    }
    if bytes.len() < header_len {
        return Err(Error::Truncated {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let dims = bytes[4..header_len]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().unwrap()) as usize)
        .collect();
    Ok(Header {
        dims,
        payload: &bytes[header_len..],
    })
}

fn check_payload(header_len: usize, payload: &[u8], expected: usize) -> Result<()> {
    if payload.len() != expected {
        return Err(Error::Truncated {
            expected: header_len + expected,
            actual: header_len + payload.len(),
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<RawImages> {
    let Header { dims, payload } = read_header(bytes, IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let expected = count
        .checked_mul(rows)
        .and_then(|n| n.checked_mul(cols))
        .ok_or_else(|| {
            Error::InvalidValue(format!("image dimensions {count}x{rows}x{cols} overflow"))
        })?;
    check_payload(16, payload, expected)?;
    Ok(RawImages {
        count,
        rows,
        cols,
        pixels: payload.to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<RawLabels> {
    let Header { dims, payload } = read_header(bytes, LABELS_MAGIC, 1)?;
    let count = dims[0];
    check_payload(8, payload, count)?;
    if let Some(pos) = payload.iter().position(|&b| b > 9) {
        return Err(Error::InvalidValue(format!(
            "label {} at byte offset {} is outside 0..=9",
            payload[pos],
            8 + pos
        )));
    }
    Ok(RawLabels {
        count,
        labels: payload.to_vec(),
    })
}

/// Inflates gzip input (detected by its `1F 8B` prefix); other input is returned as is.
pub fn maybe_decompress(bytes: Vec<u8>) -> Result<Vec<u8>> {
    if bytes.starts_with(&GZIP_PREFIX) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

/// Reads a file, inflating it first if it is gzip-compressed.
pub fn read_idx_file(path: &Path) -> Result<Vec<u8>> {
    maybe_decompress(std::fs::read(path)?)
}

//! The big-endian IDX tensor format used by the MNIST distribution.

use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

const MAGIC_IMAGES: u32 = 0x0000_0803;
const MAGIC_LABELS: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub enum IdxData {
    /// Images flattened row-major and scaled to `[0, 1]`.
    Images(Matrix),
    Labels(Vec<u8>),
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Parse {
            offset,
            message: "truncated header".into(),
        })
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    let magic = read_u32(bytes, 0)?;
    let expected_dims = match magic {
        MAGIC_IMAGES => 3,
        MAGIC_LABELS => 1,
        _ => {
            return Err(Error::Parse {
                offset: 0,
                message: format!(
                    "unsupported element type/rank in magic {magic:#010x} \
                     (expected 0x00000803 images or 0x00000801 labels)"
                ),
            })
        }
    };
    let mut dims = Vec::with_capacity(expected_dims);
    for i in 0..expected_dims {
        dims.push(read_u32(bytes, 4 + 4 * i)? as usize);
    }
    let header = 4 + 4 * expected_dims;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Parse {
            offset: 4,
            message: "dimension product overflows".into(),
        })?;
    let payload = &bytes[header.min(bytes.len())..];
    if payload.len() < count {
        return Err(Error::Parse {
            offset: bytes.len(),
            message: format!(
                "truncated payload: expected {count} bytes, found {}",
                payload.len()
            ),
        });
    }
    let payload = &payload[..count];
    if expected_dims == 1 {
        return Ok(IdxData::Labels(payload.to_vec()));
    }
    let features = dims[1] * dims[2];
    let data = payload.iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok(IdxData::Images(Matrix::new(dims[0], features, data)?))
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxData> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx(&bytes)
}

/// Serializes raw image bytes (`count` images of `rows x cols`) as IDX.
pub fn encode_idx_images(count: usize, rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), count * rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&MAGIC_IMAGES.to_be_bytes());
    for d in [count, rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&MAGIC_LABELS.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

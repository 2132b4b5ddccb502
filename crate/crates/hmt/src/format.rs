//! `HMAP` heatmap tensor files.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                 |
//! |--------|------|---------------------------------------|
//! | 0      | 4    | magic `b"HMAP"`                       |
//! | 4      | 1    | version, `1`                          |
//! | 5      | 1    | dtype, `0` = f32 LE IEEE-754          |
//! | 6      | 2    | reserved, zero                        |
//! | 8      | 4    | K, heatmap count (u32)                |
//! | 12     | 4    | H, height (u32)                       |
//! | 16     | 4    | W, width (u32)                        |
//! | 20     | 4·K·H·W | payload, joint-major then row-major |
//!
//! Activations are held as `f64` in memory and narrowed to `f32` on write.

use std::fs;
use std::path::Path;

use heatmap_codec::Heatmap;

use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"HMAP";
pub const VERSION: u8 = 1;
pub const DTYPE_F32_LE: u8 = 0;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeatmapFileHeader {
    pub count: u32,
    pub height: u32,
    pub width: u32,
}

impl HeatmapFileHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = DTYPE_F32_LE;
        out[8..12].copy_from_slice(&self.count.to_le_bytes());
        out[12..16].copy_from_slice(&self.height.to_le_bytes());
        out[16..20].copy_from_slice(&self.width.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(Error::format("magic", "file does not start with HMAP"));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::format("length", format!("header truncated at {} bytes", bytes.len())));
        }
        if bytes[4] != VERSION {
            return Err(Error::format("version", format!("unsupported version {}", bytes[4])));
        }
        if bytes[5] != DTYPE_F32_LE {
            return Err(Error::format("dtype", format!("unsupported dtype {}", bytes[5])));
        }
        if bytes[6..8] != [0, 0] {
            return Err(Error::format("reserved", "reserved bytes must be zero"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let header = Self { count: u32_at(8), height: u32_at(12), width: u32_at(16) };
        if header.count == 0 || header.height == 0 || header.width == 0 {
            return Err(Error::format("shape", "K, H and W must all be >= 1"));
        }
        Ok(header)
    }

    /// Payload size in bytes, `None` on overflow.
    pub fn payload_len(&self) -> Option<usize> {
        (self.count as usize)
            .checked_mul(self.height as usize)?
            .checked_mul(self.width as usize)?
            .checked_mul(4)
    }
}

/// Serialises heatmaps into the `HMAP` layout.
pub fn encode_heatmaps(heatmaps: &[Heatmap]) -> Result<Vec<u8>> {
    let first = heatmaps.first().ok_or_else(|| Error::InvalidInput("no heatmaps to write".into()))?;
    let (height, width) = (first.height(), first.width());
    if let Some(i) = heatmaps.iter().position(|h| h.height() != height || h.width() != width) {
        return Err(Error::InvalidInput(format!(
            "heatmap {i} is {}×{}, expected {height}×{width}",
            heatmaps[i].height(),
            heatmaps[i].width()
        )));
    }
    let to_u32 = |n: usize, what: &str| {
        u32::try_from(n).map_err(|_| Error::InvalidInput(format!("{what} {n} exceeds u32")))
    };
    let header = HeatmapFileHeader {
        count: to_u32(heatmaps.len(), "heatmap count")?,
        height: to_u32(height, "height")?,
        width: to_u32(width, "width")?,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + heatmaps.len() * height * width * 4);
    out.extend_from_slice(&header.to_bytes());
    for h in heatmaps {
        for &v in h.values() {
            let narrowed = v as f32;
            if !narrowed.is_finite() {
                return Err(Error::InvalidInput(format!("activation {v} does not fit in f32")));
            }
            out.extend_from_slice(&narrowed.to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses an `HMAP` byte buffer, validating every header field, the exact
/// payload length and finiteness of each value.
pub fn decode_heatmaps(bytes: &[u8]) -> Result<Vec<Heatmap>> {
    let header = HeatmapFileHeader::parse(bytes)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = header.payload_len().ok_or_else(|| Error::format("length", "payload size overflows"))?;
    if payload.len() != expected {
        return Err(Error::format(
            "length",
            format!("payload is {} bytes, header implies {expected}", payload.len()),
        ));
    }
    let (height, width) = (header.height as usize, header.width as usize);
    if height < 3 || width < 3 {
        return Err(Error::format("shape", format!("heatmaps must be at least 3×3, got {height}×{width}")));
    }
    let per_map = height * width * 4;
    payload
        .chunks_exact(per_map)
        .enumerate()
        .map(|(k, chunk)| {
            let mut values = Vec::with_capacity(height * width);
            for (i, b) in chunk.chunks_exact(4).enumerate() {
                let v = f32::from_le_bytes(b.try_into().unwrap());
                if !v.is_finite() {
                    return Err(Error::format(
                        "nan",
                        format!("non-finite value in heatmap {k} at ({}, {})", i % width, i / width),
                    ));
                }
                values.push(v as f64);
            }
            Ok(Heatmap::new(height, width, values)?)
        })
        .collect()
}

pub fn write_heatmaps(path: impl AsRef<Path>, heatmaps: &[Heatmap]) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_heatmaps(heatmaps)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_heatmaps(path: impl AsRef<Path>) -> Result<Vec<Heatmap>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_heatmaps(&bytes)
}

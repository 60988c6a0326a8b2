//! Binary netpbm: P5 (gray) and P6 (RGB), 8 or 16 bits per sample.

use std::path::Path;

use super::ImageGrid;
use crate::error::{Error, Result};

pub(super) fn decode_pnm(bytes: &[u8], id: String) -> Result<ImageGrid> {
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(Error::format("not a binary PGM/PPM")),
    };
    let mut cursor = Header { bytes, pos: 2 };
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::format("pnm: malformed header")),
    }
    if width == 0 || height == 0 {
        return Err(Error::format("zero-dimension image"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(format!("pnm: unsupported maxval {maxval}")));
    }
    let samples = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::format("pnm: dimensions overflow"))?;
    let raster = &bytes[cursor.pos..];
    let scale = maxval as f64;
    let data: Vec<f64> = if maxval < 256 {
        let raster = raster
            .get(..samples)
            .ok_or_else(|| Error::format("pnm: truncated raster"))?;
        raster
            .iter()
            .map(|&v| (f64::from(v) / scale).min(1.0))
            .collect()
    } else {
        let raster = raster
            .get(..samples * 2)
            .ok_or_else(|| Error::format("pnm: truncated raster"))?;
        raster
            .chunks_exact(2)
            .map(|b| (f64::from(u16::from_be_bytes([b[0], b[1]])) / scale).min(1.0))
            .collect()
    };
    ImageGrid::new(id, width, height, channels, data)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn number(&mut self) -> Result<usize> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b'#') => {
                    while !matches!(self.bytes.get(self.pos), Some(b'\n') | None) {
                        self.pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
                None => return Err(Error::format("pnm: truncated header")),
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("pnm: malformed header"))
    }
}

/// 8-bit P5 for grayscale, P6 for color. Intensities are rounded to the nearest code.
pub fn encode_pnm(img: &ImageGrid) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.as_slice().iter().map(|&v| (v * 255.0).round() as u8));
    out
}

pub fn write_pnm(img: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pnm(img)).map_err(|e| Error::io(path, e))
}

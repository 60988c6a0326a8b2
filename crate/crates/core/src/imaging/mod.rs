//! Image rasters and the preprocessing that puts a series on a common footing:
//! decoding, resampling to a shared size, contrast matching and luminance
//! conversion.

mod pnm;

use std::path::Path;

use crate::error::{Error, Result};

pub use pnm::{encode_pnm, write_pnm};

/// ITU-R BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

const FLAT_STD: f64 = 1e-9;

/// A row-major raster with 1 or 3 intensity channels in `[0, 1]`.
///
/// Pixels are stored interleaved: pixel `i` occupies
/// `data[i * channels..(i + 1) * channels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub id: String,
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(
        id: impl Into<String>,
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::contract(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::contract(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::contract("image dimensions overflow"))?;
        if data.len() != expected {
            return Err(Error::contract(format!(
                "pixel buffer has {} values, expected {expected}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::contract(format!("intensity {bad} outside [0, 1]")));
        }
        Ok(Self {
            id: id.into(),
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an image from one pixel vector per position.
    pub fn from_pixels(
        id: impl Into<String>,
        width: usize,
        height: usize,
        pixels: &[&[f64]],
    ) -> Result<Self> {
        let channels = pixels.first().map_or(1, |p| p.len());
        if pixels.iter().any(|p| p.len() != channels) {
            return Err(Error::contract("pixels have differing channel counts"));
        }
        let data = pixels.iter().flat_map(|p| p.iter().copied()).collect();
        Self::new(id, width, height, channels, data)
    }

    pub fn filled(
        id: impl Into<String>,
        width: usize,
        height: usize,
        value: &[f64],
    ) -> Result<Self> {
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width.saturating_mul(height).saturating_mul(value.len()))
            .collect();
        Self::new(id, width, height, value.len(), data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Interleaved intensities, `len() * channels()` values.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, index: usize) -> &[f64] {
        &self.data[index * self.channels..(index + 1) * self.channels]
    }

    pub fn pixels(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.channels)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

/// Decodes PNG (8/16-bit gray, gray+alpha, RGB, RGBA), binary PGM (P5) or binary PPM (P6).
///
/// The format is detected from the file signature. Intensities are divided by
/// the maximum code value; alpha is dropped. The image id is the file stem.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode(&bytes, id)
}

/// Decodes an in-memory PNG, PGM or PPM file.
pub fn decode(bytes: &[u8], id: impl Into<String>) -> Result<ImageGrid> {
    let id = id.into();
    if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes, id)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        pnm::decode_pnm(bytes, id)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(Error::format(format!(
            "unsupported netpbm variant P{}; only binary P5/P6 are read",
            bytes[1] as char
        )))
    } else {
        Err(Error::format(
            "unrecognized image format (expected PNG, PGM or PPM)",
        ))
    }
}

fn decode_png(bytes: &[u8], id: String) -> Result<ImageGrid> {
    use image::DynamicImage as D;

    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(format!("png: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::format("zero-dimension image"));
    }
    let (channels, data): (usize, Vec<f64>) = match img {
        D::ImageLuma8(b) => (1, scale_u8(b.as_raw())),
        D::ImageLumaA8(b) => (1, scale_u8(&drop_alpha(b.as_raw(), 1))),
        D::ImageRgb8(b) => (3, scale_u8(b.as_raw())),
        D::ImageRgba8(b) => (3, scale_u8(&drop_alpha(b.as_raw(), 3))),
        D::ImageLuma16(b) => (1, scale_u16(b.as_raw())),
        D::ImageLumaA16(b) => (1, scale_u16(&drop_alpha(b.as_raw(), 1))),
        D::ImageRgb16(b) => (3, scale_u16(b.as_raw())),
        D::ImageRgba16(b) => (3, scale_u16(&drop_alpha(b.as_raw(), 3))),
        other => {
            return Err(Error::format(format!(
                "unsupported png sample layout {:?}",
                other.color()
            )))
        }
    };
    ImageGrid::new(id, w, h, channels, data)
}

fn drop_alpha<T: Copy>(raw: &[T], color: usize) -> Vec<T> {
    raw.chunks_exact(color + 1)
        .flat_map(|px| px[..color].iter().copied())
        .collect()
}

fn scale_u8(raw: &[u8]) -> Vec<f64> {
    raw.iter().map(|&v| f64::from(v) / 255.0).collect()
}

fn scale_u16(raw: &[u16]) -> Vec<f64> {
    raw.iter().map(|&v| f64::from(v) / 65535.0).collect()
}

/// Luminance with BT.601 weights. Single-channel input is returned unchanged.
pub fn to_grayscale(img: &ImageGrid) -> ImageGrid {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .pixels()
        .map(|p| {
            let y = LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2];
            y.clamp(0.0, 1.0)
        })
        .collect();
    ImageGrid {
        id: img.id.clone(),
        width: img.width,
        height: img.height,
        channels: 1,
        data,
    }
}

/// Bilinear resampling with pixel-center alignment.
///
/// Output pixel `(x, y)` samples source coordinate
/// `((x + 0.5) * src_w / dst_w - 0.5, (y + 0.5) * src_h / dst_h - 0.5)`,
/// clamped to the source extent.
pub fn resize(img: &ImageGrid, target_w: usize, target_h: usize) -> Result<ImageGrid> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::contract(format!(
            "resize target must be positive, got {target_w}x{target_h}"
        )));
    }
    if target_w == img.width && target_h == img.height {
        return Ok(img.clone());
    }
    let c = img.channels;
    let xs = sample_axis(img.width, target_w);
    let ys = sample_axis(img.height, target_h);
    let mut data = Vec::with_capacity(target_w * target_h * c);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for ch in 0..c {
                let at = |x: usize, y: usize| img.data[(y * img.width + x) * c + ch];
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                data.push((top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0));
            }
        }
    }
    Ok(ImageGrid {
        id: img.id.clone(),
        width: target_w,
        height: target_h,
        channels: c,
        data,
    })
}

/// For each output coordinate: the two source neighbours and the weight of the second.
fn sample_axis(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    let last = (src - 1) as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = s.floor();
            let i0 = lo as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - lo)
        })
        .collect()
}

/// Per-channel affine map so the output's mean and standard deviation equal the reference's.
///
/// A channel whose standard deviation is below `1e-9` is only shifted. Results are
/// clamped to `[0, 1]`.
pub fn match_contrast(img: &ImageGrid, reference: &ImageGrid) -> Result<ImageGrid> {
    if img.channels != reference.channels {
        return Err(Error::contract(format!(
            "contrast reference has {} channels, image {} has {}",
            reference.channels, img.id, img.channels
        )));
    }
    let c = img.channels;
    let maps: Vec<(f64, f64)> = (0..c)
        .map(|ch| {
            let (m, s) = channel_moments(img, ch);
            let (rm, rs) = channel_moments(reference, ch);
            let gain = if s < FLAT_STD { 1.0 } else { rs / s };
            (gain, rm - gain * m)
        })
        .collect();
    let data = img
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (a, b) = maps[i % c];
            (a * v + b).clamp(0.0, 1.0)
        })
        .collect();
    Ok(ImageGrid {
        data,
        ..img.clone()
    })
}

/// Mean and population standard deviation of one channel.
pub fn channel_moments(img: &ImageGrid, ch: usize) -> (f64, f64) {
    let n = img.len() as f64;
    let values = || img.data.iter().skip(ch).step_by(img.channels);
    let mean = values().sum::<f64>() / n;
    let var = values().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

//! Synthetic image series with a known fraction of "altered" pixels per image.
//!
//! Each image starts as healthy base tissue. An exact number of pixels is
//! replaced by the altered value, then every component gets bounded uniform
//! jitter. Because the jitter is small compared with the base/altered
//! separation, nearest-value classification recovers the planted set exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{write_pnm, ImageGrid};
use crate::rng::SplitMix64;

pub const MANIFEST_FORMAT: &str = "somqe-synth-manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// Required ratio between the base/altered distance and the jitter amplitude.
pub const SEPARABILITY_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthMode {
    Grayscale,
    BlueYellow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Altered pixels chosen uniformly without replacement.
    #[default]
    Scattered,
    /// Altered pixels grown as filled discs around random centers.
    Blobs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub mode: SynthMode,
    pub base_value: Vec<f64>,
    pub altered_value: Vec<f64>,
    pub fractions: Vec<f64>,
    pub texture_noise: f64,
    pub placement: Placement,
    pub seed: u64,
}

/// 17 fractions from 0.0 to 0.4 in steps of 0.025.
pub fn default_fractions() -> Vec<f64> {
    (0..17).map(|k| k as f64 * 0.025).collect()
}

impl SynthSpec {
    pub fn new(mode: SynthMode) -> Self {
        let (base_value, altered_value) = match mode {
            SynthMode::Grayscale => (vec![0.35], vec![0.85]),
            SynthMode::BlueYellow => (vec![0.10, 0.20, 0.75], vec![0.95, 0.85, 0.10]),
        };
        Self {
            width: 512,
            height: 512,
            mode,
            base_value,
            altered_value,
            fractions: default_fractions(),
            texture_noise: 0.02,
            placement: Placement::Scattered,
            seed: 42,
        }
    }

    pub fn grayscale() -> Self {
        Self::new(SynthMode::Grayscale)
    }

    pub fn blue_yellow() -> Self {
        Self::new(SynthMode::BlueYellow)
    }

    pub fn channels(&self) -> usize {
        match self.mode {
            SynthMode::Grayscale => 1,
            SynthMode::BlueYellow => 3,
        }
    }

    /// Number of altered pixels planted for `fraction`.
    pub fn planted_count(&self, fraction: f64) -> usize {
        (fraction * (self.width * self.height) as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::contract(
                "synthetic image dimensions must be positive",
            ));
        }
        let c = self.channels();
        for (name, v) in [("base", &self.base_value), ("altered", &self.altered_value)] {
            if v.len() != c {
                return Err(Error::contract(format!(
                    "{name} value has {} components, mode needs {c}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::contract(format!("{name} value outside [0, 1]")));
            }
        }
        if !(self.texture_noise >= 0.0 && self.texture_noise.is_finite()) {
            return Err(Error::contract(
                "texture noise must be finite and non-negative",
            ));
        }
        let separation = distance(&self.base_value, &self.altered_value);
        if separation <= SEPARABILITY_RATIO * self.texture_noise {
            return Err(Error::contract(format!(
                "base/altered distance {separation} must exceed {SEPARABILITY_RATIO} x noise {}",
                self.texture_noise
            )));
        }
        if self.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::contract("fractions must lie in [0, 1]"));
        }
        if self.fractions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("fractions must be strictly increasing"));
        }
        Ok(())
    }

    /// Image ids, `synth_f0.250` style; more digits if three do not keep them distinct.
    pub fn image_ids(&self) -> Vec<String> {
        let ids = |digits: usize| -> Vec<String> {
            self.fractions
                .iter()
                .map(|f| format!("synth_f{f:.digits$}"))
                .collect()
        };
        let short = ids(3);
        if short.windows(2).all(|w| w[0] != w[1]) {
            short
        } else {
            ids(9)
        }
    }
}

/// One image per fraction, in the order of `spec.fractions`.
///
/// Image `k` draws from its own generator substream derived from `(seed, k)`.
pub fn generate_series(spec: &SynthSpec) -> Result<Vec<ImageGrid>> {
    spec.validate()?;
    use rayon::prelude::*;
    spec.image_ids()
        .into_par_iter()
        .zip(spec.fractions.par_iter())
        .enumerate()
        .map(|(k, (id, &f))| generate_one(spec, k, f, id))
        .collect()
}

fn generate_one(spec: &SynthSpec, index: usize, fraction: f64, id: String) -> Result<ImageGrid> {
    let mut rng = SplitMix64::substream(spec.seed, index as u64);
    let n = spec.width * spec.height;
    let target = spec.planted_count(fraction).min(n);
    let altered = match spec.placement {
        Placement::Scattered => scattered(n, target, &mut rng),
        Placement::Blobs => blobs(spec.width, spec.height, target, &mut rng),
    };
    let c = spec.channels();
    let noise = spec.texture_noise;
    let mut data = Vec::with_capacity(n * c);
    for &is_altered in &altered {
        let value = if is_altered {
            &spec.altered_value
        } else {
            &spec.base_value
        };
        for &v in value {
            let jitter = if noise > 0.0 {
                (2.0 * rng.next_f64() - 1.0) * noise
            } else {
                0.0
            };
            data.push((v + jitter).clamp(0.0, 1.0));
        }
    }
    ImageGrid::new(id, spec.width, spec.height, c, data)
}

/// Partial Fisher-Yates: the first `target` entries of a shuffled index list.
fn scattered(n: usize, target: usize, rng: &mut SplitMix64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut mask = vec![false; n];
    for i in 0..target {
        let j = i + rng.next_index(n - i);
        order.swap(i, j);
        mask[order[i]] = true;
    }
    mask
}

/// Discs of random radius around random centers, filled in scan order until
/// exactly `target` pixels are set. A center that is already altered moves to
/// the next unaltered pixel in scan order, so every disc adds at least one pixel.
fn blobs(width: usize, height: usize, target: usize, rng: &mut SplitMix64) -> Vec<bool> {
    let n = width * height;
    let mut mask = vec![false; n];
    let mut count = 0;
    let max_radius = (width.min(height) / 20).max(1);
    while count < target {
        let mut center = rng.next_index(n);
        while mask[center] {
            center = (center + 1) % n;
        }
        let r = 1 + rng.next_index(max_radius) as isize;
        let (cx, cy) = ((center % width) as isize, (center / width) as isize);
        'disc: for y in (cy - r).max(0)..=(cy + r).min(height as isize - 1) {
            for x in (cx - r).max(0)..=(cx + r).min(width as isize - 1) {
                let (dx, dy) = (x - cx, y - cy);
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let i = y as usize * width + x as usize;
                if !mask[i] {
                    mask[i] = true;
                    count += 1;
                    if count == target {
                        break 'disc;
                    }
                }
            }
        }
    }
    mask
}

/// Fraction of pixels strictly nearer to the altered value than to the base value.
pub fn oracle_fraction(img: &ImageGrid, spec: &SynthSpec) -> Result<f64> {
    if img.width() != spec.width || img.height() != spec.height || img.channels() != spec.channels()
    {
        return Err(Error::contract(format!(
            "image {} is {}x{}x{}, spec describes {}x{}x{}",
            img.id,
            img.width(),
            img.height(),
            img.channels(),
            spec.width,
            spec.height,
            spec.channels()
        )));
    }
    let altered = img
        .pixels()
        .filter(|p| distance(p, &spec.altered_value) < distance(p, &spec.base_value))
        .count();
    Ok(altered as f64 / img.len() as f64)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub image_id: String,
    pub fraction: f64,
    pub planted_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub spec: SynthSpec,
    pub images: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Generates the series and writes it to `dir` as 8-bit PGM/PPM files plus `manifest.json`.
pub fn write_series(spec: &SynthSpec, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = if spec.channels() == 1 { "pgm" } else { "ppm" };
    let mut images = Vec::new();
    for (img, &f) in generate_series(spec)?.iter().zip(&spec.fractions) {
        let file = format!("{}.{ext}", img.id);
        write_pnm(img, dir.join(&file))?;
        images.push(ManifestEntry {
            file,
            image_id: img.id.clone(),
            fraction: f,
            planted_count: spec.planted_count(f),
        });
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_owned(),
        version: MANIFEST_VERSION,
        spec: spec.clone(),
        images,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

//! The self-organizing map: a fixed lattice of weight vectors, trained online
//! on the pixels of one image and used to measure how well it quantizes others.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageGrid;
use crate::rng::SplitMix64;

/// Pixels per work unit in [`SomLattice::quantization_error`]. Partial sums are
/// formed per chunk and combined in chunk order, so the result does not depend
/// on how many threads ran.
pub const QE_CHUNK_PIXELS: usize = 4096;

pub const LATTICE_FORMAT: &str = "somqe-lattice";
pub const LATTICE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Each weight copies a pixel drawn uniformly, with replacement, from the training image.
    SamplePixels,
    /// Each weight component is uniform on `[0, 1)`.
    ///
    /// The default: with a constant neighbourhood, training from sampled pixels
    /// tends to pull an already tight codebook together and can end with a
    /// higher error on the training image than it started with.
    #[default]
    UniformRandom,
}

/// Training hyperparameters.
///
/// The learning rate decays linearly from `alpha_start` at step 0 to
/// `alpha_end` at step `iterations - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: u64,
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub radius: usize,
    pub seed: u64,
    pub init_mode: InitMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            alpha_start: 0.5,
            alpha_end: 0.01,
            radius: 1,
            seed: 42,
            init_mode: InitMode::UniformRandom,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha_end.is_finite()
            && self.alpha_start.is_finite()
            && 0.0 < self.alpha_end
            && self.alpha_end <= self.alpha_start
            && self.alpha_start <= 1.0;
        if !ok {
            return Err(Error::contract(format!(
                "learning rate must satisfy 0 < alpha_end <= alpha_start <= 1, got {} -> {}",
                self.alpha_start, self.alpha_end
            )));
        }
        Ok(())
    }

    /// Learning rate at step `t` of `iterations`.
    pub fn alpha(&self, t: u64) -> f64 {
        if self.iterations <= 1 {
            return self.alpha_start;
        }
        let progress = t as f64 / (self.iterations - 1) as f64;
        self.alpha_start + (self.alpha_end - self.alpha_start) * progress
    }

    /// Number of generator outputs consumed by initialization of a lattice this size.
    fn init_draws(&self, neurons: usize, dim: usize) -> u64 {
        match self.init_mode {
            InitMode::SamplePixels => neurons as u64,
            InitMode::UniformRandom => (neurons * dim) as u64,
        }
    }
}

/// A `rows x cols` grid of neurons with constant size and neighborhood radius.
///
/// Neuron `(r, c)` has flat index `r * cols + c`; its weight vector occupies
/// `weights[index * dim..(index + 1) * dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SomLattice {
    rows: usize,
    cols: usize,
    dim: usize,
    radius: usize,
    weights: Vec<f64>,
    pub trained_on: Option<String>,
}

impl SomLattice {
    pub fn new(
        rows: usize,
        cols: usize,
        dim: usize,
        radius: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "lattice must have at least one neuron, got {rows}x{cols}"
            )));
        }
        if dim != 1 && dim != 3 {
            return Err(Error::contract(format!(
                "weight dimension must be 1 or 3, got {dim}"
            )));
        }
        if weights.len() != rows * cols * dim {
            return Err(Error::contract(format!(
                "lattice {rows}x{cols}x{dim} needs {} weight components, got {}",
                rows * cols * dim,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::contract("lattice weights must be finite"));
        }
        Ok(Self {
            rows,
            cols,
            dim,
            radius,
            weights,
            trained_on: None,
        })
    }

    /// Seeds a lattice from `config.seed` according to `config.init_mode`.
    pub fn init(
        rows: usize,
        cols: usize,
        training_image: &ImageGrid,
        config: &TrainConfig,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "lattice must have at least one neuron, got {rows}x{cols}"
            )));
        }
        let dim = training_image.channels();
        let neurons = rows * cols;
        let mut rng = SplitMix64::new(config.seed);
        let weights = match config.init_mode {
            InitMode::SamplePixels => (0..neurons)
                .flat_map(|_| {
                    training_image
                        .pixel(rng.next_index(training_image.len()))
                        .to_vec()
                })
                .collect(),
            InitMode::UniformRandom => (0..neurons * dim).map(|_| rng.next_f64()).collect(),
        };
        Self::new(rows, cols, dim, config.radius, weights)
    }

    /// Initializes and trains in one go.
    pub fn fit(rows: usize, cols: usize, img: &ImageGrid, config: &TrainConfig) -> Result<Self> {
        let mut lattice = Self::init(rows, cols, img, config)?;
        lattice.train(img, config)?;
        Ok(lattice)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn neurons(&self) -> usize {
        self.rows * self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> &[f64] {
        &self.weights[index * self.dim..(index + 1) * self.dim]
    }

    /// Best-matching unit: lowest flat index among the neurons at minimal squared distance.
    pub fn bmu(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::contract(format!(
                "input has {} components, lattice expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(nearest(&self.weights, self.dim, x).0)
    }

    /// Online winner-take-all training.
    ///
    /// Each of the `config.iterations` steps draws one pixel uniformly from `img`,
    /// finds its best-matching unit and pulls every neuron within Chebyshev grid
    /// distance `radius` of it toward the pixel by the current learning rate.
    /// The pixel draws continue the generator stream that [`SomLattice::init`]
    /// started from `config.seed`.
    pub fn train(&mut self, img: &ImageGrid, config: &TrainConfig) -> Result<()> {
        config.validate()?;
        self.check_image(img)?;
        let mut rng = SplitMix64::new(config.seed);
        rng.advance(config.init_draws(self.neurons(), self.dim));
        let n = img.len();
        let dim = self.dim;
        let r = self.radius;
        for t in 0..config.iterations {
            let x = img.pixel(rng.next_index(n));
            let (winner, _) = nearest(&self.weights, dim, x);
            let (br, bc) = (winner / self.cols, winner % self.cols);
            let alpha = config.alpha(t);
            for row in br.saturating_sub(r)..=(br + r).min(self.rows - 1) {
                for col in bc.saturating_sub(r)..=(bc + r).min(self.cols - 1) {
                    let i = row * self.cols + col;
                    let w = &mut self.weights[i * dim..(i + 1) * dim];
                    for (wk, xk) in w.iter_mut().zip(x) {
                        *wk += alpha * (xk - *wk);
                    }
                }
            }
        }
        self.trained_on = Some(img.id.clone());
        Ok(())
    }

    /// Mean Euclidean distance from each pixel to its best-matching weight.
    pub fn quantization_error(&self, img: &ImageGrid) -> Result<f64> {
        self.check_image(img)?;
        let dim = self.dim;
        let partials: Vec<f64> = img
            .as_slice()
            .par_chunks(QE_CHUNK_PIXELS * dim)
            .map(|chunk| {
                chunk
                    .chunks_exact(dim)
                    .map(|x| nearest(&self.weights, dim, x).1.sqrt())
                    .sum::<f64>()
            })
            .collect();
        Ok(partials.iter().sum::<f64>() / img.len() as f64)
    }

    fn check_image(&self, img: &ImageGrid) -> Result<()> {
        if img.channels() != self.dim {
            return Err(Error::contract(format!(
                "image {} has {} channels, lattice expects {}",
                img.id,
                img.channels(),
                self.dim
            )));
        }
        if img.is_empty() {
            return Err(Error::contract(format!("image {} is empty", img.id)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = LatticeDoc {
            format: LATTICE_FORMAT.to_owned(),
            version: LATTICE_VERSION,
            rows: self.rows,
            cols: self.cols,
            dim: self.dim,
            radius: self.radius,
            trained_on: self.trained_on.clone(),
            weights: self
                .weights
                .chunks_exact(self.dim)
                .map(<[f64]>::to_vec)
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LatticeDoc = serde_json::from_str(text)?;
        if doc.format != LATTICE_FORMAT || doc.version != LATTICE_VERSION {
            return Err(Error::format(format!(
                "unsupported lattice document {} v{}",
                doc.format, doc.version
            )));
        }
        if doc.weights.iter().any(|w| w.len() != doc.dim) {
            return Err(Error::format("lattice weight vectors disagree with dim"));
        }
        let weights = doc.weights.into_iter().flatten().collect();
        let mut lattice = Self::new(doc.rows, doc.cols, doc.dim, doc.radius, weights)
            .map_err(|e| Error::format(e.to_string()))?;
        lattice.trained_on = doc.trained_on;
        Ok(lattice)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeDoc {
    format: String,
    version: u32,
    rows: usize,
    cols: usize,
    dim: usize,
    radius: usize,
    trained_on: Option<String>,
    weights: Vec<Vec<f64>>,
}

/// Index and squared distance of the nearest weight; first index wins ties.
#[inline]
fn nearest(weights: &[f64], dim: usize, x: &[f64]) -> (usize, f64) {
    match dim {
        1 => nearest_fixed::<1>(weights, x),
        3 => nearest_fixed::<3>(weights, x),
        _ => unreachable!("lattice dim is 1 or 3"),
    }
}

#[inline(always)]
fn nearest_fixed<const D: usize>(weights: &[f64], x: &[f64]) -> (usize, f64) {
    let x: &[f64; D] = x.try_into().expect("dimension checked by caller");
    let mut best = (0, f64::INFINITY);
    for (i, w) in weights.chunks_exact(D).enumerate() {
        let mut d2 = 0.0;
        for k in 0..D {
            let diff = x[k] - w[k];
            d2 += diff * diff;
        }
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    best
}

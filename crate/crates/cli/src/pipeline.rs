//! The classify pipeline without any filesystem or flag handling, shared by
//! `classify` and `bench`.

use std::time::Instant;

use rayon::prelude::*;
use somqe::classify::{rank, score_series_timed};
use somqe::imaging::{match_contrast, resize, to_grayscale};
use somqe::{ClassificationReport, ImageGrid, SomLattice, TrainConfig};

use crate::args::ColorMode;
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Preprocess {
    pub target: Option<(usize, usize)>,
    pub match_contrast: bool,
    pub color: ColorMode,
}

impl Default for Preprocess {
    fn default() -> Self {
        Self {
            target: None,
            match_contrast: false,
            color: ColorMode::AsIs,
        }
    }
}

/// Resize, then contrast-match against the reference, then optional grayscale.
///
/// A series mixing gray and color images is only accepted under
/// [`ColorMode::ForceGray`]; its color images are converted before contrast matching.
pub fn preprocess(
    images: Vec<ImageGrid>,
    reference: usize,
    opts: &Preprocess,
) -> Result<Vec<ImageGrid>, CliError> {
    let mixed = images
        .iter()
        .any(|img| img.channels() != images[reference].channels());
    if mixed && opts.color == ColorMode::AsIs {
        return Err(CliError::config(
            "series mixes grayscale and color images; pass --color force-gray",
        ));
    }
    let (w, h) = opts
        .target
        .unwrap_or((images[reference].width(), images[reference].height()));
    let mut out: Vec<ImageGrid> = images
        .into_par_iter()
        .map(|img| {
            let img = resize(&img, w, h)?;
            Ok(if mixed { to_grayscale(&img) } else { img })
        })
        .collect::<somqe::Result<_>>()?;
    if opts.match_contrast {
        let reference = out[reference].clone();
        out = out
            .par_iter()
            .map(|img| match_contrast(img, &reference))
            .collect::<somqe::Result<_>>()?;
    }
    if opts.color == ColorMode::ForceGray {
        out = out.par_iter().map(to_grayscale).collect();
    }
    Ok(out)
}

pub struct Classification {
    pub report: ClassificationReport,
    pub lattice: SomLattice,
}

/// Trains on `images[reference]` and ranks every image, the reference included.
pub fn classify(
    images: &[ImageGrid],
    reference: usize,
    rows: usize,
    cols: usize,
    config: &TrainConfig,
) -> Result<Classification, CliError> {
    let reference_img = &images[reference];
    let start = Instant::now();
    let lattice = SomLattice::fit(rows, cols, reference_img, config)?;
    let train_ms = ms_since(start);

    let start = Instant::now();
    let (scores, per_image) = score_series_timed(&lattice, images, &reference_img.id)?;
    let score_ms = ms_since(start);

    let mut report = rank(scores)?;
    report.reference_id = reference_img.id.clone();
    report.lattice_summary = lattice_summary(&lattice, config);
    report.timings.train_ms = train_ms;
    report.timings.score_ms = score_ms;
    report.timings.per_image = per_image;
    Ok(Classification { report, lattice })
}

pub fn lattice_summary(lattice: &SomLattice, config: &TrainConfig) -> String {
    format!(
        "{}x{} dim={} radius={} iterations={} alpha={}->{} seed={} init={:?}",
        lattice.rows(),
        lattice.cols(),
        lattice.dim(),
        lattice.radius(),
        config.iterations,
        config.alpha_start,
        config.alpha_end,
        config.seed,
        config.init_mode
    )
}

pub fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

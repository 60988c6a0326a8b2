//! Rank image series by the quantization error of a small self-organizing map.
//!
//! A lattice is trained on a single reference image with online
//! winner-take-all updates. Every image of the series is then scored by the
//! mean distance of its pixels to their best-matching neurons, and the
//! series is ordered by that score.
//!
//! ```
//! use somqe::{synth::SynthSpec, som::{SomLattice, TrainConfig}, classify};
//!
//! let spec = SynthSpec { width: 32, height: 32, ..SynthSpec::grayscale() };
//! let series = somqe::synth::generate_series(&spec).unwrap();
//! let config = TrainConfig { iterations: 2_000, ..TrainConfig::default() };
//! let lattice = SomLattice::fit(4, 4, &series[0], &config).unwrap();
//! let scores = classify::score_series(&lattice, &series, &series[0].id).unwrap();
//! let report = classify::rank(scores).unwrap();
//! assert_eq!(report.scores[0].image_id, series[0].id);
//! ```

pub mod classify;
pub mod error;
pub mod imaging;
pub mod rng;
pub mod som;
pub mod synth;

pub use classify::{ClassificationReport, Direction, QeScore, ReportFormat, Timings};
pub use error::{Error, Result};
pub use imaging::ImageGrid;
pub use rng::SplitMix64;
pub use som::{InitMode, SomLattice, TrainConfig};
pub use synth::{Placement, SynthMode, SynthSpec};

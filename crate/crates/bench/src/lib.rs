//! Fixtures shared by the criterion benches.

use somqe::synth::{generate_series, SynthSpec};
use somqe::ImageGrid;

/// Synthetic grayscale series of `count` images, `side x side` pixels each.
pub fn gray_series(side: usize, count: usize) -> Vec<ImageGrid> {
    let fractions = (0..count).map(|k| 0.4 * k as f64 / count as f64).collect();
    let spec = SynthSpec {
        width: side,
        height: side,
        fractions,
        ..SynthSpec::grayscale()
    };
    generate_series(&spec).expect("valid bench spec")
}

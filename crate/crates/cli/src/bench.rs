//! Wall-clock timing of the pipeline on a generated corpus.

use std::time::Instant;

use serde::Serialize;
use somqe::classify::score_series;
use somqe::synth::{generate_series, SynthSpec};
use somqe::{ImageGrid, SomLattice, TrainConfig};

use crate::args::BenchArgs;
use crate::commands::{create_dir, write_file};
use crate::error::CliError;
use crate::pipeline::{self, ms_since};

/// Training one image, ms.
pub const TRAIN_BUDGET_MS: f64 = 2_000.0;
/// Scoring the 20-image corpus, ms.
pub const SCORE_BUDGET_MS: f64 = 3_000.0;
/// Train plus classify of a 17-image series, ms.
pub const END_TO_END_BUDGET_MS: f64 = 5_000.0;

#[derive(Debug, Clone, Serialize)]
pub struct Budget {
    pub name: String,
    pub measured_ms: f64,
    pub limit_ms: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub reps: usize,
    pub images_scored: usize,
    pub series_len: usize,
    pub lattice_summary: String,
    pub train_ms: f64,
    pub score_total_ms: f64,
    pub score_per_image_ms: f64,
    pub end_to_end_ms: f64,
    /// Per-image scoring time on an image with twice the pixels, divided by the base per-image time.
    pub doubled_pixels_ratio: f64,
    pub budgets: Vec<Budget>,
}

pub(crate) fn run(args: &BenchArgs) -> Result<(), CliError> {
    let config = args.training.train_config(args.lattice.radius)?;
    let report = measure(args, &config)?;
    create_dir(&args.out)?;
    let json = serde_json::to_vec_pretty(&report).expect("bench report serializes");
    write_file(&args.out.join("bench.json"), &json)?;
    print!("{}", render_table(&report));
    Ok(())
}

fn corpus(
    args: &BenchArgs,
    width: usize,
    height: usize,
    count: usize,
    seed_offset: u64,
) -> Result<Vec<ImageGrid>, CliError> {
    let spec = SynthSpec {
        width,
        height,
        fractions: (0..count)
            .map(|k| 0.4 * k as f64 / count.max(2).saturating_sub(1) as f64)
            .collect(),
        seed: args.training.seed.wrapping_add(seed_offset),
        ..SynthSpec::new(args.mode.into())
    };
    Ok(generate_series(&spec)?)
}

pub fn measure(args: &BenchArgs, config: &TrainConfig) -> Result<BenchReport, CliError> {
    let (w, h) = (args.width as usize, args.height as usize);
    let (rows, cols) = (args.lattice.rows as usize, args.lattice.cols as usize);
    let count = args.images as usize;
    let series_len = args.series as usize;
    let images = corpus(args, w, h, count.max(series_len), 0)?;
    let scoring = &images[..count];
    let series = &images[..series_len];

    // Same pixel statistics, twice the pixel count.
    let doubled = corpus(args, w * 2, h, 2, 1)?;

    let mut train = Vec::new();
    let mut score = Vec::new();
    let mut end_to_end = Vec::new();
    let mut per_image_base = Vec::new();
    let mut per_image_doubled = Vec::new();
    let mut summary = String::new();
    for _ in 0..args.reps {
        let start = Instant::now();
        let lattice = SomLattice::fit(rows, cols, &scoring[0], config)?;
        train.push(ms_since(start));

        let start = Instant::now();
        let scores = score_series(&lattice, scoring, &scoring[0].id)?;
        score.push(ms_since(start));
        debug_assert_eq!(scores.len(), count);

        let start = Instant::now();
        let result = pipeline::classify(series, 0, rows, cols, config)?;
        end_to_end.push(ms_since(start));
        summary = result.report.lattice_summary;

        let start = Instant::now();
        lattice.quantization_error(&scoring[count - 1])?;
        per_image_base.push(ms_since(start));
        let start = Instant::now();
        lattice.quantization_error(&doubled[1])?;
        per_image_doubled.push(ms_since(start));
    }

    let train_ms = median(&mut train);
    let score_total_ms = median(&mut score);
    let end_to_end_ms = median(&mut end_to_end);
    let budgets = vec![
        budget("train one image", train_ms, TRAIN_BUDGET_MS),
        budget(
            &format!("score {count} images"),
            score_total_ms,
            SCORE_BUDGET_MS,
        ),
        budget(
            &format!("train + classify {series_len} images"),
            end_to_end_ms,
            END_TO_END_BUDGET_MS,
        ),
    ];
    Ok(BenchReport {
        width: w,
        height: h,
        channels: scoring[0].channels(),
        reps: args.reps as usize,
        images_scored: count,
        series_len,
        lattice_summary: summary,
        train_ms,
        score_total_ms,
        score_per_image_ms: score_total_ms / count as f64,
        end_to_end_ms,
        doubled_pixels_ratio: median(&mut per_image_doubled) / median(&mut per_image_base),
        budgets,
    })
}

fn budget(name: &str, measured_ms: f64, limit_ms: f64) -> Budget {
    Budget {
        name: name.to_owned(),
        measured_ms,
        limit_ms,
        pass: measured_ms <= limit_ms,
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn render_table(r: &BenchReport) -> String {
    let mut out = format!(
        "corpus {}x{}x{}, median of {} reps, lattice {}\n",
        r.width, r.height, r.channels, r.reps, r.lattice_summary
    );
    out += &format!("{:<32} {:>12}\n", "measurement", "ms");
    out += &format!("{:<32} {:>12.2}\n", "train", r.train_ms);
    out += &format!(
        "{:<32} {:>12.2}\n",
        format!("score total ({})", r.images_scored),
        r.score_total_ms
    );
    out += &format!("{:<32} {:>12.3}\n", "score per image", r.score_per_image_ms);
    out += &format!(
        "{:<32} {:>12.2}\n",
        format!("train + classify ({})", r.series_len),
        r.end_to_end_ms
    );
    out += &format!(
        "{:<32} {:>12.2}\n",
        "2x pixels / 1x per-image time", r.doubled_pixels_ratio
    );
    out += &format!(
        "\n{:<32} {:>12} {:>12} {:>6}\n",
        "budget", "measured", "limit", ""
    );
    for b in &r.budgets {
        out += &format!(
            "{:<32} {:>12.2} {:>12.0} {:>6}\n",
            b.name,
            b.measured_ms,
            b.limit_ms,
            if b.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}

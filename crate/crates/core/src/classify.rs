//! Scoring an image series against a trained lattice and ordering it by
//! quantization error.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageGrid;
use crate::som::SomLattice;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Scores within this absolute distance of the reference count as unchanged.
pub const DIRECTION_TOLERANCE: f64 = 1e-12;

pub const CSV_HEADER: &str = "rank,image_id,qe,direction";

/// Sign of an image's QE relative to the reference image's QE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Direction {
    Lower,
    Unchanged,
    Higher,
}

impl Direction {
    pub fn between(qe: f64, reference_qe: f64) -> Self {
        let delta = qe - reference_qe;
        if delta.abs() <= DIRECTION_TOLERANCE {
            Direction::Unchanged
        } else if delta > 0.0 {
            Direction::Higher
        } else {
            Direction::Lower
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Direction::Lower => -1,
            Direction::Unchanged => 0,
            Direction::Higher => 1,
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        d.as_i8()
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            -1 => Ok(Direction::Lower),
            0 => Ok(Direction::Unchanged),
            1 => Ok(Direction::Higher),
            other => Err(format!("direction must be -1, 0 or 1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeScore {
    pub image_id: String,
    pub qe: f64,
    pub direction: Direction,
    /// 1-based position in the ascending order; `None` until [`rank`] runs.
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTiming {
    pub image_id: String,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub train_ms: f64,
    pub score_ms: f64,
    pub per_image: Vec<ImageTiming>,
}

/// Scores sorted by ascending QE, ranked `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema_version: u32,
    pub reference_id: String,
    pub lattice_summary: String,
    pub scores: Vec<QeScore>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Computes one unranked score per image, in input order.
///
/// `direction` compares each image's QE with that of the image named `reference_id`.
pub fn score_series(
    lattice: &SomLattice,
    images: &[ImageGrid],
    reference_id: &str,
) -> Result<Vec<QeScore>> {
    score_series_timed(lattice, images, reference_id).map(|(scores, _)| scores)
}

/// [`score_series`] plus wall-clock time spent on each image.
pub fn score_series_timed(
    lattice: &SomLattice,
    images: &[ImageGrid],
    reference_id: &str,
) -> Result<(Vec<QeScore>, Vec<ImageTiming>)> {
    let reference = images
        .iter()
        .position(|img| img.id == reference_id)
        .ok_or_else(|| {
            Error::contract(format!(
                "reference image {reference_id:?} is not in the series"
            ))
        })?;
    let measured: Vec<(f64, f64)> = images
        .par_iter()
        .map(|img| {
            let start = Instant::now();
            let qe = lattice.quantization_error(img)?;
            Ok((qe, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;
    let reference_qe = measured[reference].0;
    let scores = images
        .iter()
        .zip(&measured)
        .map(|(img, &(qe, _))| QeScore {
            image_id: img.id.clone(),
            qe,
            direction: Direction::between(qe, reference_qe),
            rank: None,
        })
        .collect();
    let timings = images
        .iter()
        .zip(&measured)
        .map(|(img, &(_, ms))| ImageTiming {
            image_id: img.id.clone(),
            ms,
        })
        .collect();
    Ok((scores, timings))
}

/// Sorts ascending by QE (ties by image id) and assigns ranks `1..=n`.
///
/// Only `scores` is filled in; reference id, lattice summary and timings are
/// left for the caller.
pub fn rank(mut scores: Vec<QeScore>) -> Result<ClassificationReport> {
    if scores.is_empty() {
        return Err(Error::contract("cannot rank an empty series"));
    }
    if let Some(bad) = scores.iter().find(|s| !s.qe.is_finite()) {
        return Err(Error::contract(format!(
            "non-finite qe for {}",
            bad.image_id
        )));
    }
    scores.sort_by(|a, b| {
        a.qe.total_cmp(&b.qe)
            .then_with(|| a.image_id.cmp(&b.image_id))
    });
    for (i, s) in scores.iter_mut().enumerate() {
        s.rank = Some(i + 1);
    }
    Ok(ClassificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        reference_id: String::new(),
        lattice_summary: String::new(),
        scores,
        timings: Timings::default(),
    })
}

impl ClassificationReport {
    /// Image ids from lowest to highest QE.
    pub fn order(&self) -> Vec<&str> {
        self.scores.iter().map(|s| s.image_id.as_str()).collect()
    }
}

/// Serializes a report: CSV rows in ascending rank, or the full JSON document.
pub fn emit_report(report: &ClassificationReport, format: ReportFormat) -> Vec<u8> {
    emit_report_ordered(report, format, false)
}

/// Like [`emit_report`]; `descending` lists CSV rows from the highest rank down.
/// Rank numbers are unchanged. JSON always keeps the stored ascending order.
pub fn emit_report_ordered(
    report: &ClassificationReport,
    format: ReportFormat,
    descending: bool,
) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::with_capacity(64 * (report.scores.len() + 1));
            out.push_str(CSV_HEADER);
            out.push('\n');
            let rows: Box<dyn Iterator<Item = &QeScore>> = if descending {
                Box::new(report.scores.iter().rev())
            } else {
                Box::new(report.scores.iter())
            };
            for s in rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    s.rank.unwrap_or(0),
                    csv_field(&s.image_id),
                    sig17(s.qe),
                    s.direction.as_i8()
                ));
            }
            out.into_bytes()
        }
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
    }
}

fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

/// Fixed-point decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let sci = format!("{x:.16e}");
    let exponent: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (16 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Kendall rank correlation (tau-b) between two paired samples.
///
/// Returns 1.0 when both sequences order every pair the same way.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "paired samples must have equal length");
    let (mut concordant, mut discordant, mut ties_x, mut ties_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            match (x[i].total_cmp(&x[j]), y[i].total_cmp(&y[j])) {
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) => ties_x += 1,
                (_, Ordering::Equal) => ties_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let denom =
        (((concordant + discordant + ties_x) * (concordant + discordant + ties_y)) as f64).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / denom
}

/// Number of pairs that `y` orders differently from `x`.
pub fn inversions(x: &[f64], y: &[f64]) -> usize {
    assert_eq!(x.len(), y.len(), "paired samples must have equal length");
    (0..x.len())
        .flat_map(|i| (i + 1..x.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let a = x[i].total_cmp(&x[j]);
            let b = y[i].total_cmp(&y[j]);
            a != Ordering::Equal && b != Ordering::Equal && a != b
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(id: &str, qe: f64) -> QeScore {
        QeScore {
            image_id: id.into(),
            qe,
            direction: Direction::Unchanged,
            rank: None,
        }
    }

    #[test]
    fn singleton_gets_rank_one() {
        let report = rank(vec![score("a", 0.4)]).unwrap();
        assert_eq!(report.scores[0].rank, Some(1));
    }

    #[test]
    fn rank_sorts_ascending() {
        let report = rank(vec![score("a", 0.3), score("b", 0.1), score("c", 0.2)]).unwrap();
        assert_eq!(report.order(), ["b", "c", "a"]);
        let ranks: Vec<_> = report.scores.iter().map(|s| s.rank.unwrap()).collect();
        assert_eq!(ranks, [1, 2, 3]);

        let sorted = rank(vec![score("a", 0.1), score("b", 0.2), score("c", 0.3)]).unwrap();
        assert_eq!(sorted.order(), ["a", "b", "c"]);
    }

    #[test]
    fn ties_fall_back_to_id() {
        let report = rank(vec![score("z", 0.2), score("m", 0.2), score("a", 0.5)]).unwrap();
        assert_eq!(report.order(), ["m", "z", "a"]);
    }

    #[test]
    fn rank_rejects_empty_and_nan() {
        assert!(matches!(rank(vec![]), Err(Error::Contract(_))));
        assert!(rank(vec![score("a", f64::NAN)]).is_err());
    }

    #[test]
    fn direction_tolerance() {
        assert_eq!(Direction::between(0.5 + 1e-13, 0.5), Direction::Unchanged);
        assert_eq!(Direction::between(0.5 + 1e-9, 0.5), Direction::Higher);
        assert_eq!(Direction::between(0.4, 0.5), Direction::Lower);
    }

    #[test]
    fn sig17_digits() {
        assert_eq!(sig17(0.25), "0.25000000000000000");
        assert_eq!(sig17(0.0), "0.0000000000000000");
        assert_eq!(sig17(1.5), "1.5000000000000000");
        assert_eq!(sig17(0.012), "0.012000000000000000");
        for x in [
            0.1,
            1.0 / 3.0,
            2.0f64.sqrt() / 1000.0,
            123.456,
            9.999999999999999e-3,
        ] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        let mut report = rank(vec![score("a,b", 0.1)]).unwrap();
        report.scores[0].direction = Direction::Lower;
        let text = String::from_utf8(emit_report(&report, ReportFormat::Csv)).unwrap();
        assert_eq!(
            text,
            "rank,image_id,qe,direction\n1,\"a,b\",0.10000000000000001,-1\n"
        );
    }

    #[test]
    fn descending_presentation_reverses_rows_only() {
        let report = rank(vec![score("a", 0.1), score("b", 0.2)]).unwrap();
        let text =
            String::from_utf8(emit_report_ordered(&report, ReportFormat::Csv, true)).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[1].starts_with("2,b,"));
        assert!(lines[2].starts_with("1,a,"));
    }

    #[test]
    fn kendall_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau(&x, &[10.0, 20.0, 30.0, 40.0]), 1.0);
        assert_eq!(kendall_tau(&x, &[4.0, 3.0, 2.0, 1.0]), -1.0);
        assert_eq!(inversions(&x, &[1.0, 3.0, 2.0, 4.0]), 1);
        assert!((kendall_tau(&x, &[1.0, 3.0, 2.0, 4.0]) - 4.0 / 6.0).abs() < 1e-15);
    }
}

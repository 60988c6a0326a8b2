use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use somqe::classify::{emit_report_ordered, ReportFormat};
use somqe::imaging::{load_image, resize, to_grayscale, write_pnm};
use somqe::synth::{default_fractions, write_series, SynthSpec};
use somqe::{ImageGrid, SomLattice};

use crate::args::{ClassifyArgs, Cli, ColorMode, Command, SynthArgs, Threads, TrainArgs};
use crate::error::CliError;
use crate::pipeline::{self, Preprocess};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "pgm", "ppm"];

pub(crate) fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Threads::Fixed(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Synth(args) => synth(&args),
        Command::Train(args) => train(&args),
        Command::Classify(args) => classify(&args),
        Command::Bench(args) => crate::bench::run(&args),
    })
}

fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let base = SynthSpec::new(args.mode.into());
    let spec = SynthSpec {
        width: args.width as usize,
        height: args.height as usize,
        fractions: args.fractions.clone().unwrap_or_else(default_fractions),
        texture_noise: args.noise,
        placement: args.placement.into(),
        seed: args.seed,
        ..base
    };
    spec.validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    let manifest = write_series(&spec, &args.out)?;
    println!(
        "wrote {} images ({}x{}, {:?}) and manifest.json to {}",
        manifest.images.len(),
        spec.width,
        spec.height,
        spec.mode,
        args.out.display()
    );
    Ok(())
}

fn train(args: &TrainArgs) -> Result<(), CliError> {
    let config = args.training.train_config(args.lattice.radius)?;
    let mut img = load_image(&args.input)?;
    if args.width.is_some() || args.height.is_some() {
        let w = args.width.map_or(img.width(), |w| w as usize);
        let h = args.height.map_or(img.height(), |h| h as usize);
        img = resize(&img, w, h)?;
    }
    if args.color == ColorMode::ForceGray {
        img = to_grayscale(&img);
    }
    let lattice = SomLattice::fit(
        args.lattice.rows as usize,
        args.lattice.cols as usize,
        &img,
        &config,
    )?;
    create_dir(&args.out)?;
    let path = args.out.join("lattice.json");
    lattice.save(&path)?;
    println!(
        "trained {} on {} -> {}",
        pipeline::lattice_summary(&lattice, &config),
        img.id,
        path.display()
    );
    Ok(())
}

fn classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let config = args.training.train_config(args.lattice.radius)?;
    if args.preprocess.width.is_some() != args.preprocess.height.is_some() {
        return Err(CliError::config(
            "--width and --height must be given together",
        ));
    }
    let paths = list_images(&args.input)?;
    if paths.len() < 2 {
        return Err(CliError::config(format!(
            "need at least 2 images in {}, found {}",
            args.input.display(),
            paths.len()
        )));
    }
    let images: Vec<ImageGrid> = paths
        .par_iter()
        .map(load_image)
        .collect::<somqe::Result<_>>()?;

    let mut seen = BTreeSet::new();
    if let Some(dup) = images.iter().find(|img| !seen.insert(img.id.as_str())) {
        return Err(CliError::config(format!(
            "two files share the image id {:?}",
            dup.id
        )));
    }
    let reference = if args.reference == "first" {
        let first = seen.first().expect("at least two images");
        images.iter().position(|img| img.id == *first).unwrap()
    } else {
        images
            .iter()
            .position(|img| img.id == args.reference)
            .ok_or_else(|| {
                CliError::config(format!("reference image {:?} not found", args.reference))
            })?
    };

    let opts = Preprocess {
        target: args
            .preprocess
            .width
            .zip(args.preprocess.height)
            .map(|(w, h)| (w as usize, h as usize)),
        match_contrast: args.preprocess.match_contrast,
        color: args.preprocess.color,
    };
    let images = pipeline::preprocess(images, reference, &opts)?;

    create_dir(&args.out)?;
    if args.dump_preprocessed {
        let dir = args.out.join("preprocessed");
        create_dir(&dir)?;
        images.par_iter().try_for_each(|img| {
            let ext = if img.channels() == 1 { "pgm" } else { "ppm" };
            write_pnm(img, dir.join(format!("{}.{ext}", img.id)))
        })?;
    }

    let result = pipeline::classify(
        &images,
        reference,
        args.lattice.rows as usize,
        args.lattice.cols as usize,
        &config,
    )?;
    let report = &result.report;
    write_file(
        &args.out.join("report.csv"),
        &emit_report_ordered(report, ReportFormat::Csv, args.descending),
    )?;
    write_file(
        &args.out.join("report.json"),
        &emit_report_ordered(report, ReportFormat::Json, false),
    )?;
    result.lattice.save(args.out.join("lattice.json"))?;

    println!(
        "reference {}  lattice {}",
        report.reference_id, report.lattice_summary
    );
    println!("{:>4}  {:<32} {:>20} {:>3}", "rank", "image", "qe", "dir");
    let rows: Box<dyn Iterator<Item = _>> = if args.descending {
        Box::new(report.scores.iter().rev())
    } else {
        Box::new(report.scores.iter())
    };
    for s in rows {
        println!(
            "{:>4}  {:<32} {:>20.12} {:>3}",
            s.rank.unwrap_or(0),
            s.image_id,
            s.qe,
            s.direction.as_i8()
        );
    }
    println!(
        "train {:.1} ms, score {:.1} ms for {} images; reports in {}",
        report.timings.train_ms,
        report.timings.score_ms,
        report.scores.len(),
        args.out.display()
    );
    Ok(())
}

/// Image files directly inside `dir`, sorted by file name.
fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| somqe::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| somqe::Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })?
            .path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::Input(somqe::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| {
        CliError::Input(somqe::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

use std::path::Path;
use std::process::{Command, Output};

use somqe::synth::Manifest;

fn somqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_somqe"))
        .args(args)
        .env_remove("SOMQE_THREADS")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--out", path(dir)];
    args.extend(extra);
    let out = somqe(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn csv_rows(dir: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(dir.join("report.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn classify_default_corpus_recovers_fraction_order() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let out = tmp.path().join("out");
    synth(&corpus, &[]);
    let run = somqe(&["classify", "--input", path(&corpus), "--out", path(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));

    let manifest = Manifest::load(corpus.join("manifest.json")).unwrap();
    let mut by_fraction = manifest.images.clone();
    by_fraction.sort_by(|a, b| a.fraction.total_cmp(&b.fraction));
    let expected: Vec<String> = by_fraction.into_iter().map(|e| e.image_id).collect();

    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 17);
    let order: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
    assert_eq!(order, expected);
    assert_eq!(rows[0][3], "0");
    assert!(rows[1..].iter().all(|r| r[3] == "1"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["reference_id"], "synth_f0.000");
    assert_eq!(json["timings"]["per_image"].as_array().unwrap().len(), 17);
    assert!(json["timings"]["train_ms"].as_f64().unwrap() >= 0.0);
    assert!(out.join("lattice.json").exists());
}

#[test]
fn identical_images_tie_on_id() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    synth(
        &corpus,
        &["--width", "32", "--height", "32", "--fractions", "0.2"],
    );
    std::fs::copy(corpus.join("synth_f0.200.pgm"), corpus.join("another.pgm")).unwrap();
    let out = tmp.path().join("out");
    let run = somqe(&["classify", "--input", path(&corpus), "--out", path(&out)]);
    assert!(run.status.success(), "{}", stderr(&run));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "another");
    assert_eq!(rows[1][1], "synth_f0.200");
    assert_eq!(rows[0][2], rows[1][2]);
    assert!(rows.iter().all(|r| r[3] == "0"));
}

#[test]
fn single_image_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(
        tmp.path(),
        &["--width", "8", "--height", "8", "--fractions", "0.5"],
    );
    let run = somqe(&[
        "classify",
        "--input",
        path(tmp.path()),
        "--out",
        path(&tmp.path().join("o")),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("need at least 2 images"));
    assert_eq!(stderr(&run).lines().count(), 1);
}

#[test]
fn fault_injection_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");

    let missing = somqe(&[
        "classify",
        "--input",
        path(&tmp.path().join("nope")),
        "--out",
        path(&out),
    ]);
    assert_eq!(missing.status.code(), Some(3), "{}", stderr(&missing));

    let corpus = tmp.path().join("c");
    synth(
        &corpus,
        &["--width", "8", "--height", "8", "--fractions", "0,0.5"],
    );
    std::fs::write(corpus.join("broken.png"), b"\x89PNG\r\n\x1a\n garbage").unwrap();
    let corrupt = somqe(&["classify", "--input", path(&corpus), "--out", path(&out)]);
    assert_eq!(corrupt.status.code(), Some(3), "{}", stderr(&corrupt));
    std::fs::remove_file(corpus.join("broken.png")).unwrap();

    let bad_flag = somqe(&["classify", "--input", path(&corpus), "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(2));

    let bad_alpha = somqe(&[
        "classify",
        "--input",
        path(&corpus),
        "--out",
        path(&out),
        "--alpha-end",
        "0.9",
    ]);
    assert_eq!(bad_alpha.status.code(), Some(2));

    let zero_rows = somqe(&["classify", "--input", path(&corpus), "--rows", "0"]);
    assert_eq!(zero_rows.status.code(), Some(2));

    let bad_ref = somqe(&[
        "classify",
        "--input",
        path(&corpus),
        "--out",
        path(&out),
        "--reference",
        "ghost",
    ]);
    assert_eq!(bad_ref.status.code(), Some(2));

    let bad_threads = Command::new(env!("CARGO_BIN_EXE_somqe"))
        .args(["classify", "--input", path(&corpus), "--out", path(&out)])
        .env("SOMQE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));

    let bad_fractions = somqe(&["synth", "--out", path(&out), "--fractions", "0.3,0.1"]);
    assert_eq!(bad_fractions.status.code(), Some(2));

    let help = somqe(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn threads_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    synth(
        &corpus,
        &["--width", "16", "--height", "16", "--fractions", "0,0.1"],
    );
    let run = Command::new(env!("CARGO_BIN_EXE_somqe"))
        .args([
            "classify",
            "--input",
            path(&corpus),
            "--out",
            path(&tmp.path().join("o")),
        ])
        .env("SOMQE_THREADS", "1")
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", stderr(&run));
}

#[test]
fn descending_reference_and_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    synth(
        &corpus,
        &[
            "--mode",
            "blue-yellow",
            "--width",
            "40",
            "--height",
            "30",
            "--fractions",
            "0,0.1,0.3",
        ],
    );
    let out = tmp.path().join("o");
    let run = somqe(&[
        "classify",
        "--input",
        path(&corpus),
        "--out",
        path(&out),
        "--reference",
        "synth_f0.100",
        "--descending",
        "--dump-preprocessed",
        "--width",
        "20",
        "--height",
        "15",
        "--color",
        "force-gray",
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let rows = csv_rows(&out);
    let ranks: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ranks, ["3", "2", "1"]);
    let reference = rows.iter().find(|r| r[1] == "synth_f0.100").unwrap();
    assert_eq!(reference[3], "0");
    let dumped = somqe::imaging::load_image(out.join("preprocessed/synth_f0.300.pgm")).unwrap();
    assert_eq!(
        (dumped.width(), dumped.height(), dumped.channels()),
        (20, 15, 1)
    );
}

#[test]
fn train_writes_loadable_lattice() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    synth(
        &corpus,
        &[
            "--mode",
            "blue-yellow",
            "--width",
            "24",
            "--height",
            "24",
            "--fractions",
            "0.1",
        ],
    );
    let out = tmp.path().join("o");
    let run = somqe(&[
        "train",
        "--input",
        path(&corpus.join("synth_f0.100.ppm")),
        "--out",
        path(&out),
        "--rows",
        "3",
        "--cols",
        "5",
        "--radius",
        "2",
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let lattice = somqe::SomLattice::load(out.join("lattice.json")).unwrap();
    assert_eq!(
        (
            lattice.rows(),
            lattice.cols(),
            lattice.dim(),
            lattice.radius()
        ),
        (3, 5, 3, 2)
    );
    assert_eq!(lattice.trained_on.as_deref(), Some("synth_f0.100"));
}

#[test]
fn bench_with_zero_iterations_still_scores_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let run = somqe(&[
        "bench",
        "--out",
        path(tmp.path()),
        "--iterations",
        "0",
        "--width",
        "64",
        "--height",
        "64",
        "--reps",
        "3",
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("train one image"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("bench.json")).unwrap())
            .unwrap();
    assert_eq!(json["images_scored"], 20);
    assert_eq!(json["series_len"], 17);
    assert!(json["train_ms"].as_f64().unwrap() < 50.0);
    assert_eq!(json["budgets"].as_array().unwrap().len(), 3);
}

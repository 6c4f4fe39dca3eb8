use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hemo_cli::io;
use hemo_core::imaging::Grid;

fn hemo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hemo"))
        .args(args)
        .env_remove("HEMO_SEED")
        .env_remove("HEMO_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = hemo(args);
    assert!(
        out.status.success(),
        "hemo {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn disks(centres: &[(f64, f64)]) -> Grid<u8> {
    Grid::from_fn(160, 100, |x, y| {
        let inside = centres
            .iter()
            .any(|&(cx, cy)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= 144.0);
        if inside {
            60
        } else {
            220
        }
    })
    .unwrap()
}

#[test]
fn segment_finds_disks_and_tolerates_blank_images() {
    let tmp = tempfile::tempdir().unwrap();
    let images = tmp.path().join("images");
    std::fs::create_dir(&images).unwrap();
    io::write_u8(
        &images.join("a.png"),
        &disks(&[(30.0, 30.0), (80.0, 50.0), (130.0, 70.0)]),
    )
    .unwrap();
    io::write_u8(&images.join("blank.png"), &Grid::filled(160, 100, 200).unwrap()).unwrap();
    let out = tmp.path().join("seg");
    ok(&["segment", "--images", s(&images), "--out", s(&out)]);

    let text = std::fs::read_to_string(out.join("regions.csv")).unwrap();
    let a: Vec<&str> = text.lines().filter(|l| l.starts_with("a,")).collect();
    let blank = text.lines().filter(|l| l.starts_with("blank,")).count();
    assert_eq!(a.len(), 3);
    assert_eq!(blank, 0);
    assert!(out.join("blank_mask.png").is_file());
    assert!(out.join("a_regions.png").is_file());
    assert!(out.join("run_manifest.json").is_file());
}

#[test]
fn missing_seed_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hemo(&["synth", "--cells", "10", "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(hemo(&["experiment", "--bogus"]).status.code(), Some(1));
    assert_eq!(hemo(&["--help"]).status.code(), Some(0));
}

fn synth(dir: &Path, preset: &str, cells: &str) -> PathBuf {
    let data = dir.join(preset);
    ok(&[
        "--seed",
        "3",
        "synth",
        "--preset",
        preset,
        "--cells",
        cells,
        "--out",
        s(&data),
    ]);
    let feat = dir.join(format!("{preset}_features"));
    ok(&[
        "features",
        "--images",
        s(&data.join("images")),
        "--annotations",
        s(&data.join("annotations")),
        "--out",
        s(&feat),
    ]);
    data
}

#[test]
fn separator_learns_doublets() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "doublets", "400");
    let features = tmp.path().join("doublets_features/features.csv");
    let out = tmp.path().join("sep");
    ok(&["--seed", "3", "separate", "--features", s(&features), "--out", s(&out)]);
    let summary = json(&out.join("summary.json"));
    assert!(summary["sensitivity"].as_f64().unwrap() >= 0.95, "{summary}");
    assert!((summary["reference"]["sensitivity"].as_f64().unwrap() - 0.906).abs() < 1e-12);
    let model = json(&out.join("separator.json"));
    assert_eq!(model["format"], "hemo-svm");
    assert_eq!(model["feature_names"].as_array().unwrap().len(), 124);

    let bad = hemo(&[
        "--seed",
        "3",
        "separate",
        "--features",
        s(&features),
        "--label-column",
        "missing",
        "--out",
        s(&tmp.path().join("bad")),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn experiment_outputs_and_recipe_errors() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "three-class", "300");
    let features = tmp.path().join("three-class_features/features.csv");
    let out = tmp.path().join("exp");
    ok(&[
        "--seed",
        "5",
        "experiment",
        "--recipe",
        "smote1-csl-1-2-binary",
        "--features",
        s(&features),
        "--out",
        s(&out),
    ]);
    for f in [
        "folds.csv",
        "per_class.csv",
        "confusion.csv",
        "confusion_normalized.csv",
        "plan.csv",
        "predictions.csv",
        "metrics.svg",
        "confusion.svg",
        "summary.json",
        "run_manifest.json",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert_eq!(csv_rows(&out.join("folds.csv")), 6);
    let predictions = csv_rows(&out.join("predictions.csv"));
    assert_eq!(predictions, csv_rows(&features));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["reference"]["sensitivity"].as_f64(), Some(0.982));
    let manifest = json(&out.join("run_manifest.json"));
    assert_eq!(manifest["command"], "experiment");

    let norm = std::fs::read_to_string(out.join("confusion_normalized.csv")).unwrap();
    for line in norm.lines().skip(1) {
        let sum: f64 = line.split(',').skip(1).map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 100.0).abs() < 1e-3 || sum == 0.0, "{line}");
    }

    let report = tmp.path().join("report");
    ok(&["report", "--experiments", s(&out), "--out", s(&report)]);
    assert_eq!(csv_rows(&report.join("comparison.csv")), 1);

    let bad = hemo(&[
        "--seed",
        "5",
        "experiment",
        "--recipe",
        "smote9",
        "--features",
        s(&features),
        "--out",
        s(&tmp.path().join("bad")),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(
        err.contains("baseline-binary") && err.contains("smote1-csl-multiclass"),
        "{err}"
    );
}

fn shifted(mask: &Grid<u8>, dx: usize) -> Grid<u8> {
    Grid::from_fn(mask.width(), mask.height(), |x, y| {
        if x >= dx {
            *mask.get(x - dx, y)
        } else {
            0
        }
    })
    .unwrap()
}

#[test]
fn eval_masks_scores_agreement() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), "three-class", "120");
    let labels = tmp.path().join("labels");
    ok(&[
        "label",
        "--images",
        s(&data.join("images")),
        "--annotations",
        s(&data.join("annotations")),
        "--out",
        s(&labels),
    ]);
    let masks = labels.join("masks");
    let matched = |predicted: &Path, out: &str| -> (usize, usize) {
        let out = tmp.path().join(out);
        ok(&[
            "eval-masks",
            "--labels",
            s(&masks),
            "--predicted",
            s(predicted),
            "--out",
            s(&out),
        ]);
        let text = std::fs::read_to_string(out.join("cells.csv")).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        (
            rows.iter().filter(|l| l.split(',').nth(5) == Some("1")).count(),
            rows.len(),
        )
    };

    let (m, n) = matched(&masks, "same");
    assert!(n > 0);
    assert_eq!(m, n);

    let moved = tmp.path().join("moved");
    std::fs::create_dir(&moved).unwrap();
    for p in io::list_pngs(&masks).unwrap() {
        let g = io::read_u8_mask(&p).unwrap();
        io::write_u8(&moved.join(p.file_name().unwrap()), &shifted(&g, 20)).unwrap();
    }
    let (m_moved, n_moved) = matched(&moved, "moved");
    assert_eq!(n_moved, n);
    assert!(m_moved < n / 2, "{m_moved} of {n} still matched after a 20 px shift");

    // one prediction with the wrong size is reported and skipped
    let mixed = tmp.path().join("mixed");
    std::fs::create_dir(&mixed).unwrap();
    let files = io::list_pngs(&masks).unwrap();
    for (i, p) in files.iter().enumerate() {
        let target = mixed.join(p.file_name().unwrap());
        if i == 0 {
            io::write_u8(&target, &Grid::filled(7, 7, 0u8).unwrap()).unwrap();
        } else {
            std::fs::copy(p, target).unwrap();
        }
    }
    let out = hemo(&[
        "eval-masks",
        "--labels",
        s(&masks),
        "--predicted",
        s(&mixed),
        "--out",
        s(&tmp.path().join("mixed_out")),
    ]);
    assert!(out.status.success());
    let first = io::stem(&files[0]);
    assert!(String::from_utf8_lossy(&out.stderr).contains(&first));
    let text = std::fs::read_to_string(tmp.path().join("mixed_out/cells.csv")).unwrap();
    assert!(!text.lines().any(|l| l.starts_with(&format!("{first},"))));
}

#[test]
fn example_config_is_accepted() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../config.example.toml");
    let out = ok(&["--config", config, "experiment", "--list"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("smote3-3-csl-2-3-binary"));
}

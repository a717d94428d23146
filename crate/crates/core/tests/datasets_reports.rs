mod common;

use std::process::Command;

use common::*;
use sketchlearn::bench::*;
use sketchlearn::datasets::{load_mnist, normalize, MnistFiles, RawImageSet};
use sketchlearn::Strategy;

fn record(i: usize) -> RunRecord {
    RunRecord {
        kind: ExperimentKind::CompareSampling,
        dataset: DatasetKind::Mnist,
        m: 1000 + i,
        k: 10,
        p: 100,
        strategy: if i % 2 == 0 { Method::Sampled(Strategy::Norm) } else { Method::Exact },
        seed: i as u64,
        accuracy: Some(0.5 + i as f64 / 1000.0),
        timings: Timings {
            featurize_s: 0.1 * i as f64,
            tree_build_s: 0.01,
            factorize_s: 1.0 / (i + 1) as f64,
            solve_s: 0.003,
            optimize_s: 0.0,
            total_s: 2.0 + i as f64,
        },
        sampled_column_norms: None,
        effective_rank: None,
        error: None,
    }
}

#[test]
fn one_record_csv_round_trip() {
    let report = RunReport { records: vec![record(3)] };
    let mut buf = Vec::new();
    write_report(&report, ReportFormat::Csv, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv_report(&buf[..]).unwrap();
    let r = &rows[0];
    let want = &report.records[0];
    assert_eq!((r.m, r.k, r.p, r.seed), (want.m, want.k, want.p, want.seed));
    assert_eq!(r.strategy, "exact");
    assert_eq!(r.accuracy, want.accuracy);
    assert_eq!(r.factorize_s, want.timings.factorize_s);
}

#[test]
fn csv_and_json_agree_on_hundred_records() {
    let report = RunReport { records: (0..100).map(record).collect() };
    let dir = tempfile::tempdir().unwrap();
    let (c, j) = (dir.path().join("r.csv"), dir.path().join("r.json"));
    emit_report(&report, ReportFormat::Csv, &c).unwrap();
    emit_report(&report, ReportFormat::Json, &j).unwrap();
    let rows = read_csv_report(std::fs::File::open(&c).unwrap()).unwrap();
    let back: RunReport = serde_json::from_reader(std::fs::File::open(&j).unwrap()).unwrap();
    assert_eq!(back, report);
    assert_eq!(rows.len(), back.records.len());
    for (r, b) in rows.iter().zip(&back.records) {
        assert_eq!(r.kind, b.kind.to_string());
        assert_eq!(r.dataset, b.dataset.to_string());
        assert_eq!((r.m, r.k, r.p, r.seed), (b.m, b.k, b.p, b.seed));
        assert_eq!(r.strategy, b.strategy.to_string());
        assert_eq!(r.accuracy, b.accuracy);
        assert_eq!(r.featurize_s, b.timings.featurize_s);
        assert_eq!(r.tree_build_s, b.timings.tree_build_s);
        assert_eq!(r.factorize_s, b.timings.factorize_s);
        assert_eq!(r.solve_s, b.timings.solve_s);
        assert_eq!(r.total_s, b.timings.total_s);
    }
}

#[test]
fn synthetic_rank_sweep_and_reproducibility() {
    let spec = ExperimentSpec {
        kind: ExperimentKind::SweepRank,
        dataset: DatasetKind::Synthetic,
        m: vec![60],
        k: vec![5],
        seeds: vec![0, 1, 2],
        synthetic_rows: 50,
        synthetic_rank: 5,
        synthetic_noise: 1e-3,
        ..Default::default()
    };
    let a = run_experiment(&spec).unwrap();
    assert!(a.records.iter().all(|r| r.accuracy.unwrap() <= 0.05));
    let b = run_experiment(&spec).unwrap();
    let acc = |r: &RunReport| r.records.iter().map(|x| x.accuracy).collect::<Vec<_>>();
    assert_eq!(acc(&a), acc(&b));
    for r in &a.records {
        let t = r.timings;
        assert!(t.total_s + 1e-3 >= t.featurize_s + t.tree_build_s + t.factorize_s + t.solve_s);
    }
}

#[test]
fn synthetic_sampled_norms_recorded() {
    let spec = ExperimentSpec {
        kind: ExperimentKind::SampledNorms,
        dataset: DatasetKind::Synthetic,
        m: vec![30],
        k: vec![3],
        p: vec![12],
        seeds: vec![4],
        synthetic_rows: 20,
        ..Default::default()
    };
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.records.len(), 2);
    for rec in &r.records {
        assert_eq!(rec.sampled_column_norms.as_ref().unwrap().len(), 12);
    }
}

#[test]
fn normalize_scan_on_fixture() {
    let raw = RawImageSet {
        count: 3,
        height: 2,
        width: 2,
        channels: 1,
        pixels: vec![0, 17, 200, 255, 3, 3, 90, 1, 254, 0, 7, 128],
        labels: vec![1, 2, 3],
    };
    let ds = normalize(&raw);
    let v = ds.inputs().as_slice();
    assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    for (x, &p) in v.iter().zip(&raw.pixels) {
        assert_eq!(*x, p as f64 / 255.0);
    }
}

#[test]
fn official_mnist_when_available() {
    let Some(dir) = mnist_dir() else {
        eprintln!("MNIST not found; skipping");
        return;
    };
    let files = MnistFiles::locate(&dir).unwrap();
    let raw = load_mnist(&files.train_images, &files.train_labels).unwrap();
    assert_eq!((raw.count, raw.height, raw.width), (60000, 28, 28));
    let test = load_mnist(&files.test_images, &files.test_labels).unwrap();
    assert_eq!(test.count, 10000);
    let ds = normalize(&test);
    let v = ds.inputs().as_slice();
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(lo >= 0.0 && hi <= 1.0);
    assert_eq!((lo, hi), (0.0, 1.0));
}

#[test]
fn cli_synthetic_run_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sketchlearn");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = Command::new(bin)
        .args(["--experiment", "compareSampling", "--dataset", "synthetic", "--m", "40", "--k", "3"])
        .args(["--p", "10,20", "--strategy", "norm,uniform", "--seeds", "0..2", "--format", "csv"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv_report(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);

    let cfg = dir.path().join("spec.json");
    std::fs::write(&cfg, r#"{"kind":"sweepRank","dataset":"synthetic","M":[30],"K":[3,40]}"#).unwrap();
    let failed = Command::new(bin).arg("--config").arg(&cfg).output().unwrap();
    assert!(!failed.status.success());
    let text = String::from_utf8(failed.stdout).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");

    let missing = Command::new(bin)
        .args(["--dataset", "mnist", "--data-dir", "/nonexistent/sketchlearn"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
}

//! End-to-end runs of the `ssa` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use nalgebra::DMatrix;
use serde_json::Value;
use tempfile::TempDir;

fn ssa(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ssa"))
        .args(args)
        .output()
        .expect("spawn ssa");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().expect("exit code"), stderr)
}

fn write_series(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, text).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn column(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn dense_sigmas(series: &[f64], l: usize) -> Vec<f64> {
    let k = series.len() - l + 1;
    let x = DMatrix::from_fn(l, k, |i, j| series[i + j]);
    let mut sv: Vec<f64> = x.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn rank5(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            10.0 * (-5.0 * t).exp()
                + (2.0 * PI * t / 13.0).sin()
                + 2.5 * (2.0 * PI * t / 37.0).sin()
        })
        .collect()
}

#[test]
fn decompose_small_series_matches_dense() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "in.csv", &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let out = dir.path().join("run");
    let (code, err) = ssa(&[
        "decompose",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "2",
        "--nev",
        "2",
    ]);
    assert_eq!(code, 0, "{err}");
    let j = json(&dir.path().join("run.triples.json"));
    assert_eq!(j["schema"], 1);
    assert_eq!(j["seed"], 42);
    assert_eq!(j["config"]["nev"], 2);
    assert_eq!(j["converged"], true);
    let got = floats(&j["sigmas"]);
    let want = dense_sigmas(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-10 * want[0], "{got:?} vs {want:?}");
    }
    let csv = fs::read_to_string(dir.path().join("run.vectors.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("u1,u2,v1,v2"));
    assert_eq!(lines.count(), 4);
    assert!(dir.path().join("run.timing.json").exists());
}

#[test]
fn decompose_constant_series_is_rank_one() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "c.csv", &[3.0; 10]);
    let out = dir.path().join("c");
    let (code, err) = ssa(&[
        "decompose",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "4",
        "--nev",
        "1",
    ]);
    assert_eq!(code, 0, "{err}");
    let sigma = floats(&json(&dir.path().join("c.triples.json"))["sigmas"])[0];
    let want = 3.0 * ((4 * 7) as f64).sqrt();
    assert!((sigma - want).abs() <= 1e-12 * want);
}

#[test]
fn decompose_usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "in.csv", &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let out = dir.path().join("o");
    let base = ["decompose", "--input", s(&input), "--output", s(&out)];
    let (code, err) = ssa(&[&base[..], &["--window", "2", "--nev", "0"]].concat());
    assert_eq!(code, 2);
    assert!(err.contains("nev"), "{err}");
    assert_eq!(
        ssa(&[&base[..], &["--window", "5", "--nev", "1"]].concat()).0,
        2
    );
    assert_eq!(
        ssa(&[&base[..], &["--window", "2", "--nev", "3"]].concat()).0,
        2
    );
    assert_eq!(ssa(&["decompose", "--window", "2", "--nev", "1"]).0, 2);

    let missing = dir.path().join("nope.csv");
    assert_eq!(
        ssa(&[
            "decompose",
            "--input",
            s(&missing),
            "--output",
            s(&out),
            "--window",
            "2",
            "--nev",
            "1"
        ])
        .0,
        2
    );
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1\n2\nfoo\n4\n").unwrap();
    assert_eq!(
        ssa(&[
            "decompose",
            "--input",
            s(&bad),
            "--output",
            s(&out),
            "--window",
            "2",
            "--nev",
            "1"
        ])
        .0,
        2
    );
}

#[test]
fn decompose_non_convergence_writes_partial_results() {
    let dir = TempDir::new().unwrap();
    let mut x: u64 = 0x2545F4914F6CDD1D;
    let noise: Vec<f64> = (0..200)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let input = write_series(dir.path(), "noise.csv", &noise);
    let out = dir.path().join("nc");
    let (code, err) = ssa(&[
        "decompose",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "100",
        "--nev",
        "20",
        "--max-steps",
        "20",
    ]);
    assert_eq!(code, 3, "{err}");
    let j = json(&dir.path().join("nc.triples.json"));
    assert_eq!(j["converged"], false);
    assert!(floats(&j["sigmas"]).len() < 20);
}

#[test]
fn reconstruct_rank5_model() {
    let dir = TempDir::new().unwrap();
    let f = rank5(1000);
    let input = write_series(dir.path(), "f.csv", &f);
    let out = dir.path().join("rec.csv");
    let (code, err) = ssa(&[
        "reconstruct",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "500",
        "--group",
        "1-5",
    ]);
    assert_eq!(code, 0, "{err}");
    let g = column(&out);
    assert_eq!(g.len(), 1000);
    let num: f64 = g
        .iter()
        .zip(&f)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = f.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(num / den <= 1e-6, "{}", num / den);
    let side = json(&dir.path().join("rec.csv.json"));
    assert_eq!(side["schema"], 1);
    assert_eq!(side["config"]["group"], serde_json::json!([1, 2, 3, 4, 5]));
}

#[test]
fn reconstruct_full_rank_is_identity() {
    let dir = TempDir::new().unwrap();
    let f = [
        0.3, -1.2, 2.5, 0.0, 4.1, -0.7, 1.9, 3.3, -2.2, 0.8, 1.1, -0.4,
    ];
    let input = write_series(dir.path(), "f.csv", &f);
    let out = dir.path().join("rec.csv");
    let (code, err) = ssa(&[
        "reconstruct",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "4",
        "--group",
        "1-4",
    ]);
    assert_eq!(code, 0, "{err}");
    for (a, b) in column(&out).iter().zip(&f) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}

#[test]
fn reconstruct_group_beyond_nev_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "f.csv", &rank5(100));
    let out = dir.path().join("rec.csv");
    let (code, err) = ssa(&[
        "reconstruct",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "50",
        "--group",
        "99",
        "--nev",
        "5",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("99"), "{err}");
    assert!(!out.exists());
}

#[test]
fn hmatrix_homogeneous_sine_is_flat() {
    let dir = TempDir::new().unwrap();
    let f: Vec<f64> = (1..=80)
        .map(|n| (2.0 * PI * n as f64 / 10.0).sin())
        .collect();
    let input = write_series(dir.path(), "sine.csv", &f);
    let out = dir.path().join("h.csv");
    let (code, err) = ssa(&[
        "hmatrix",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--window",
        "10",
        "--base-len",
        "30",
        "--test-len",
        "20",
        "--indices",
        "1-2",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r.len() == 61));
    assert!(rows.iter().flatten().all(|&g| (0.0..=1e-8).contains(&g)));
    let side = json(&dir.path().join("h.csv.json"));
    assert_eq!(
        (side["rows"].as_u64(), side["cols"].as_u64()),
        (Some(51), Some(61))
    );
}

#[test]
fn hmatrix_errors() {
    let dir = TempDir::new().unwrap();
    let f: Vec<f64> = (1..=80)
        .map(|n| (2.0 * PI * n as f64 / 10.0).sin())
        .collect();
    let input = write_series(dir.path(), "sine.csv", &f);
    let out = dir.path().join("h.csv");
    let args = |b: &'static str| {
        vec![
            "hmatrix",
            "--input",
            s(&input),
            "--output",
            s(&out),
            "--window",
            "10",
            "--base-len",
            b,
            "--test-len",
            "20",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| ssa(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run(args("10")).0, 2);

    let flat = write_series(dir.path(), "flat.csv", &[2.0; 60]);
    let (code, err) = ssa(&[
        "hmatrix",
        "--input",
        s(&flat),
        "--output",
        s(&out),
        "--window",
        "10",
        "--base-len",
        "30",
        "--test-len",
        "20",
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("rank"), "{err}");
}

#[test]
fn bench_reports_and_validates() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench.csv");
    let (code, err) = ssa(&[
        "bench",
        "--target",
        "reconstruct",
        "--sizes",
        "64,2^8",
        "--reps",
        "3",
        "--output",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("target,n,window"));
    assert!(lines[1].starts_with("reconstruct,64,32,3,"));
    assert!(!lines[2].contains("skipped"));
    assert_eq!(json(&dir.path().join("bench.csv.json"))["schema"], 1);

    assert_eq!(ssa(&["bench", "--reps", "0"]).0, 2);
    assert_eq!(ssa(&["bench", "--sizes", "abc"]).0, 2);
    let (code, _) = ssa(&[
        "bench",
        "--target",
        "matvec",
        "--sizes",
        "64",
        "--reps",
        "1",
        "--naive-cap",
        "1",
        "--output",
        s(&out),
    ]);
    assert_eq!(code, 0);
    assert!(fs::read_to_string(&out)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .ends_with("skipped,skipped,skipped"));
}

fn bench_rows(out: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn bench_matvec_scaling() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("mv.csv");
    let (code, err) = ssa(&[
        "bench",
        "--target",
        "matvec",
        "--sizes",
        "2^14,2^16",
        "--reps",
        "5",
        "--output",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = bench_rows(&out);
    let t = |r: usize, c: usize| rows[r][c].parse::<f64>().unwrap();
    let fast_ratio = t(1, 4) / t(0, 4);
    let naive_ratio = t(1, 5) / t(0, 5);
    // N log N predicts about 4.6x and the direct product 16x; timings are noisy, so compare loosely.
    assert!(fast_ratio <= 8.0, "fast grew {fast_ratio}x");
    assert!(naive_ratio >= 8.0, "direct grew {naive_ratio}x");
}

#[test]
fn bench_hankelize_fast_wins_at_2_16() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("hk.csv");
    let (code, err) = ssa(&[
        "bench",
        "--target",
        "hankelize",
        "--sizes",
        "2^16",
        "--reps",
        "1",
        "--output",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let row = &bench_rows(&out)[0];
    let (fast, naive): (f64, f64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
    assert!(fast <= naive, "fast {fast} naive {naive}");
}

#[test]
fn bootstrap_without_noise_has_zero_width() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bs");
    let (code, err) = ssa(&[
        "bootstrap-ci",
        "--output",
        s(&out),
        "--series-len",
        "200",
        "--noise-sigma",
        "0",
        "--replicates",
        "3",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(dir.path().join("bs.bands.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,truth,mean,q0.025,q0.975"));
    let mut count = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[4] - v[3] <= 1e-6, "{line}");
        count += 1;
    }
    assert_eq!(count, 200);
    let side = json(&dir.path().join("bs.json"));
    assert_eq!(side["seed"], 42);
    assert!(side["noise_generator"]
        .as_str()
        .unwrap()
        .contains("ChaCha8"));
}

#[test]
fn bootstrap_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bs");
    assert_eq!(
        ssa(&["bootstrap-ci", "--output", s(&out), "--replicates", "1"]).0,
        2
    );
    assert_eq!(
        ssa(&[
            "bootstrap-ci",
            "--output",
            s(&out),
            "--quantiles",
            "0.975,0.025"
        ])
        .0,
        2
    );
    assert_eq!(
        ssa(&["bootstrap-ci", "--output", s(&out), "--quantiles", "0,0.5"]).0,
        2
    );
    assert_eq!(
        ssa(&["bootstrap-ci", "--output", s(&out), "--noise-sigma", "-1"]).0,
        2
    );
}

fn snapshot(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names
        .iter()
        .map(|n| fs::read(dir.join(n)).unwrap())
        .collect()
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let f = rank5(300);
    let input = write_series(dir.path(), "f.csv", &f);
    let runs: Vec<(Vec<String>, Vec<&str>)> = vec![
        (
            vec![
                "decompose",
                "--input",
                s(&input),
                "--output",
                s(&dir.path().join("d")),
                "--window",
                "120",
                "--nev",
                "4",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["d.triples.json", "d.vectors.csv"],
        ),
        (
            vec![
                "hmatrix",
                "--input",
                s(&input),
                "--output",
                s(&dir.path().join("h.csv")),
                "--window",
                "20",
                "--base-len",
                "60",
                "--test-len",
                "40",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["h.csv", "h.csv.json"],
        ),
        (
            vec![
                "bootstrap-ci",
                "--output",
                s(&dir.path().join("b")),
                "--series-len",
                "300",
                "--replicates",
                "8",
                "--seed",
                "7",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["b.bands.csv", "b.json"],
        ),
    ];
    for (args, files) in runs {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(ssa(&argv).0, 0, "{argv:?}");
        let first = snapshot(dir.path(), &files);
        assert_eq!(ssa(&argv).0, 0);
        assert_eq!(first, snapshot(dir.path(), &files), "{argv:?}");
    }
}

#[test]
fn bootstrap_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b");
    let args = [
        "bootstrap-ci",
        "--output",
        s(&out),
        "--series-len",
        "200",
        "--replicates",
        "6",
    ];
    let run = |threads: &str| {
        let st = Command::new(env!("CARGO_BIN_EXE_ssa"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success());
        fs::read(dir.path().join("b.bands.csv")).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

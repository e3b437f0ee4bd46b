use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mx_emu::io::{read_tensor, write_tensor, Dtype};
use mx_emu::Tensor;

fn mxemu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mxemu")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path, kind: &str, extra: &[&str]) -> PathBuf {
    let p = path(dir, &format!("{kind}.mxt"));
    let mut args = vec!["fixture", "--kind", kind, "--out", s(&p)];
    args.extend_from_slice(extra);
    let o = mxemu(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn uniques(o: &Output) -> Vec<f64> {
    stdout(o).lines().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn dump_unique_reproduces_golden_sets() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "snippet", &[]);
    let o = mxemu(&["quantize", "--in", s(&x), "--format", "fp4_e2m1", "--scale", "pot_floor", "--group-size", "row", "--dump-unique"]);
    assert!(o.status.success());
    assert_eq!(uniques(&o), [-4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0]);
    assert_eq!(stdout(&o).lines().next(), Some("-4"));

    let o = mxemu(&["quantize", "--in", s(&x), "--format", "fp4_e2m1_asym", "--scale", "fp8e5m2", "--group-size", "row", "--dump-unique"]);
    let want = [
        -5.25, -3.5, -2.625, -1.75, -1.3125, -0.875, -0.4375, 0.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0,
    ];
    assert_eq!(uniques(&o), want);
    assert!(stdout(&o).contains("\n-0.4375\n0\n2.5\n"));
}

#[test]
fn missing_input_is_an_io_error() {
    let o = mxemu(&["quantize", "--in", "/definitely/not/here.mxt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/not/here.mxt"));
}

#[test]
fn unknown_format_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "snippet", &[]);
    let o = mxemu(&["compare", "--in", s(&x), "--format", "mxfp4,fp3_e1m1"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fp3_e1m1") && err.contains("fp8_e4m3"), "{err}");
    assert_eq!(mxemu(&["quantize", "--in", s(&x), "--scale", "e8m0"]).status.code(), Some(3));
    assert_eq!(mxemu(&["quantize", "--in", s(&x), "--group-size", "24"]).status.code(), Some(3));
    assert_eq!(mxemu(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn malformed_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.mxt");
    std::fs::write(&bad, b"MXT1\x00\x01\x05\x00").unwrap();
    assert_eq!(mxemu(&["stats", "--in", s(&bad)]).status.code(), Some(1));
    let csv = path(dir.path(), "nan.csv");
    std::fs::write(&csv, "1,2\nNaN,3\n").unwrap();
    assert_eq!(mxemu(&["quantize", "--in", s(&csv), "--group-size", "row"]).status.code(), Some(1));
}

#[test]
fn rotate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "spike", &["--rows", "8", "--cols", "128"]);
    let r = path(dir.path(), "r.mxt");
    let back = path(dir.path(), "back.mxt");
    assert!(mxemu(&["rotate", "--in", s(&x), "--out", s(&r), "--seed", "4"]).status.success());
    let o = mxemu(&["rotate", "--in", s(&r), "--out", s(&back), "--seed", "4", "--transpose", "--diff-against", s(&x)]);
    assert!(o.status.success());
    let line = stdout(&o);
    let d: f64 = line.trim().strip_prefix("max_abs_diff ").unwrap().parse().unwrap();
    assert!(d < 1e-9, "{line}");

    let o = mxemu(&["rotate", "--in", s(&x), "--dim-axis", "0", "--seed", "1"]);
    assert!(o.status.success());
    let odd = fixture(dir.path(), "random", &["--rows", "3", "--cols", "12"]);
    assert_eq!(mxemu(&["rotate", "--in", s(&odd)]).status.code(), Some(3));
}

#[test]
fn matmul_oracle_check_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a.mxt");
    let b = path(dir.path(), "b.mxt");
    write_tensor(&a, &mx_emu::fixtures::random_tensor(&[20, 64], 1), Dtype::F32).unwrap();
    write_tensor(&b, &mx_emu::fixtures::random_tensor(&[64, 12], 2), Dtype::F32).unwrap();
    let c = path(dir.path(), "c.mxt");
    for fmt in ["mxfp4", "amxfp4", "fp4_e2m1_asym:pot_round"] {
        let o = mxemu(&["matmul", "--in", s(&a), "--rhs", s(&b), "--out", s(&c), "--format", fmt, "--oracle-check"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).trim(), "max_abs_diff_vs_oracle 0", "{fmt}");
    }
    assert_eq!(read_tensor(&c).unwrap().0.shape(), &[20, 12]);
    let o = mxemu(&["matmul", "--in", s(&a), "--rhs", s(&a)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stats_on_snippet() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "snippet", &[]);
    let o = mxemu(&["stats", "--in", s(&x), "--group-size", "32", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["groups"], 32);
    assert_eq!(v["summary"]["undefined_kurtosis"], 0);
    // n evenly spaced points have kurtosis 3 - 6(n^2 + 1) / (5(n^2 - 1)).
    let n2 = 32.0 * 32.0;
    let k = v["summary"]["kurtosis"]["median"].as_f64().unwrap();
    assert!((k - (3.0 - 6.0 * (n2 + 1.0) / (5.0 * (n2 - 1.0)))).abs() < 1e-9, "{k}");
}

#[test]
fn compare_ranks_asymmetric_formats() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "shifted", &[]);
    let o = mxemu(&["compare", "--in", s(&x), "--format", "mxfp4,amxfp4", "--lloyd", "--init", "amxfp4", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let mse = |i: usize| rows[i]["mse"].as_f64().unwrap();
    assert_eq!(rows[1]["label"], "amxfp4");
    assert!(mse(1) < mse(0));
    assert_eq!(rows[2]["label"], "lloyd_max");
    assert!(mse(2) <= mse(1));
    for key in ["format", "scale_mode", "group_size", "mse", "clamp_sq_error", "round_sq_error"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn compare_on_grid_csv_has_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "grid.csv");
    std::fs::write(&csv, "0, 0.5, -1, 1.5\n2, -3, 4, -6\n").unwrap();
    let o = mxemu(&["compare", "--in", s(&csv), "--format", "fp4_e2m1", "--group-size", "4", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"][0]["mse"], 0.0);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "random", &["--seed", "3"]);
    let run = |name: &str| {
        let out = path(dir.path(), name);
        let packed = path(dir.path(), &format!("{name}.mxq"));
        let o = mxemu(&["quantize", "--in", s(&x), "--out", s(&out), "--packed", s(&packed), "--format", "anvfp4", "--json"]);
        assert!(o.status.success());
        (std::fs::read(out).unwrap(), std::fs::read(packed).unwrap(), o.stdout)
    };
    assert_eq!(run("one"), run("two"));
    let lloyd = |name: &str| {
        let out = path(dir.path(), name);
        let o = mxemu(&["lloydmax", "--in", s(&x), "--out", s(&out), "--clusters", "4", "--iters", "20", "--seed", "9", "--json"]);
        assert!(o.status.success());
        (std::fs::read(out).unwrap(), o.stdout)
    };
    assert_eq!(lloyd("l1"), lloyd("l2"));
}

#[test]
fn quantize_output_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixture(dir.path(), "shifted", &["--rows", "4", "--cols", "64", "--group-len", "16"]);
    let out = path(dir.path(), "q.mxt");
    let o = mxemu(&["quantize", "--in", s(&x), "--out", s(&out), "--format", "int4_zp", "--scale", "fp32", "--group-size", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (input, _) = read_tensor(&x).unwrap();
    let (y, dtype) = read_tensor(&out).unwrap();
    assert_eq!(dtype, Dtype::F64);
    let cfg = mx_emu::QuantConfig::from_names("int4_zp", "fp32", "16").unwrap();
    let want: Tensor = mx_emu::quantize_dequantize(&input, &cfg).unwrap();
    assert_eq!(y, want);
}

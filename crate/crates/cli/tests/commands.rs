use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use toroidal::oracles::numeric_jump;
use toroidal::tables::i_scale;
use toroidal::{AspectRatio, PhysicalScale, Primitives, QuadratureConfig};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toroidal"))
        .args(args)
        .output()
        .expect("spawn toroidal")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn table(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").to_string();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn t3_0(a: f64) -> f64 {
    Primitives::new(AspectRatio::new(a).unwrap()).t3_0()
}

#[test]
fn eigenvalues_small_window() {
    let (header, rows) = table(&stdout(&["eigenvalues", "--a", "2", "--n-min", "-2", "--n-max", "2"]));
    assert_eq!(header, "n,t3");
    assert_eq!(rows.len(), 5);
    let t = t3_0(2.0);
    assert_eq!(rows[2], vec![0.0, 0.0]);
    assert!((rows[3][1] / t - 1.0).abs() < 1e-15);
    assert!((rows[1][1] / -t - 1.0).abs() < 1e-15);
}

#[test]
fn eigenvalue_sweep_is_monotone() {
    let (header, rows) = table(&stdout(&["eigenvalues", "--a-sweep", "1.1:10:100"]));
    assert_eq!(header, "a,t3_0");
    assert_eq!(rows.len(), 100);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0] && w[1][1] > w[0][1]));
}

#[test]
fn aspect_ratio_at_most_one_is_a_usage_error() {
    let out = run(&["eigenvalues", "--a", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a > 1"));
}

#[test]
fn kernel_table_properties() {
    let (header, rows) = table(&stdout(&["kernel", "--a", "2", "--n", "2", "--samples", "256"]));
    assert_eq!(header, "theta,re,im,abs,amplitude_law,distance_to_singularity");
    let first = &rows[0];
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 0.0);
    assert!(first[1] > 0.0);
    let law = first[4];
    for r in &rows {
        assert!((r[4] / law - 1.0).abs() < 1e-10, "theta={}", r[0]);
        assert!(r[5] >= 0.05);
    }
    let k = rows.iter().position(|r| (r[0] - PI).abs() < 1e-12).expect("row at pi");
    let step = |i: usize| (rows[i + 1][1] - rows[i][1]).hypot(rows[i + 1][2] - rows[i][2]);
    let local = step(k - 2).max(step(k - 1)).max(step(k + 1));
    assert!(step(k) <= 2.0 * local, "{} vs {local}", step(k));
}

#[test]
fn kernel_rejects_few_samples() {
    assert_eq!(run(&["kernel", "--a", "2", "--n", "1", "--samples", "8"]).status.code(), Some(2));
}

#[test]
fn project_preset_is_reproducible_and_checked() {
    let args = ["project", "--a", "2", "--n", "0", "--phi", "preset:0", "--check"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let (header, rows) = table(&String::from_utf8(first.stdout).unwrap());
    assert_eq!(header, "n,t3,re,im,abs");
    assert_eq!(rows.len(), 1);
    assert!(rows[0][4].is_finite() && rows[0][4] > 0.0);
    let note = String::from_utf8(first.stderr).unwrap();
    assert!(note.starts_with("PASS check"), "{note}");
}

#[test]
fn project_check_on_presets() {
    for m in ["-2", "1", "3"] {
        let phi = format!("preset:{m}");
        let out = run(&["project", "--a", "1.5", "--n-max", "2", "--phi", &phi, "--check"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let (_, rows) = table(&String::from_utf8(out.stdout).unwrap());
        assert_eq!(rows.len(), 5);
    }
}

#[test]
fn zero_file_gives_zero_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    fs::write(&path, "fourier\n0,0,0\n").unwrap();
    let (_, rows) = table(&stdout(&["project", "--a", "2", "--n-max", "2", "--phi", path.to_str().unwrap()]));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[2] == 0.0 && r[3] == 0.0));
}

#[test]
fn malformed_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "fourier\n0,1,0\n2,x,0\n").unwrap();
    let out = run(&["project", "--a", "2", "--n", "1", "--phi", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn non_periodic_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    fs::write(&path, "grid\n0,1,0\n1.5707963267948966,0,0\n3.141592653589793,-1,0\n4.71238898038469,0,0\n6.283185307179586,5,0\n").unwrap();
    assert_eq!(run(&["project", "--a", "2", "--n", "1", "--phi", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn figure_2a_diverges_towards_both_poles() {
    let prims = Primitives::new(AspectRatio::new(2.0).unwrap());
    let ang = prims.operator().singular_angles();
    let (header, rows) = table(&stdout(&["figures", "--which", "2a", "--a", "2"]));
    assert_eq!(header, "theta,R");
    let at = |t: f64| rows.iter().find(|r| r[0] == t).map(|r| r[1]).expect("refined row");
    for pole in [ang.first, ang.second] {
        for side in [-1.0, 1.0] {
            let vals: Vec<f64> = [2, 6, 12].iter().map(|&k| at(pole + side * 10f64.powi(-k))).collect();
            assert!(vals[0] < vals[1] && vals[1] < vals[2], "{pole} {side}: {vals:?}");
            assert!(vals[2] > 10.0);
        }
    }
}

#[test]
fn figure_2b_jump_at_pi() {
    let a = 2.0;
    let (header, rows) = table(&stdout(&["figures", "--which", "2b", "--a", "2"]));
    assert_eq!(header, "theta,I_scaled");
    let k = rows.iter().position(|r| r[0] == PI).unwrap();
    assert_eq!(rows[k + 1][0], PI.next_up());
    let plotted = (rows[k][1] - rows[k + 1][1]).abs();
    let jump = numeric_jump(a, 1.0, &QuadratureConfig::default()).unwrap().value;
    let expected = i_scale(a) * jump;
    assert!((plotted / expected - 1.0).abs() < 1e-8, "{plotted} vs {expected}");
}

#[test]
fn figure_3_vanishes_near_one() {
    let (header, rows) = table(&stdout(&["figures", "--which", "3", "--a-sweep", "1.0001:1.1:5"]));
    assert_eq!(header, "a,t3_0");
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
    assert!(rows[0][1] < 1e-3 && rows[0][1] > 0.0);
    let (_, default) = table(&stdout(&["figures", "--which", "3"]));
    assert_eq!(default.len(), 100);
}

#[test]
fn verify_fast_passes_quickly() {
    let start = Instant::now();
    let out = run(&["verify", "--level", "fast"]);
    assert!(start.elapsed() < Duration::from_secs(60));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().last().unwrap().starts_with("9 of 9"));
}

#[test]
fn verify_detects_corrupted_jump() {
    let out = run(&["verify", "--level", "fast", "--perturb-jump", "1.000001"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# aspect ratio\na = 2\nabs_tol = 1e-14\n").unwrap();
    let cfg = path.to_str().unwrap();
    let (_, rows) = table(&stdout(&["--config", cfg, "eigenvalues", "--n-min", "1", "--n-max", "1"]));
    assert!((rows[0][1] / t3_0(2.0) - 1.0).abs() < 1e-15);
    let (_, rows) = table(&stdout(&["--config", cfg, "--a", "3", "eigenvalues", "--n-min", "1", "--n-max", "1"]));
    assert!((rows[0][1] / t3_0(3.0) - 1.0).abs() < 1e-15);
    fs::write(&path, "a = 2\ncolour = blue\n").unwrap();
    let out = run(&["--config", cfg, "eigenvalues"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn physical_mode_needs_all_parameters() {
    let full = ["--hbar", "1", "--mass", "1", "--minor-radius", "1", "--major-radius", "2"];
    let mut args = full.to_vec();
    args.extend(["eigenvalues", "--n-min", "1", "--n-max", "1"]);
    let (_, rows) = table(&stdout(&args));
    let c0 = PhysicalScale::from_constants(1.0, 1.0, 1.0).unwrap().c0();
    assert!((rows[0][1] / (c0 * t3_0(2.0)) - 1.0).abs() < 1e-12);
    let out = run(&["--hbar", "1", "--mass", "1", "eigenvalues"]);
    assert_eq!(out.status.code(), Some(2));
    let mut conflicting = full.to_vec();
    conflicting.extend(["--a", "3", "eigenvalues"]);
    assert_eq!(run(&conflicting).status.code(), Some(2));
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let cases: [&[&str]; 3] = [
        &["kernel", "--a", "1.5", "--n", "-3", "--samples", "64"],
        &["figures", "--which", "2b", "--a", "3", "--samples", "64"],
        &["project", "--a", "2", "--n-max", "1", "--phi", "preset:2"],
    ];
    for args in cases {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ev.csv");
    let out = run(&["eigenvalues", "--a", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 12);
    let field = text.lines().nth(7).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
}

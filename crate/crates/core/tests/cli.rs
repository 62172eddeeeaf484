//! End-to-end tests of the `volren` command line.

use std::path::{Path, PathBuf};
use std::process::Command;

use volren::io::{self, ElementType};
use volren::synth;

fn write_phantom(dir: &Path) -> PathBuf {
    let path = dir.join("head.mhd");
    io::save_volume(&synth::head_phantom(24), &path, ElementType::U8).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("volren").chain(args.iter().copied());
    let code = volren::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn render_writes_image_and_prints_stats() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let out = dir.path().join("out.png");
    let (code, stdout, stderr) = run(&[
        "render", "--volume", vol.to_str().unwrap(), "--tf", "grayscale-ramp",
        "--out", out.to_str().unwrap(), "--size", "40x30", "--mode", "mip",
    ]);
    assert_eq!(code, 0, "{stderr}");
    let stats: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(stats["rays"], 1200);
    let image = io::load_image(&out).unwrap();
    assert_eq!((image.width(), image.height()), (40, 30));
    assert!(image.pixels().chunks(4).any(|p| p[0] > 0), "MIP of the phantom is not all black");
}

#[test]
fn render_ppm_output() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let out = dir.path().join("out.ppm");
    let (code, _, stderr) = run(&["render", "--volume", vol.to_str().unwrap(), "--out", out.to_str().unwrap(), "--size", "8x6"]);
    assert_eq!(code, 0, "{stderr}");
    let bytes = std::fs::read(&out).unwrap();
    assert!(bytes.starts_with(b"P6\n8 6\n255\n"));
    assert_eq!(bytes.len(), 11 + 8 * 6 * 3);
}

#[test]
fn render_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let mut frames = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}.png"));
        let (code, _, stderr) = run(&[
            "render", "--volume", vol.to_str().unwrap(), "--out", out.to_str().unwrap(),
            "--size", "48x48", "--workers", workers, "--camera", "10,20,60;0,0,0;0,1,0;35",
        ]);
        assert_eq!(code, 0, "{stderr}");
        frames.push(std::fs::read(out).unwrap());
    }
    assert_eq!(frames[0], frames[1]);
}

#[test]
fn render_from_slice_stack() {
    let dir = tempfile::tempdir().unwrap();
    let stack = dir.path().join("slices");
    io::export_slice_stack(&synth::head_phantom(16), &stack).unwrap();
    let out = dir.path().join("out.png");
    let (code, _, stderr) = run(&[
        "render", "--slices", stack.to_str().unwrap(), "--spacing", "1,1,1.5",
        "--out", out.to_str().unwrap(), "--size", "16x16",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(out.exists());
}

#[test]
fn missing_input_fails_with_usage() {
    let (code, _, stderr) = run(&["render", "--out", "x.png"]);
    assert_ne!(code, 0);
    assert!(stderr.contains("Usage"), "{stderr}");
    assert!(stderr.contains("--volume"), "{stderr}");
}

#[test]
fn unknown_preset_and_mode_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let out = dir.path().join("o.png");
    let (code, _, stderr) = run(&["render", "--volume", vol.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tf", "nope"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("neither a bundled preset"), "{stderr}");
    let (code, _, _) = run(&["render", "--volume", vol.to_str().unwrap(), "--out", out.to_str().unwrap(), "--mode", "xray"]);
    assert_eq!(code, 1);
}

#[test]
fn bench_emits_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let csv_path = dir.path().join("bench.csv");
    let (code, stdout, stderr) = run(&[
        "bench", "--volume", vol.to_str().unwrap(), "--workers", "1,2,4", "--reps", "2",
        "--size", "32x32", "--out", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "workers,min_ms,median_ms,rays_per_s,samples_per_s,speedup");
    assert_eq!(lines.len(), 4);
    let workers: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(workers, ["1", "2", "4"]);
    assert!(lines[1].ends_with(",1.000"));
    assert_eq!(std::fs::read_to_string(csv_path).unwrap(), stdout);
}

#[test]
fn bench_single_worker_has_unit_speedup() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let (code, stdout, _) = run(&["bench", "--volume", vol.to_str().unwrap(), "--workers", "1", "--reps", "1", "--size", "8x8"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().nth(1).unwrap().ends_with(",1.000"));
}

#[test]
fn bench_zero_reps_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let (code, stdout, stderr) = run(&["bench", "--volume", vol.to_str().unwrap(), "--reps", "0"]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    assert!(stderr.contains("reps"), "{stderr}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_volren");
    let status = Command::new(bin).args(["render", "--out", "x.png"]).output().unwrap();
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let vol = write_phantom(dir.path());
    let out = dir.path().join("o.png");
    let status = Command::new(bin)
        .args(["render", "--volume", vol.to_str().unwrap(), "--out", out.to_str().unwrap(), "--size", "8x8"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.exists());
}

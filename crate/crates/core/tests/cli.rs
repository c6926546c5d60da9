//! End-to-end tests of the `umetrics` binary: metric modes, file handling,
//! exit codes, and the experiment runner.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use umetrics::io::{write_image, RasterFormat};
use umetrics::ImageGrid;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umetrics"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to spawn umetrics")
}

fn write_f32(dir: &Path, name: &str, width: usize, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let grid = ImageGrid::new(width, values.len() / width, values.to_vec()).unwrap();
    write_image(&grid, &path, RasterFormat::F32Raster).unwrap();
    path
}

fn stdout_lines(output: &Output) -> Vec<String> {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone())
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn metrics_identical_references_give_zero_umse_invalid_upsnr() {
    let dir = tempfile::tempdir().unwrap();
    let values = [3.0, 7.0, 1.0, 4.0];
    for name in ["d.f32", "a.f32", "b.f32", "c.f32"] {
        write_f32(dir.path(), name, 2, &values);
    }
    let out = cli(
        dir.path(),
        &[
            "metrics", "--denoised", "d.f32", "--ref-a", "a.f32", "--ref-b", "b.f32", "--ref-c",
            "c.f32", "--peak", "255",
        ],
    );
    let lines = stdout_lines(&out);
    assert_eq!(
        lines[0],
        "image,n,umse,upsnr,valid,umse_ci_low,umse_ci_high,upsnr_ci_low,upsnr_ci_high,excluded_resamples"
    );
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[1], "4"); // n
    assert_eq!(fields[2], "0"); // umse
    assert_eq!(fields[3], ""); // upsnr unset
    assert_eq!(fields[4], "false"); // valid
}

#[test]
fn metrics_worked_example_files() {
    let dir = tempfile::tempdir().unwrap();
    write_f32(dir.path(), "a.f32", 2, &[4.0, 0.0]);
    write_f32(dir.path(), "b.f32", 2, &[2.0, 2.0]);
    write_f32(dir.path(), "c.f32", 2, &[0.0, 0.0]);
    write_f32(dir.path(), "d.f32", 2, &[1.0, 1.0]);
    let out = cli(
        dir.path(),
        &[
            "metrics", "--denoised", "d.f32", "--ref-a", "a.f32", "--ref-b", "b.f32", "--ref-c",
            "c.f32", "--peak", "255",
        ],
    );
    let lines = stdout_lines(&out);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[2].parse::<f64>().unwrap(), 3.0);
    let upsnr: f64 = fields[3].parse().unwrap();
    assert!((upsnr - 43.359591061482483).abs() < 1e-12);
    assert_eq!(fields[4], "true");
}

#[test]
fn metrics_missing_peak_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["d.f32", "a.f32", "b.f32", "c.f32"] {
        write_f32(dir.path(), name, 2, &[1.0, 2.0]);
    }
    let out = cli(
        dir.path(),
        &[
            "metrics", "--denoised", "d.f32", "--ref-a", "a.f32", "--ref-b", "b.f32", "--ref-c",
            "c.f32",
        ],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "stderr not one line: {stderr}");
    assert!(stderr.starts_with("umetrics: error:"), "stderr: {stderr}");
}

#[test]
fn metrics_rejects_conflicting_modes() {
    let dir = tempfile::tempdir().unwrap();
    write_f32(dir.path(), "d.f32", 2, &[1.0, 2.0]);
    write_f32(dir.path(), "x.f32", 2, &[1.0, 2.0]);
    let out = cli(
        dir.path(),
        &[
            "metrics", "--denoised", "d.f32", "--clean", "x.f32", "--avg-refs", "x.f32", "--peak",
            "255",
        ],
    );
    assert!(!out.status.success());
}

#[test]
fn metrics_supervised_and_pooled_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_f32(dir.path(), "x1.f32", 2, &[1.0, 3.0]);
    write_f32(dir.path(), "d1.f32", 2, &[2.0, 1.0]);
    write_f32(dir.path(), "x2.f32", 2, &[5.0, 5.0]);
    write_f32(dir.path(), "d2.f32", 2, &[5.0, 6.0]);
    let out = cli(
        dir.path(),
        &[
            "metrics", "--clean", "x1.f32,x2.f32", "--denoised", "d1.f32,d2.f32", "--peak", "255",
        ],
    );
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "image,n,mse,psnr,valid");
    assert_eq!(lines.len(), 4); // header + 2 images + pooled
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[2].parse::<f64>().unwrap(), 2.5);
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(second[2].parse::<f64>().unwrap(), 0.5);
    let pooled: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(pooled[0], "pooled");
    assert_eq!(pooled[1], "4");
    // pooled MSE over the union of pixels: (1 + 4 + 0 + 1) / 4
    assert_eq!(pooled[2].parse::<f64>().unwrap(), 1.5);
}

#[test]
fn metrics_avg_refs_mode() {
    let dir = tempfile::tempdir().unwrap();
    write_f32(dir.path(), "d.f32", 1, &[0.0]);
    write_f32(dir.path(), "r1.f32", 1, &[2.0]);
    write_f32(dir.path(), "r2.f32", 1, &[4.0]);
    let out = cli(
        dir.path(),
        &["metrics", "--denoised", "d.f32", "--avg-refs", "r1.f32,r2.f32"],
    );
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "image,n,m,mse_avg");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[1], "1");
    assert_eq!(fields[2], "2");
    assert_eq!(fields[3].parse::<f64>().unwrap(), 9.0);
}

#[test]
fn metrics_bootstrap_columns_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut values = Vec::new();
    for i in 0..64 {
        values.push(100.0 + ((i * 37) % 17) as f64);
    }
    write_f32(dir.path(), "a.f32", 8, &values);
    let shifted: Vec<f64> = values.iter().map(|v| v + 2.0).collect();
    write_f32(dir.path(), "b.f32", 8, &shifted);
    let reversed: Vec<f64> = values.iter().rev().cloned().collect();
    write_f32(dir.path(), "c.f32", 8, &reversed);
    write_f32(dir.path(), "d.f32", 8, &vec![100.0; 64]);
    let args = [
        "metrics",
        "--denoised",
        "d.f32",
        "--ref-a",
        "a.f32",
        "--ref-b",
        "b.f32",
        "--ref-c",
        "c.f32",
        "--peak",
        "255",
        "--bootstrap",
        "300",
        "--alpha",
        "0.1",
        "--seed",
        "5",
    ];
    let first = stdout_lines(&cli(dir.path(), &args));
    let second = stdout_lines(&cli(dir.path(), &args));
    assert_eq!(first, second);
    let fields: Vec<&str> = first[1].split(',').collect();
    let ci_low: f64 = fields[5].parse().unwrap();
    let ci_high: f64 = fields[6].parse().unwrap();
    assert!(ci_low <= ci_high);
    assert!(!fields[9].is_empty(), "excluded_resamples column empty");
}

#[test]
fn subsample_partitions_pixels_and_writes_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..16).map(|i| i as f64).collect();
    write_f32(dir.path(), "in.f32", 4, &values);
    let out = cli(
        dir.path(),
        &[
            "subsample", "--input", "in.f32", "--mode", "rand", "--seed", "9", "--out-prefix",
            "out",
        ],
    );
    assert!(out.status.success());
    let mut pooled = Vec::new();
    for suffix in ["y", "a", "b", "c"] {
        let grid = umetrics::io::read_image(dir.path().join(format!("out_{suffix}.f32"))).unwrap();
        assert_eq!(grid.width(), 2);
        assert_eq!(grid.height(), 2);
        pooled.extend_from_slice(grid.data());
    }
    pooled.sort_by(f64::total_cmp);
    assert_eq!(pooled, values);

    let assignment = std::fs::read_to_string(dir.path().join("out_assignment.csv")).unwrap();
    let mut lines = assignment.lines();
    assert_eq!(lines.next().unwrap(), "block,pos_y,pos_a,pos_b,pos_c");
    assert_eq!(lines.count(), 4);
}

#[test]
fn subsample_rejects_odd_without_crop() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..15).map(|i| i as f64).collect();
    write_f32(dir.path(), "odd.f32", 5, &values);
    let out = cli(
        dir.path(),
        &["subsample", "--input", "odd.f32", "--out-prefix", "o"],
    );
    assert!(!out.status.success());

    let out = cli(
        dir.path(),
        &["subsample", "--input", "odd.f32", "--crop", "--out-prefix", "o"],
    );
    assert!(out.status.success());
    let grid = umetrics::io::read_image(dir.path().join("o_y.f32")).unwrap();
    assert_eq!((grid.width(), grid.height()), (2, 1));
}

#[test]
fn simulate_rejects_fractional_pgm_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(
        dir.path(),
        &[
            "simulate", "--clean", "constant:4x4:100", "--model", "gaussian:5", "--seed", "1",
            "--out-noisy", "bad.pgm", "--format", "pgm8",
        ],
    );
    assert!(!out.status.success(), "fractional PGM write must fail");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("refuses to quantize"), "stderr: {stderr}");
}

#[test]
fn metrics_subsampled_mode_runs_with_fixed_output() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli(
        dir.path(),
        &[
            "simulate", "--clean", "constant:8x8:100", "--model", "gaussian:10", "--seed", "3",
            "--out-noisy", "noisy.f32",
        ],
    );
    assert!(status.status.success());
    // Denoised stand-in: the noisy frame itself.
    let out = cli(
        dir.path(),
        &[
            "metrics", "--denoised", "noisy.f32", "--noisy", "noisy.f32", "--peak", "255",
            "--subsample", "det",
        ],
    );
    let lines = stdout_lines(&out);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[1], "16"); // 8x8 input -> 4x4 sub-images
    let umse: f64 = fields[2].parse().unwrap();
    assert!(umse.is_finite());
}

#[test]
fn experiment_runs_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("unbiasedness.cfg"),
        "kind = unbiasedness\n\
         clean = texture:32x32:128:30\n\
         noise = gaussian:25\n\
         denoiser = gaussian_smooth:2\n\
         trials = 300\n\
         peak = 255\n\
         seed = 11\n",
    )
    .unwrap();
    let out = cli(
        dir.path(),
        &["experiment", "--config", "unbiasedness.cfg", "--out-dir", "results"],
    );
    let lines = stdout_lines(&out);
    assert_eq!(
        lines[0],
        "kind,n,trials,true_mse,mean_umse,std_umse,standard_error,z"
    );
    let summary =
        std::fs::read_to_string(dir.path().join("results").join("summary.csv")).unwrap();
    let header = summary.lines().next().unwrap();
    for column in ["mean_umse", "true_mse", "z"] {
        assert!(header.split(',').any(|c| c == column), "missing {column}");
    }
    let trials = std::fs::read_to_string(dir.path().join("results").join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 301);
}

#[test]
fn experiment_bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "kind = coverage\n").unwrap();
    let out = cli(
        dir.path(),
        &["experiment", "--config", "bad.cfg", "--out-dir", "r"],
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("umetrics: error:"));
    assert!(!dir.path().join("r").exists());
}

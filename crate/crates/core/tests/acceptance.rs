//! Acceptance suite: one test per criterion, each printing a PASS line on
//! success (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Exact worked examples are checked to 1e-12 relative error;
//! statistical criteria run seeded Monte Carlo at pinned tolerances.

use std::path::Path;
use std::process::Command;

use rand::RngExt;

use umetrics::bootstrap::{bootstrap_ci, BootstrapConfig};
use umetrics::experiments::{
    self, CleanSource, DenoiserSpec, ExperimentConfig, ExperimentKind,
};
use umetrics::metrics;
use umetrics::seeds;
use umetrics::stats;
use umetrics::subsample::{spatial_subsample, SubImage, SubsampleMode};
use umetrics::synth::{add_noise, NoiseModel};
use umetrics::{ImageGrid, ReferenceSet};

const REL_TOL: f64 = 1e-12;

fn assert_rel(value: f64, expected: f64, what: &str) {
    if expected == 0.0 {
        assert_eq!(value, 0.0, "{what}: expected exact zero, got {value}");
    } else {
        let rel = ((value - expected) / expected).abs();
        assert!(
            rel <= REL_TOL,
            "{what}: {value} vs expected {expected} (relative error {rel:e})"
        );
    }
}

fn row(values: &[f64]) -> ImageGrid {
    ImageGrid::new(values.len(), 1, values.to_vec()).unwrap()
}

fn refs(a: &[f64], b: &[f64], c: &[f64]) -> ReferenceSet {
    ReferenceSet::new(row(a), row(a), row(b), row(c)).unwrap()
}

fn config(
    kind: ExperimentKind,
    clean: &str,
    noise: NoiseModel,
    denoiser: DenoiserSpec,
    trials: usize,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig::new(
        kind,
        CleanSource::parse(clean).unwrap(),
        noise,
        denoiser,
        trials,
        255.0,
        seed,
    )
}

#[test]
fn criterion_1_exact_formula_examples() {
    // MSE
    assert_rel(mse_of(&[1.0, 3.0], &[2.0, 1.0]), 2.5, "mse worked example");
    assert_rel(mse_of(&[5.0, 5.0], &[5.0, 5.0]), 0.0, "mse identity");

    // noise-variance correction term
    let nv = metrics::noise_variance_estimate(&row(&[2.0, 2.0]), &row(&[0.0, 0.0])).unwrap();
    assert_rel(nv, 2.0, "noise variance worked example");

    // uMSE and its per-pixel terms
    let r = refs(&[4.0, 0.0], &[2.0, 2.0], &[0.0, 0.0]);
    let f = row(&[1.0, 1.0]);
    assert_rel(metrics::umse(&r, &f).unwrap(), 3.0, "umse worked example");
    let per = metrics::use_per_pixel(&r, &f).unwrap();
    assert_rel(per[0], 7.0, "use term 0");
    assert_rel(per[1], -1.0, "use term 1");

    // PSNR
    assert_rel(metrics::psnr(65.025, 255.0).unwrap(), 30.0, "psnr 30 dB");
    assert_rel(
        metrics::psnr(255.0 * 255.0 / 100.0, 255.0).unwrap(),
        20.0,
        "psnr 20 dB",
    );

    // uPSNR composition of the Eq.-4 example
    let report = metrics::upsnr(&r, &f, 255.0).unwrap();
    assert_rel(
        report.value.unwrap(),
        43.359591061482483,
        "upsnr worked example",
    );

    // 2x2 deterministic decomposition
    let img = ImageGrid::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let out = spatial_subsample(&img, SubsampleMode::Deterministic, 0).unwrap();
    assert_rel(out.sub_y.data()[0], 1.0, "decomposition Y");
    assert_rel(out.sub_a.data()[0], 3.0, "decomposition A");
    assert_rel(out.sub_b.data()[0], 2.0, "decomposition B");
    assert_rel(out.sub_c.data()[0], 4.0, "decomposition C");

    // averaging-based MSE, m = 2
    let avg = metrics::mse_avg(&[row(&[2.0]), row(&[4.0])], &row(&[0.0])).unwrap();
    assert_rel(avg, 9.0, "mse_avg worked example");

    println!("criterion 1 (exact formula worked examples, 1e-12 relative): PASS");
}

fn mse_of(clean: &[f64], denoised: &[f64]) -> f64 {
    metrics::mse(&row(clean), &row(denoised)).unwrap()
}

#[test]
fn criterion_2_umse_is_unbiased() {
    // Gaussian noise on a band-limited texture, smoothing denoiser frozen.
    let cfg = config(
        ExperimentKind::Unbiasedness,
        "texture:128x128:128:30",
        NoiseModel::gaussian(55.0).unwrap(),
        DenoiserSpec::GaussianSmooth(2.0),
        10_000,
        0xC2A1,
    );
    let gaussian = experiments::run_unbiasedness(&cfg).unwrap();
    assert_eq!(gaussian.n, 128 * 128);
    assert!(
        gaussian.z.abs() <= 4.0,
        "gaussian: mean uMSE {} vs MSE {} gives |z| = {} > 4",
        gaussian.mean_umse,
        gaussian.true_mse,
        gaussian.z.abs()
    );

    // Poisson noise on a constant image with intensity 100.
    let cfg = config(
        ExperimentKind::Unbiasedness,
        "constant:128x128:100",
        NoiseModel::poisson(),
        DenoiserSpec::GaussianSmooth(2.0),
        10_000,
        0xC2A2,
    );
    let poisson = experiments::run_unbiasedness(&cfg).unwrap();
    assert!(
        poisson.z.abs() <= 4.0,
        "poisson: mean uMSE {} vs MSE {} gives |z| = {} > 4",
        poisson.mean_umse,
        poisson.true_mse,
        poisson.z.abs()
    );

    println!(
        "criterion 2 (unbiasedness, |z| <= 4): PASS (gaussian z = {:.3}, poisson z = {:.3})",
        gaussian.z, poisson.z
    );
}

#[test]
fn criterion_3_consistency_rate() {
    let mut cfg = config(
        ExperimentKind::ConsistencySlope,
        "constant:16x16:128",
        NoiseModel::gaussian(25.0).unwrap(),
        DenoiserSpec::Identity,
        2000,
        0xC3A1,
    );
    cfg.pixel_counts = vec![100, 1000, 10_000, 100_000];
    let report = experiments::run_consistency_slope(&cfg).unwrap();
    let slope = report.slope.unwrap();
    assert!(
        (-0.55..=-0.45).contains(&slope),
        "log-log slope of std(uMSE) vs n is {slope}, outside [-0.55, -0.45]"
    );

    // Doubling n should halve the variance within sampling error: check the
    // decade steps, whose variance ratio must be near 10.
    for pair in report.points.windows(2) {
        let ratio = (pair[0].std_umse / pair[1].std_umse).powi(2);
        assert!(
            (6.0..=16.0).contains(&ratio),
            "variance ratio across a decade of n is {ratio}, not near 10"
        );
    }

    println!("criterion 3 (consistency rate n^-1/2): PASS (slope = {slope:.4})");
}

#[test]
fn criterion_4_asymptotic_normality() {
    let mut cfg = config(
        ExperimentKind::Normality,
        "constant:16x16:128",
        NoiseModel::gaussian(25.0).unwrap(),
        DenoiserSpec::Identity,
        10_000,
        0xC4A1,
    );
    cfg.pixel_counts = vec![20, 1000];
    let report = experiments::run_normality(&cfg).unwrap();
    let ks_small = report.points[0].ks_distance;
    let ks_large = report.points[1].ks_distance;
    assert!(
        ks_large < 0.02,
        "KS distance at n = 1000 is {ks_large}, expected < 0.02"
    );
    assert!(
        ks_small > ks_large,
        "KS distance should shrink with n: n=20 gives {ks_small}, n=1000 gives {ks_large}"
    );

    println!(
        "criterion 4 (asymptotic normality): PASS (KS n=20: {ks_small:.4}, n=1000: {ks_large:.4})"
    );
}

#[test]
fn criterion_5_bootstrap_coverage() {
    let mut cfg = config(
        ExperimentKind::Coverage,
        "texture:64x64:128:30",
        NoiseModel::gaussian(25.0).unwrap(),
        DenoiserSpec::GaussianSmooth(2.0),
        1000,
        0xC5A1,
    );
    cfg.bootstrap = Some(BootstrapConfig::new(1000, 0.05, 0).unwrap());
    let report = experiments::run_coverage(&cfg).unwrap();
    assert_eq!(report.n, 4096);
    assert!(
        (0.93..=0.97).contains(&report.coverage),
        "coverage of nominal-95% intervals is {}, outside [0.93, 0.97]",
        report.coverage
    );

    println!(
        "criterion 5 (bootstrap coverage at alpha = 0.05): PASS (coverage = {:.3})",
        report.coverage
    );
}

#[test]
fn criterion_6_averaging_baseline_bias() {
    let mut cfg = config(
        ExperimentKind::AvgBaselineBias,
        "constant:64x64:128",
        NoiseModel::gaussian(15.0).unwrap(),
        DenoiserSpec::Identity,
        2000,
        0xC6A1,
    );
    cfg.reference_counts = vec![1, 3, 10, 100];
    let report = experiments::run_avg_baseline_bias(&cfg).unwrap();
    let expected = [225.0, 75.0, 22.5, 2.25];
    for (point, want) in report.points.iter().zip(expected) {
        assert_rel(point.analytic_bias, want, "analytic bias sigma^2/m");
        assert!(
            point.z.abs() <= 3.0,
            "m = {}: empirical bias {} vs analytic {} gives |z| = {} > 3",
            point.m,
            point.empirical_bias,
            point.analytic_bias,
            point.z.abs()
        );
    }

    println!(
        "criterion 6 (averaging-baseline bias sigma^2/m): PASS (z = {:?})",
        report
            .points
            .iter()
            .map(|p| (p.z * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_7_correction_term_calibration() {
    // Gaussian: E[(b-c)^2 / 2] = sigma^2, n = 10^6.
    let sigma = 55.0;
    let clean = ImageGrid::constant(1000, 1000, 500.0).unwrap();
    let model = NoiseModel::gaussian(sigma).unwrap();
    let b = add_noise(&clean, &model, seeds::mix(0xC7A1, 1)).unwrap();
    let c = add_noise(&clean, &model, seeds::mix(0xC7A1, 2)).unwrap();
    let nv = metrics::noise_variance_estimate(&b, &c).unwrap();
    let target = sigma * sigma;
    assert!(
        (nv - target).abs() <= 0.01 * target,
        "gaussian correction term {nv} vs sigma^2 = {target}"
    );

    // Poisson: the correction term estimates the intensity lambda.
    let lambda = 100.0;
    let clean = ImageGrid::constant(1000, 1000, lambda).unwrap();
    let b = add_noise(&clean, &NoiseModel::poisson(), seeds::mix(0xC7A2, 1)).unwrap();
    let c = add_noise(&clean, &NoiseModel::poisson(), seeds::mix(0xC7A2, 2)).unwrap();
    let nv_poisson = metrics::noise_variance_estimate(&b, &c).unwrap();
    assert!(
        (nv_poisson - lambda).abs() <= 0.01 * lambda,
        "poisson correction term {nv_poisson} vs lambda = {lambda}"
    );

    println!(
        "criterion 7 (correction-term calibration at n = 10^6, 1%): PASS \
         (gaussian {nv:.2} / {target}, poisson {nv_poisson:.3} / {lambda})"
    );
}

#[test]
fn criterion_8_subsampling_bias_trend() {
    // Sharp texture: both the clean-decomposition mismatch and the uMSE
    // bias must fall as the clean image is smoothed.
    let mut cfg = config(
        ExperimentKind::SubsamplingBiasSweep,
        "texture:256x256:128:50:1",
        NoiseModel::gaussian(10.0).unwrap(),
        DenoiserSpec::GaussianSmooth(2.0),
        200,
        0xC8A1,
    );
    cfg.smoothing_levels = vec![0.0, 1.0, 2.0, 4.0];
    let report = experiments::run_subsampling_bias_sweep(&cfg).unwrap();
    for pair in report.points.windows(2) {
        assert!(
            pair[1].reference_relative_rmse <= pair[0].reference_relative_rmse,
            "reference relative RMSE increased from sigma_s {} to {}: {} -> {}",
            pair[0].smoothing_sigma,
            pair[1].smoothing_sigma,
            pair[0].reference_relative_rmse,
            pair[1].reference_relative_rmse
        );
        assert!(
            pair[1].median_abs_diff <= pair[0].median_abs_diff,
            "median |uMSE_s - MSE| increased from sigma_s {} to {}: {} -> {}",
            pair[0].smoothing_sigma,
            pair[1].smoothing_sigma,
            pair[0].median_abs_diff,
            pair[1].median_abs_diff
        );
    }

    // Constant clean image: decomposition mismatch is exactly zero and the
    // subsampled uMSE is unbiased (z-test over per-trial differences).
    let mut cfg = config(
        ExperimentKind::SubsamplingBiasSweep,
        "constant:256x256:128",
        NoiseModel::gaussian(10.0).unwrap(),
        DenoiserSpec::GaussianSmooth(2.0),
        2000,
        0xC8A2,
    );
    cfg.smoothing_levels = vec![0.0];
    let constant = experiments::run_subsampling_bias_sweep(&cfg).unwrap();
    assert_eq!(constant.points[0].reference_relative_rmse, 0.0);
    let diffs: Vec<f64> = constant.raw[0].1.iter().map(|(u, m)| u - m).collect();
    let (mean, std) = stats::mean_and_std(&diffs);
    let z = mean / (std / (diffs.len() as f64).sqrt());
    assert!(
        z.abs() <= 4.0,
        "constant image: uMSE_s - MSE has |z| = {} > 4",
        z.abs()
    );

    let medians: Vec<f64> = report.points.iter().map(|p| p.median_abs_diff).collect();
    println!(
        "criterion 8 (subsampling bias falls with smoothing): PASS \
         (medians {medians:?}, constant-image z = {z:.3})"
    );
}

#[test]
fn criterion_9_structural_invariants() {
    // Partition property over 10^4 random images and seeds.
    let mut rng = seeds::stream(0xC9A1, 0);
    for trial in 0..10_000u64 {
        let width = 2 * rng.random_range(1..=6usize);
        let height = 2 * rng.random_range(1..=6usize);
        let img = ImageGrid::new(
            width,
            height,
            (0..width * height)
                .map(|_| rng.random_range(-100.0..100.0))
                .collect(),
        )
        .unwrap();
        let out = spatial_subsample(&img, SubsampleMode::Randomized, trial).unwrap();
        let mut pooled: Vec<f64> = Vec::with_capacity(img.len());
        for role in SubImage::ALL {
            pooled.extend_from_slice(out.sub_image(role).data());
        }
        pooled.sort_by(f64::total_cmp);
        let mut original = img.data().to_vec();
        original.sort_by(f64::total_cmp);
        assert_eq!(pooled, original, "partition violated at trial {trial}");
        for record in &out.assignment {
            let mut positions = *record;
            positions.sort_unstable();
            assert_eq!(positions, [1, 2, 3, 4]);
        }
    }

    // b <-> c symmetry and the uMSE = mean(uSE) identity, exact.
    let clean = ImageGrid::constant(32, 32, 50.0).unwrap();
    let model = NoiseModel::gaussian(12.0).unwrap();
    let reference_set =
        umetrics::synth::make_reference_set(&clean, &model, 0xC9A2).unwrap();
    let denoised = umetrics::synth::gaussian_smooth(reference_set.input_y(), 1.5).unwrap();
    let direct = metrics::umse(&reference_set, &denoised).unwrap();
    let swapped = metrics::umse(&reference_set.clone().with_swapped_bc(), &denoised).unwrap();
    assert_eq!(direct, swapped, "umse changed under b/c swap");
    let per_pixel = metrics::use_per_pixel(&reference_set, &denoised).unwrap();
    assert_eq!(direct, stats::mean(&per_pixel), "umse != mean(uSE)");

    // Monotone-map identity between bootstrap interval endpoints. With
    // K = 401 and alpha = 0.05 the quantile positions are integral, so the
    // endpoints are exact order statistics and the identity is exact.
    let use_values: Vec<f64> = per_pixel.iter().map(|v| v + 400.0).collect();
    let peak = 255.0;
    let ci = bootstrap_ci(
        &use_values,
        peak,
        &BootstrapConfig::new(401, 0.05, 0xC9A3).unwrap(),
    )
    .unwrap();
    assert_eq!(ci.excluded_resamples, 0);
    let (db_lo, db_hi) = ci.upsnr.unwrap();
    assert_eq!(db_lo, 10.0 * (peak * peak / ci.umse.1).log10());
    assert_eq!(db_hi, 10.0 * (peak * peak / ci.umse.0).log10());

    // CLI byte-determinism under fixed seeds.
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec![
            "simulate",
            "--clean",
            "texture:16x16:128:30",
            "--model",
            "gaussian:55",
            "--seed",
            "7",
            "--out-refs",
            "run",
        ],
        vec![
            "subsample",
            "--input",
            "run_y.f32",
            "--mode",
            "rand",
            "--seed",
            "3",
            "--out-prefix",
            "sub",
        ],
    ] {
        let first = cli_capture(&args, dir.path(), "first");
        let second = cli_capture(&args, dir.path(), "second");
        assert_eq!(first, second, "CLI outputs differ between identical runs");
    }

    println!("criterion 9 (structural invariants + CLI determinism): PASS");
}

/// Run the CLI in `dir/<label>`, returning the bytes of every produced file.
fn cli_capture(args: &[&str], dir: &Path, label: &str) -> Vec<(String, Vec<u8>)> {
    let workdir = dir.join(label);
    std::fs::create_dir_all(&workdir).unwrap();
    // The subsample step reads the files simulate wrote in the same dir.
    let status = Command::new(env!("CARGO_BIN_EXE_umetrics"))
        .args(args)
        .current_dir(&workdir)
        .status()
        .unwrap();
    assert!(status.success(), "CLI failed: {args:?}");
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&workdir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

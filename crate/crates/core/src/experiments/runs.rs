//! Monte Carlo runs verifying the statistical behaviour of the estimators:
//! centering of the uMSE on the true MSE, the n^{-1/2} consistency rate,
//! asymptotic normality, bootstrap interval coverage, the bias of the
//! averaging baseline, the bias introduced by spatial subsampling, and a
//! pixel-lag correlation diagnostic.
//!
//! Every run follows the fixed-denoiser protocol: the noisy input is drawn
//! once, denoised once, and frozen; only the noisy references are redrawn
//! across trials. Per-trial seeds are derived from the master seed by tag
//! mixing, and per-trial values are collected by trial index with
//! reductions in fixed index order, so parallel and sequential execution
//! produce identical results.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::bootstrap;
use crate::error::{Error, Result};
use crate::grid::{ImageGrid, ReferenceSet};
use crate::metrics;
use crate::seeds;
use crate::stats::{self, KahanSum};
use crate::subsample::{self, SubImage, SubsampleMode};
use crate::synth::{self, stream_tag, NoiseModel};

use super::config::{Axis, DenoiserSpec, ExperimentConfig, ExperimentKind};

// Stream-tag namespace for experiment seed derivation.
const TAG_CLEAN: u64 = 0xC1EA;
const TAG_SWEEP: u64 = 0x53EE;
const TAG_INPUT: u64 = 0x1287;
const TAG_TRIALS: u64 = 0x7214;
const TAG_SUBSAMPLE: u64 = 0x5B5A;
const TAG_BOOTSTRAP: u64 = 0xB007;

/// Frozen part of a run: clean image, the single noisy input draw, the
/// denoised estimate, and its exactly-known MSE.
struct FrozenSetup {
    clean: ImageGrid,
    input_y: ImageGrid,
    denoised: ImageGrid,
    true_mse: f64,
}

fn freeze(config: &ExperimentConfig, clean: ImageGrid, level_seed: u64) -> Result<FrozenSetup> {
    let input_y = synth::add_noise(&clean, &config.noise, seeds::mix(level_seed, TAG_INPUT))?;
    let denoised = config.denoiser.apply(&input_y)?;
    let true_mse = metrics::mse(&clean, &denoised)?;
    Ok(FrozenSetup {
        clean,
        input_y,
        denoised,
        true_mse,
    })
}

fn draw_references(
    setup: &FrozenSetup,
    noise: &NoiseModel,
    trial_seed: u64,
) -> Result<ReferenceSet> {
    ReferenceSet::new(
        setup.input_y.clone(),
        synth::add_noise(&setup.clean, noise, seeds::mix(trial_seed, stream_tag::REF_A))?,
        synth::add_noise(&setup.clean, noise, seeds::mix(trial_seed, stream_tag::REF_B))?,
        synth::add_noise(&setup.clean, noise, seeds::mix(trial_seed, stream_tag::REF_C))?,
    )
}

/// Per-trial uMSE values with references redrawn around the frozen setup.
fn umse_trials(
    setup: &FrozenSetup,
    config: &ExperimentConfig,
    level_seed: u64,
) -> Result<Vec<f64>> {
    let ns = seeds::mix(level_seed, TAG_TRIALS);
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let refs = draw_references(setup, &config.noise, seeds::mix(ns, t as u64))?;
            metrics::umse(&refs, &setup.denoised)
        })
        .collect()
}

fn validate_common(config: &ExperimentConfig) -> Result<()> {
    if config.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    metrics::check_peak(config.peak).map_err(|e| Error::Config(e.to_string()))
}

// ---------------------------------------------------------------------------
// Unbiasedness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct UnbiasednessReport {
    pub n: usize,
    pub trials: usize,
    pub true_mse: f64,
    pub mean_umse: f64,
    pub std_umse: f64,
    pub standard_error: f64,
    /// Standardized discrepancy (mean uMSE − MSE) / SE.
    pub z: f64,
    pub umse_values: Vec<f64>,
}

pub fn run_unbiasedness(config: &ExperimentConfig) -> Result<UnbiasednessReport> {
    validate_common(config)?;
    let clean = config.clean.build(seeds::mix(config.seed, TAG_CLEAN))?;
    let setup = freeze(config, clean, config.seed)?;
    let umse_values = umse_trials(&setup, config, config.seed)?;
    let (mean_umse, std_umse) = stats::mean_and_std(&umse_values);
    let standard_error = std_umse / (config.trials as f64).sqrt();
    let z = (mean_umse - setup.true_mse) / standard_error;
    Ok(UnbiasednessReport {
        n: setup.denoised.len(),
        trials: config.trials,
        true_mse: setup.true_mse,
        mean_umse,
        std_umse,
        standard_error,
        z,
        umse_values,
    })
}

// ---------------------------------------------------------------------------
// Consistency rate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct SlopePoint {
    pub n: usize,
    pub trials: usize,
    pub true_mse: f64,
    pub mean_umse: f64,
    pub std_umse: f64,
}

#[derive(Debug, Clone)]
pub struct ConsistencySlopeReport {
    pub points: Vec<SlopePoint>,
    /// Least-squares slope of log std(uMSE) against log n; absent for a
    /// degenerate sweep (fewer than two usable points).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub umse_values: Vec<(usize, Vec<f64>)>,
}

/// Dimensions with `w·h = n` as close to square as the divisors of n allow.
fn near_square_dims(n: usize) -> (usize, usize) {
    let mut d = (n as f64).sqrt().floor() as usize;
    d = d.max(1);
    while d > 1 && n % d != 0 {
        d -= 1;
    }
    (n / d, d)
}

pub fn run_consistency_slope(config: &ExperimentConfig) -> Result<ConsistencySlopeReport> {
    validate_common(config)?;
    if config.pixel_counts.is_empty() {
        return Err(Error::Config("pixel_counts must be nonempty".into()));
    }
    if config.pixel_counts.contains(&0) {
        return Err(Error::Config("pixel counts must be positive".into()));
    }
    let clean_seed = seeds::mix(config.seed, TAG_CLEAN);
    let mut points = Vec::new();
    let mut raw = Vec::new();
    for (i, &n) in config.pixel_counts.iter().enumerate() {
        let (w, h) = near_square_dims(n);
        let level = seeds::mix(seeds::mix(config.seed, TAG_SWEEP), i as u64);
        let clean = config.clean.build_at(w, h, clean_seed)?;
        let setup = freeze(config, clean, level)?;
        let values = umse_trials(&setup, config, level)?;
        let (mean_umse, std_umse) = stats::mean_and_std(&values);
        points.push(SlopePoint {
            n,
            trials: config.trials,
            true_mse: setup.true_mse,
            mean_umse,
            std_umse,
        });
        raw.push((n, values));
    }
    let usable: Vec<&SlopePoint> = points.iter().filter(|p| p.std_umse > 0.0).collect();
    let xs: Vec<f64> = usable.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.std_umse.ln()).collect();
    let fitted = stats::fit_line(&xs, &ys);
    Ok(ConsistencySlopeReport {
        points,
        slope: fitted.map(|(s, _)| s),
        intercept: fitted.map(|(_, b)| b),
        umse_values: raw,
    })
}

// ---------------------------------------------------------------------------
// Asymptotic normality
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct NormalityPoint {
    pub n: usize,
    pub trials: usize,
    pub ks_distance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Set when the trial count is too small for the KS statistic to mean
    /// much (fewer than 100 trials).
    pub low_power: bool,
}

#[derive(Debug, Clone)]
pub struct NormalityReport {
    pub points: Vec<NormalityPoint>,
    pub umse_values: Vec<(usize, Vec<f64>)>,
}

pub fn run_normality(config: &ExperimentConfig) -> Result<NormalityReport> {
    validate_common(config)?;
    if config.pixel_counts.is_empty() {
        return Err(Error::Config("pixel_counts must be nonempty".into()));
    }
    let clean_seed = seeds::mix(config.seed, TAG_CLEAN);
    let mut points = Vec::new();
    let mut raw = Vec::new();
    for (i, &n) in config.pixel_counts.iter().enumerate() {
        let (w, h) = near_square_dims(n);
        let level = seeds::mix(seeds::mix(config.seed, TAG_SWEEP), i as u64);
        let clean = config.clean.build_at(w, h, clean_seed)?;
        let setup = freeze(config, clean, level)?;
        let values = umse_trials(&setup, config, level)?;
        let (mean, std) = stats::mean_and_std(&values);
        if std == 0.0 {
            return Err(Error::DegenerateVariance(
                "uMSE trials have zero spread; cannot standardize",
            ));
        }
        let standardized: Vec<f64> = values.iter().map(|v| (v - mean) / std).collect();
        let ks_distance = stats::ks_distance_to_standard_normal(&standardized);
        let (skewness, excess_kurtosis) = stats::skewness_and_excess_kurtosis(&values);
        points.push(NormalityPoint {
            n,
            trials: config.trials,
            ks_distance,
            skewness,
            excess_kurtosis,
            low_power: config.trials < 100,
        });
        raw.push((n, values));
    }
    Ok(NormalityReport {
        points,
        umse_values: raw,
    })
}

// ---------------------------------------------------------------------------
// Bootstrap coverage
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub n: usize,
    pub trials: usize,
    pub true_mse: f64,
    /// Nominal coverage 1 − α.
    pub nominal: f64,
    /// Fraction of intervals containing the true MSE.
    pub coverage: f64,
    pub binomial_se: f64,
    /// Per-trial (ci_low, ci_high, contained).
    pub intervals: Vec<(f64, f64, bool)>,
}

pub fn run_coverage(config: &ExperimentConfig) -> Result<CoverageReport> {
    validate_common(config)?;
    let bcfg = config
        .bootstrap
        .ok_or_else(|| Error::Config("coverage requires bootstrap parameters".into()))?;
    let clean = config.clean.build(seeds::mix(config.seed, TAG_CLEAN))?;
    let setup = freeze(config, clean, config.seed)?;
    let ns = seeds::mix(config.seed, TAG_TRIALS);
    let intervals: Vec<(f64, f64, bool)> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64, bool)> {
            let trial_seed = seeds::mix(ns, t as u64);
            let refs = draw_references(&setup, &config.noise, trial_seed)?;
            let use_values = metrics::use_per_pixel(&refs, &setup.denoised)?;
            let ci = bootstrap::bootstrap_ci(
                &use_values,
                config.peak,
                &bcfg.with_seed(seeds::mix(trial_seed, TAG_BOOTSTRAP)),
            )?;
            let (lo, hi) = ci.umse;
            Ok((lo, hi, lo <= setup.true_mse && setup.true_mse <= hi))
        })
        .collect::<Result<_>>()?;
    let covered = intervals.iter().filter(|(_, _, c)| *c).count();
    let coverage = covered as f64 / config.trials as f64;
    let binomial_se = (coverage * (1.0 - coverage) / config.trials as f64).sqrt();
    Ok(CoverageReport {
        n: setup.denoised.len(),
        trials: config.trials,
        true_mse: setup.true_mse,
        nominal: 1.0 - bcfg.alpha(),
        coverage,
        binomial_se,
        intervals,
    })
}

// ---------------------------------------------------------------------------
// Averaging-baseline bias
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct AvgBiasPoint {
    pub m: usize,
    pub trials: usize,
    pub mean_mse_avg: f64,
    /// mean(MSE_avg) − true MSE.
    pub empirical_bias: f64,
    pub standard_error: f64,
    /// Expected bias: (pixel-averaged noise variance) / m.
    pub analytic_bias: f64,
    pub z: f64,
    pub mean_abs_error: f64,
}

#[derive(Debug, Clone)]
pub struct AvgBaselineBiasReport {
    pub true_mse: f64,
    /// Typical error of the 3-reference uMSE under the same protocol,
    /// measured as mean |uMSE − MSE| over the same number of trials.
    pub umse_mean_abs_error: f64,
    pub points: Vec<AvgBiasPoint>,
    /// Smallest tested m whose mean |MSE_avg − MSE| does not exceed the
    /// uMSE's typical error; absent when no tested m reaches it.
    pub matching_m: Option<usize>,
    /// Raw per-trial values; the m = 0 entry holds the uMSE baseline.
    pub raw: Vec<(usize, Vec<f64>)>,
}

pub fn run_avg_baseline_bias(config: &ExperimentConfig) -> Result<AvgBaselineBiasReport> {
    validate_common(config)?;
    if config.reference_counts.is_empty() {
        return Err(Error::Config("m_values must be nonempty".into()));
    }
    if config.reference_counts.contains(&0) {
        return Err(Error::Config("m values must be positive".into()));
    }
    let clean = config.clean.build(seeds::mix(config.seed, TAG_CLEAN))?;
    let setup = freeze(config, clean, config.seed)?;
    let mean_noise_variance = stats::kahan_sum(
        setup
            .clean
            .data()
            .iter()
            .map(|&x| config.noise.variance_at(x)),
    ) / setup.clean.len() as f64;

    // uMSE baseline at sweep level 0.
    let umse_values = umse_trials(&setup, config, seeds::mix(config.seed, TAG_SWEEP))?;
    let umse_mean_abs_error = stats::kahan_sum(
        umse_values.iter().map(|v| (v - setup.true_mse).abs()),
    ) / config.trials as f64;

    let mut points = Vec::new();
    let mut raw = vec![(0usize, umse_values)];
    for (i, &m) in config.reference_counts.iter().enumerate() {
        let level = seeds::mix(seeds::mix(config.seed, TAG_SWEEP), (i + 1) as u64);
        let ns = seeds::mix(level, TAG_TRIALS);
        let values: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> Result<f64> {
                let trial_seed = seeds::mix(ns, t as u64);
                let refs: Vec<ImageGrid> = (0..m)
                    .map(|j| {
                        synth::add_noise(&setup.clean, &config.noise, seeds::mix(trial_seed, j as u64))
                    })
                    .collect::<Result<_>>()?;
                metrics::mse_avg(&refs, &setup.denoised)
            })
            .collect::<Result<_>>()?;
        let (mean_mse_avg, std) = stats::mean_and_std(&values);
        let standard_error = std / (config.trials as f64).sqrt();
        let empirical_bias = mean_mse_avg - setup.true_mse;
        let analytic_bias = mean_noise_variance / m as f64;
        let mean_abs_error = stats::kahan_sum(
            values.iter().map(|v| (v - setup.true_mse).abs()),
        ) / config.trials as f64;
        points.push(AvgBiasPoint {
            m,
            trials: config.trials,
            mean_mse_avg,
            empirical_bias,
            standard_error,
            analytic_bias,
            z: (empirical_bias - analytic_bias) / standard_error,
            mean_abs_error,
        });
        raw.push((m, values));
    }

    let mut sorted_points: Vec<&AvgBiasPoint> = points.iter().collect();
    sorted_points.sort_by_key(|p| p.m);
    let matching_m = sorted_points
        .iter()
        .find(|p| p.mean_abs_error <= umse_mean_abs_error)
        .map(|p| p.m);

    Ok(AvgBaselineBiasReport {
        true_mse: setup.true_mse,
        umse_mean_abs_error,
        points,
        matching_m,
        raw,
    })
}

// ---------------------------------------------------------------------------
// Subsampling bias sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub smoothing_sigma: f64,
    pub trials: usize,
    /// Relative RMS difference between the four clean sub-images.
    pub reference_relative_rmse: f64,
    pub median_abs_diff: f64,
    pub mean_abs_diff: f64,
}

#[derive(Debug, Clone)]
pub struct SubsamplingBiasSweepReport {
    pub points: Vec<SweepPoint>,
    /// Per smoothing level: per-trial (uMSE_s, MSE) pairs.
    pub raw: Vec<(f64, Vec<(f64, f64)>)>,
}

/// For each smoothing level, smooth the clean image, decompose its noisy
/// version, and compare the subsampled uMSE against the true MSE measured
/// on the matching sub-grids. The denoiser consumes the sub-image Y (so
/// the estimate stays independent of the references A, B, C, and any bias
/// comes only from clean-content mismatch between the sub-images); the
/// clean image is paired with Y by identical block position.
pub fn run_subsampling_bias_sweep(
    config: &ExperimentConfig,
) -> Result<SubsamplingBiasSweepReport> {
    validate_common(config)?;
    if config.smoothing_levels.is_empty() {
        return Err(Error::Config("smooth_levels must be nonempty".into()));
    }
    if matches!(config.denoiser, DenoiserSpec::ExternalFile(_)) {
        return Err(Error::Config(
            "subsampling_bias_sweep cannot use an external denoised file".into(),
        ));
    }
    let base = config.clean.build(seeds::mix(config.seed, TAG_CLEAN))?;
    let base = subsample::crop_to_even(&base)?;

    let mut points = Vec::new();
    let mut raw = Vec::new();
    for (i, &sigma_s) in config.smoothing_levels.iter().enumerate() {
        let clean_s = if sigma_s > 0.0 {
            synth::gaussian_smooth(&base, sigma_s)?
        } else {
            base.clone()
        };
        let rel_rmse = reference_relative_rmse(&clean_s)?;
        let level = seeds::mix(seeds::mix(config.seed, TAG_SWEEP), i as u64);
        let ns = seeds::mix(level, TAG_TRIALS);
        let pairs: Vec<(f64, f64)> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64)> {
                let trial_seed = seeds::mix(ns, t as u64);
                let noisy = synth::add_noise(&clean_s, &config.noise, seeds::mix(trial_seed, 0))?;
                let decomposition = subsample::spatial_subsample(
                    &noisy,
                    config.subsample_mode,
                    seeds::mix(trial_seed, TAG_SUBSAMPLE),
                )?;
                let denoised_sub = config.denoiser.apply(&decomposition.sub_y)?;
                let clean_sub = decomposition.extract_matching(&clean_s, SubImage::Y)?;
                let refs = decomposition.to_reference_set();
                let umse_s = metrics::umse(&refs, &denoised_sub)?;
                let true_mse = metrics::mse(&clean_sub, &denoised_sub)?;
                Ok((umse_s, true_mse))
            })
            .collect::<Result<_>>()?;
        let abs_diffs: Vec<f64> = pairs.iter().map(|(u, m)| (u - m).abs()).collect();
        points.push(SweepPoint {
            smoothing_sigma: sigma_s,
            trials: config.trials,
            reference_relative_rmse: rel_rmse,
            median_abs_diff: stats::median(&abs_diffs),
            mean_abs_diff: stats::mean(&abs_diffs),
        });
        raw.push((sigma_s, pairs));
    }
    Ok(SubsamplingBiasSweepReport { points, raw })
}

/// Relative RMS difference between the four clean sub-images obtained by
/// deterministic spatial decomposition: the RMS over all six sub-image
/// pairs, divided by the RMS intensity of the clean image. Zero exactly
/// when the image is constant on every 2×2 block.
pub fn reference_relative_rmse(clean: &ImageGrid) -> Result<f64> {
    let out = subsample::spatial_subsample(clean, SubsampleMode::Deterministic, 0)?;
    let subs = [&out.sub_y, &out.sub_a, &out.sub_b, &out.sub_c];
    let n_sub = subs[0].len();
    let mut acc = KahanSum::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            for (p, q) in subs[i].data().iter().zip(subs[j].data()) {
                let d = p - q;
                acc.add(d * d);
            }
        }
    }
    let pooled_ms = acc.value() / (6 * n_sub) as f64;
    let signal_ms = stats::kahan_sum(clean.data().iter().map(|&v| v * v)) / clean.len() as f64;
    if signal_ms == 0.0 {
        return Err(Error::param(
            "clean image is identically zero; relative RMSE is undefined",
        ));
    }
    Ok((pooled_ms / signal_ms).sqrt())
}

// ---------------------------------------------------------------------------
// Pixel-lag correlation diagnostic
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LagCorrelationReport {
    pub frames: usize,
    pub max_lag: usize,
    pub axis: Axis,
    /// Pearson correlation at lag j, indexed j − 1.
    pub correlations: Vec<f64>,
}

/// Pearson correlation between residual pixels at offsets 1..=max_lag
/// along the given axis, pooled over frames. Residuals subtract the
/// per-pixel mean across all supplied frames.
pub fn lag_correlation(
    frames: &[ImageGrid],
    max_lag: usize,
    axis: Axis,
) -> Result<Vec<f64>> {
    if frames.len() < 2 {
        return Err(Error::param(
            "lag correlation needs at least 2 frames to estimate the cross-frame mean",
        ));
    }
    let first = &frames[0];
    for f in frames {
        first.check_same_shape(f)?;
    }
    let extent = match axis {
        Axis::Horizontal => first.width(),
        Axis::Vertical => first.height(),
    };
    if max_lag == 0 || max_lag >= extent {
        return Err(Error::param(format!(
            "max_lag must lie in 1..{extent} for this image size"
        )));
    }

    let n = first.len();
    let mut mean = vec![0.0f64; n];
    for f in frames {
        for (m, &v) in mean.iter_mut().zip(f.data()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= frames.len() as f64;
    }
    let residuals: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| f.data().iter().zip(&mean).map(|(&v, &m)| v - m).collect())
        .collect();

    let (w, h) = (first.width(), first.height());
    let mut out = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let mut su = KahanSum::new();
        let mut sv = KahanSum::new();
        let mut suu = KahanSum::new();
        let mut svv = KahanSum::new();
        let mut suv = KahanSum::new();
        let mut count = 0usize;
        for r in residuals.iter() {
            match axis {
                Axis::Horizontal => {
                    for row in 0..h {
                        for col in 0..w - lag {
                            let u = r[row * w + col];
                            let v = r[row * w + col + lag];
                            accumulate(&mut su, &mut sv, &mut suu, &mut svv, &mut suv, u, v);
                            count += 1;
                        }
                    }
                }
                Axis::Vertical => {
                    for row in 0..h - lag {
                        for col in 0..w {
                            let u = r[row * w + col];
                            let v = r[(row + lag) * w + col];
                            accumulate(&mut su, &mut sv, &mut suu, &mut svv, &mut suv, u, v);
                            count += 1;
                        }
                    }
                }
            }
        }
        let cnt = count as f64;
        let mu = su.value() / cnt;
        let mv = sv.value() / cnt;
        let var_u = suu.value() / cnt - mu * mu;
        let var_v = svv.value() / cnt - mv * mv;
        if var_u <= 0.0 || var_v <= 0.0 {
            return Err(Error::DegenerateVariance(
                "residuals are constant along the requested axis",
            ));
        }
        let cov = suv.value() / cnt - mu * mv;
        out.push(cov / (var_u * var_v).sqrt());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn accumulate(
    su: &mut KahanSum,
    sv: &mut KahanSum,
    suu: &mut KahanSum,
    svv: &mut KahanSum,
    suv: &mut KahanSum,
    u: f64,
    v: f64,
) {
    su.add(u);
    sv.add(v);
    suu.add(u * u);
    svv.add(v * v);
    suv.add(u * v);
}

pub fn run_lag_correlation(config: &ExperimentConfig) -> Result<LagCorrelationReport> {
    validate_common(config)?;
    if config.frames < 2 {
        return Err(Error::Config("lag_correlation requires at least 2 frames".into()));
    }
    let clean = config.clean.build(seeds::mix(config.seed, TAG_CLEAN))?;
    let ns = seeds::mix(config.seed, TAG_TRIALS);
    let frames: Vec<ImageGrid> = (0..config.frames)
        .map(|f| -> Result<ImageGrid> {
            let noisy = synth::add_noise(&clean, &config.noise, seeds::mix(ns, f as u64))?;
            config.denoiser.apply(&noisy)
        })
        .collect::<Result<_>>()?;
    let correlations = lag_correlation(&frames, config.max_lag, config.axis)?;
    Ok(LagCorrelationReport {
        frames: config.frames,
        max_lag: config.max_lag,
        axis: config.axis,
        correlations,
    })
}

// ---------------------------------------------------------------------------
// Dispatch and CSV output
// ---------------------------------------------------------------------------

/// Result of one experiment run, dispatchable to CSV.
#[derive(Debug, Clone)]
pub enum ExperimentReport {
    Unbiasedness(UnbiasednessReport),
    ConsistencySlope(ConsistencySlopeReport),
    Normality(NormalityReport),
    Coverage(CoverageReport),
    AvgBaselineBias(AvgBaselineBiasReport),
    SubsamplingBiasSweep(SubsamplingBiasSweepReport),
    LagCorrelation(LagCorrelationReport),
}

/// Run the experiment described by the config.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    Ok(match config.kind {
        ExperimentKind::Unbiasedness => ExperimentReport::Unbiasedness(run_unbiasedness(config)?),
        ExperimentKind::ConsistencySlope => {
            ExperimentReport::ConsistencySlope(run_consistency_slope(config)?)
        }
        ExperimentKind::Normality => ExperimentReport::Normality(run_normality(config)?),
        ExperimentKind::Coverage => ExperimentReport::Coverage(run_coverage(config)?),
        ExperimentKind::AvgBaselineBias => {
            ExperimentReport::AvgBaselineBias(run_avg_baseline_bias(config)?)
        }
        ExperimentKind::SubsamplingBiasSweep => {
            ExperimentReport::SubsamplingBiasSweep(run_subsampling_bias_sweep(config)?)
        }
        ExperimentKind::LagCorrelation => {
            ExperimentReport::LagCorrelation(run_lag_correlation(config)?)
        }
    })
}

fn write_csv(path: &Path, header: &str, rows: Vec<String>) -> Result<()> {
    let mut body = String::with_capacity(header.len() + 1 + rows.len() * 32);
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(&row);
        body.push('\n');
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

impl ExperimentReport {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Self::Unbiasedness(_) => ExperimentKind::Unbiasedness,
            Self::ConsistencySlope(_) => ExperimentKind::ConsistencySlope,
            Self::Normality(_) => ExperimentKind::Normality,
            Self::Coverage(_) => ExperimentKind::Coverage,
            Self::AvgBaselineBias(_) => ExperimentKind::AvgBaselineBias,
            Self::SubsamplingBiasSweep(_) => ExperimentKind::SubsamplingBiasSweep,
            Self::LagCorrelation(_) => ExperimentKind::LagCorrelation,
        }
    }

    /// Write `trials.csv` (one row per trial or sweep point) and
    /// `summary.csv` into `dir`, creating it if needed. Column layouts are
    /// documented in the README; numbers use Rust's shortest round-trip
    /// decimal formatting.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let trials_path = dir.join("trials.csv");
        let summary_path = dir.join("summary.csv");
        match self {
            Self::Unbiasedness(r) => {
                write_csv(
                    &trials_path,
                    "trial,umse",
                    r.umse_values
                        .iter()
                        .enumerate()
                        .map(|(t, v)| format!("{t},{v}"))
                        .collect(),
                )?;
                write_csv(
                    &summary_path,
                    "kind,n,trials,true_mse,mean_umse,std_umse,standard_error,z",
                    vec![format!(
                        "unbiasedness,{},{},{},{},{},{},{}",
                        r.n, r.trials, r.true_mse, r.mean_umse, r.std_umse, r.standard_error, r.z
                    )],
                )
            }
            Self::ConsistencySlope(r) => {
                let mut rows = Vec::new();
                for (n, values) in &r.umse_values {
                    for (t, v) in values.iter().enumerate() {
                        rows.push(format!("{n},{t},{v}"));
                    }
                }
                write_csv(&trials_path, "n,trial,umse", rows)?;
                let slope = opt(r.slope);
                let intercept = opt(r.intercept);
                write_csv(
                    &summary_path,
                    "kind,n,trials,true_mse,mean_umse,std_umse,slope,intercept",
                    r.points
                        .iter()
                        .map(|p| {
                            format!(
                                "consistency_slope,{},{},{},{},{},{slope},{intercept}",
                                p.n, p.trials, p.true_mse, p.mean_umse, p.std_umse
                            )
                        })
                        .collect(),
                )
            }
            Self::Normality(r) => {
                let mut rows = Vec::new();
                for (n, values) in &r.umse_values {
                    for (t, v) in values.iter().enumerate() {
                        rows.push(format!("{n},{t},{v}"));
                    }
                }
                write_csv(&trials_path, "n,trial,umse", rows)?;
                write_csv(
                    &summary_path,
                    "kind,n,trials,ks_distance,skewness,excess_kurtosis,low_power",
                    r.points
                        .iter()
                        .map(|p| {
                            format!(
                                "normality,{},{},{},{},{},{}",
                                p.n,
                                p.trials,
                                p.ks_distance,
                                p.skewness,
                                p.excess_kurtosis,
                                p.low_power
                            )
                        })
                        .collect(),
                )
            }
            Self::Coverage(r) => {
                write_csv(
                    &trials_path,
                    "trial,ci_low,ci_high,contained",
                    r.intervals
                        .iter()
                        .enumerate()
                        .map(|(t, (lo, hi, c))| format!("{t},{lo},{hi},{c}"))
                        .collect(),
                )?;
                write_csv(
                    &summary_path,
                    "kind,n,trials,true_mse,nominal,coverage,binomial_se",
                    vec![format!(
                        "coverage,{},{},{},{},{},{}",
                        r.n, r.trials, r.true_mse, r.nominal, r.coverage, r.binomial_se
                    )],
                )
            }
            Self::AvgBaselineBias(r) => {
                let mut rows = Vec::new();
                for (m, values) in &r.raw {
                    for (t, v) in values.iter().enumerate() {
                        rows.push(format!("{m},{t},{v}"));
                    }
                }
                write_csv(&trials_path, "m,trial,value", rows)?;
                let matching = r.matching_m.map(|m| m.to_string()).unwrap_or_default();
                write_csv(
                    &summary_path,
                    "kind,m,trials,true_mse,mean_mse_avg,empirical_bias,standard_error,analytic_bias,z,mean_abs_error,umse_mean_abs_error,matching_m",
                    r.points
                        .iter()
                        .map(|p| {
                            format!(
                                "avg_baseline_bias,{},{},{},{},{},{},{},{},{},{},{matching}",
                                p.m,
                                p.trials,
                                r.true_mse,
                                p.mean_mse_avg,
                                p.empirical_bias,
                                p.standard_error,
                                p.analytic_bias,
                                p.z,
                                p.mean_abs_error,
                                r.umse_mean_abs_error
                            )
                        })
                        .collect(),
                )
            }
            Self::SubsamplingBiasSweep(r) => {
                let mut rows = Vec::new();
                for (sigma, pairs) in &r.raw {
                    for (t, (u, m)) in pairs.iter().enumerate() {
                        rows.push(format!("{sigma},{t},{u},{m},{}", (u - m).abs()));
                    }
                }
                write_csv(&trials_path, "smoothing_sigma,trial,umse_s,mse,abs_diff", rows)?;
                write_csv(
                    &summary_path,
                    "kind,smoothing_sigma,trials,reference_relative_rmse,median_abs_diff,mean_abs_diff",
                    r.points
                        .iter()
                        .map(|p| {
                            format!(
                                "subsampling_bias_sweep,{},{},{},{},{}",
                                p.smoothing_sigma,
                                p.trials,
                                p.reference_relative_rmse,
                                p.median_abs_diff,
                                p.mean_abs_diff
                            )
                        })
                        .collect(),
                )
            }
            Self::LagCorrelation(r) => {
                write_csv(
                    &trials_path,
                    "lag,correlation",
                    r.correlations
                        .iter()
                        .enumerate()
                        .map(|(i, c)| format!("{},{c}", i + 1))
                        .collect(),
                )?;
                write_csv(
                    &summary_path,
                    "kind,frames,axis,max_lag",
                    vec![format!(
                        "lag_correlation,{},{},{}",
                        r.frames,
                        r.axis.label(),
                        r.max_lag
                    )],
                )
            }
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

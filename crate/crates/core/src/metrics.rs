//! Supervised and unsupervised denoising-quality metrics.
//!
//! The supervised MSE compares a denoised estimate against the clean signal.
//! The unsupervised variants replace the clean signal with noisy references:
//! the squared difference against reference `a` overshoots the MSE by the
//! noise variance, and half the squared difference between references `b`
//! and `c` estimates exactly that variance, so subtracting it debiases the
//! estimate. All means are compensated sums in f64.

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, ReferenceSet};
use crate::stats;

/// Which metric a [`MetricReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Mse,
    Umse,
    Psnr,
    Upsnr,
    MseAvg,
}

impl MetricKind {
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Umse => "umse",
            MetricKind::Psnr => "psnr",
            MetricKind::Upsnr => "upsnr",
            MetricKind::MseAvg => "mse_avg",
        }
    }
}

/// A metric value plus the context needed to interpret it.
///
/// `value` is `None` exactly when `valid` is false, which happens only for
/// PSNR-family metrics whose underlying (u)MSE was not positive. The value
/// is never clamped to fake a finite decibel number. A percentile-bootstrap
/// interval may exclude the point estimate; `ci` only guarantees low ≤ high.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub kind: MetricKind,
    pub value: Option<f64>,
    pub n: usize,
    pub peak: Option<f64>,
    pub valid: bool,
    pub ci: Option<(f64, f64)>,
}

impl MetricReport {
    pub fn valued(kind: MetricKind, value: f64, n: usize, peak: Option<f64>) -> Self {
        Self {
            kind,
            value: Some(value),
            n,
            peak,
            valid: true,
            ci: None,
        }
    }

    pub fn undefined(kind: MetricKind, n: usize, peak: Option<f64>) -> Self {
        Self {
            kind,
            value: None,
            n,
            peak,
            valid: false,
            ci: None,
        }
    }

    pub fn with_ci(mut self, ci: Option<(f64, f64)>) -> Self {
        if let Some((lo, hi)) = ci {
            debug_assert!(lo <= hi);
        }
        self.ci = ci;
        self
    }
}

pub(crate) fn check_peak(peak: f64) -> Result<()> {
    if peak.is_finite() && peak > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("peak must be positive, got {peak}")))
    }
}

#[inline]
fn squared_error(clean: f64, denoised: f64) -> f64 {
    let d = clean - denoised;
    d * d
}

/// Per-pixel unsupervised squared error:
/// `(a_i − f_i)² − (b_i − c_i)²/2`. Entries may be negative.
#[inline]
fn unsupervised_squared_error(a: f64, b: f64, c: f64, denoised: f64) -> f64 {
    let d = a - denoised;
    let e = b - c;
    d * d - e * e / 2.0
}

/// Mean squared error between the clean signal and the estimate.
pub fn mse(clean: &ImageGrid, denoised: &ImageGrid) -> Result<f64> {
    clean.check_same_shape(denoised)?;
    let sum = stats::kahan_sum(
        clean
            .data()
            .iter()
            .zip(denoised.data())
            .map(|(&x, &f)| squared_error(x, f)),
    );
    Ok(sum / clean.len() as f64)
}

/// Per-pixel squared errors; their compensated mean equals [`mse`] exactly.
pub fn se_per_pixel(clean: &ImageGrid, denoised: &ImageGrid) -> Result<Vec<f64>> {
    clean.check_same_shape(denoised)?;
    Ok(clean
        .data()
        .iter()
        .zip(denoised.data())
        .map(|(&x, &f)| squared_error(x, f))
        .collect())
}

/// Unsupervised mean squared error computed from three noisy references.
///
/// May be negative when estimator noise exceeds the signal; callers that
/// need a decibel value must handle that case (see [`upsnr`]).
pub fn umse(refs: &ReferenceSet, denoised: &ImageGrid) -> Result<f64> {
    refs.input_y().check_same_shape(denoised)?;
    let sum = stats::kahan_sum(use_terms(refs, denoised));
    Ok(sum / refs.len() as f64)
}

/// Per-pixel unsupervised squared errors; the resampling unit for the
/// bootstrap. Their compensated mean equals [`umse`] exactly.
pub fn use_per_pixel(refs: &ReferenceSet, denoised: &ImageGrid) -> Result<Vec<f64>> {
    refs.input_y().check_same_shape(denoised)?;
    Ok(use_terms(refs, denoised).collect())
}

fn use_terms<'a>(
    refs: &'a ReferenceSet,
    denoised: &'a ImageGrid,
) -> impl Iterator<Item = f64> + 'a {
    let a = refs.ref_a().data();
    let b = refs.ref_b().data();
    let c = refs.ref_c().data();
    let f = denoised.data();
    (0..f.len()).map(move |i| unsupervised_squared_error(a[i], b[i], c[i], f[i]))
}

/// Noise-variance estimate from two independent references:
/// mean of `(b_i − c_i)²/2`.
pub fn noise_variance_estimate(ref_b: &ImageGrid, ref_c: &ImageGrid) -> Result<f64> {
    ref_b.check_same_shape(ref_c)?;
    let sum = stats::kahan_sum(ref_b.data().iter().zip(ref_c.data()).map(|(&b, &c)| {
        let d = b - c;
        d * d / 2.0
    }));
    Ok(sum / ref_b.len() as f64)
}

/// Peak signal-to-noise ratio in dB: `10·log10(peak² / mse_value)`.
///
/// Fails with [`Error::UndefinedPsnr`] when `mse_value` is not positive;
/// the caller decides how to surface that (see [`upsnr`]).
pub fn psnr(mse_value: f64, peak: f64) -> Result<f64> {
    check_peak(peak)?;
    if !(mse_value > 0.0) {
        return Err(Error::UndefinedPsnr { mse: mse_value });
    }
    Ok(10.0 * (peak * peak / mse_value).log10())
}

/// Unsupervised PSNR. When the underlying uMSE is not positive the report
/// carries `valid = false` and no value.
pub fn upsnr(refs: &ReferenceSet, denoised: &ImageGrid, peak: f64) -> Result<MetricReport> {
    check_peak(peak)?;
    let u = umse(refs, denoised)?;
    Ok(match psnr(u, peak) {
        Ok(db) => MetricReport::valued(MetricKind::Upsnr, db, refs.len(), Some(peak)),
        Err(Error::UndefinedPsnr { .. }) => {
            MetricReport::undefined(MetricKind::Upsnr, refs.len(), Some(peak))
        }
        Err(e) => return Err(e),
    })
}

/// MSE against the pixel-wise average of `m` noisy references. A biased
/// estimator of the true MSE: its mean overshoots by (noise variance)/m.
pub fn mse_avg(references: &[ImageGrid], denoised: &ImageGrid) -> Result<f64> {
    let first = references.first().ok_or(Error::Empty("reference list"))?;
    for r in references {
        first.check_same_shape(r)?;
    }
    first.check_same_shape(denoised)?;
    let m = references.len() as f64;
    let n = denoised.len();
    let sum = stats::kahan_sum((0..n).map(|i| {
        let avg = stats::kahan_sum(references.iter().map(|r| r.data()[i])) / m;
        squared_error(avg, denoised.data()[i])
    }));
    Ok(sum / n as f64)
}

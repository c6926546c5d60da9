//! Percentile-bootstrap confidence intervals for uMSE and uPSNR.
//!
//! The resampling unit is the per-pixel uSE term: each resample draws n
//! indices uniformly with replacement, averages the selected terms into a
//! resampled uMSE, and maps positive resamples through the PSNR transform.
//! Interval endpoints are the (α/2, 1−α/2) empirical quantiles of the
//! resample statistics, interpolated between order statistics.
//!
//! Resamples with non-positive uMSE have no decibel value; they are
//! excluded from the uPSNR quantile set and counted, and the uPSNR interval
//! is withheld entirely when more than half the resamples are excluded.

use rand::RngExt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics;
use crate::seeds;
use crate::stats::{self, KahanSum};

/// Bootstrap parameters. `resamples` is the number of with-replacement
/// resamples K, `alpha` the miscoverage level of the 1−α interval.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapConfig {
    resamples: usize,
    alpha: f64,
    seed: u64,
}

impl BootstrapConfig {
    pub const DEFAULT_RESAMPLES: usize = 1000;

    pub fn new(resamples: usize, alpha: f64, seed: u64) -> Result<Self> {
        if resamples < 2 {
            return Err(Error::param(format!(
                "bootstrap needs at least 2 resamples, got {resamples}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!(
                "alpha must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        Ok(Self {
            resamples,
            alpha,
            seed,
        })
    }

    pub fn resamples(&self) -> usize {
        self.resamples
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Confidence intervals from one bootstrap run.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapCi {
    /// (α/2, 1−α/2) quantiles of the resampled uMSE values.
    pub umse: (f64, f64),
    /// Quantiles of the defined uPSNR resamples; absent when more than 50%
    /// of resamples had non-positive uMSE.
    pub upsnr: Option<(f64, f64)>,
    /// Resamples excluded from the uPSNR quantile set.
    pub excluded_resamples: usize,
    /// Total resamples drawn (K).
    pub resamples: usize,
}

/// Bootstrap confidence intervals over a vector of per-pixel uSE terms.
///
/// Deterministic for a given (values, config): resample k draws its indices
/// from a stream seeded by mixing the config seed with k, so results do not
/// depend on scheduling.
pub fn bootstrap_ci(use_values: &[f64], peak: f64, config: &BootstrapConfig) -> Result<BootstrapCi> {
    if use_values.is_empty() {
        return Err(Error::Empty("bootstrap input"));
    }
    metrics::check_peak(peak)?;

    let n = use_values.len();
    let mut umse_resamples: Vec<f64> = (0..config.resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeds::stream(config.seed, k as u64);
            let mut acc = KahanSum::new();
            for _ in 0..n {
                acc.add(use_values[rng.random_range(0..n)]);
            }
            acc.value() / n as f64
        })
        .collect();

    let upsnr_resamples: Vec<f64> = umse_resamples
        .iter()
        .filter(|&&u| u > 0.0)
        .map(|&u| 10.0 * (peak * peak / u).log10())
        .collect();
    let excluded = config.resamples - upsnr_resamples.len();

    umse_resamples.sort_by(f64::total_cmp);
    let lo_p = config.alpha / 2.0;
    let hi_p = 1.0 - config.alpha / 2.0;
    let umse_ci = (
        stats::quantile_type7(&umse_resamples, lo_p),
        stats::quantile_type7(&umse_resamples, hi_p),
    );

    let upsnr_ci = if excluded * 2 > config.resamples {
        None
    } else {
        let mut sorted = upsnr_resamples;
        sorted.sort_by(f64::total_cmp);
        Some((
            stats::quantile_type7(&sorted, lo_p),
            stats::quantile_type7(&sorted, hi_p),
        ))
    };

    Ok(BootstrapCi {
        umse: umse_ci,
        upsnr: upsnr_ci,
        excluded_resamples: excluded,
        resamples: config.resamples,
    })
}

//! Declarative Monte Carlo study descriptions, parseable from a plain-text
//! `key = value` config file (see the README for the full key list).

use std::path::PathBuf;

use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::io;
use crate::metrics::check_peak;
use crate::patterns;
use crate::subsample::SubsampleMode;
use crate::synth::{self, NoiseModel};

/// Which statistical property a run verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Unbiasedness,
    ConsistencySlope,
    Normality,
    Coverage,
    AvgBaselineBias,
    SubsamplingBiasSweep,
    LagCorrelation,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "unbiasedness" => Self::Unbiasedness,
            "consistency_slope" => Self::ConsistencySlope,
            "normality" => Self::Normality,
            "coverage" => Self::Coverage,
            "avg_baseline_bias" => Self::AvgBaselineBias,
            "subsampling_bias_sweep" => Self::SubsamplingBiasSweep,
            "lag_correlation" => Self::LagCorrelation,
            _ => return Err(Error::Config(format!("unknown experiment kind {s:?}"))),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Unbiasedness => "unbiasedness",
            Self::ConsistencySlope => "consistency_slope",
            Self::Normality => "normality",
            Self::Coverage => "coverage",
            Self::AvgBaselineBias => "avg_baseline_bias",
            Self::SubsamplingBiasSweep => "subsampling_bias_sweep",
            Self::LagCorrelation => "lag_correlation",
        }
    }
}

/// Shape of a builtin clean pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternShape {
    Constant { value: f64 },
    Gradient { low: f64, high: f64 },
    Checkerboard { low: f64, high: f64, tile: usize },
    Texture { mean: f64, std_dev: f64, corr_sigma: f64 },
}

/// A builtin clean pattern at a given size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinPattern {
    pub shape: PatternShape,
    pub width: usize,
    pub height: usize,
}

/// Where the clean image comes from: a builtin pattern or an image file.
#[derive(Debug, Clone, PartialEq)]
pub enum CleanSource {
    Builtin(BuiltinPattern),
    File(PathBuf),
}

impl CleanSource {
    /// Parse a clean-source string. Builtin grammars:
    /// `constant:WxH:VALUE`, `gradient:WxH:LO:HI`,
    /// `checkerboard:WxH:LO:HI[:TILE]`, `texture:WxH:MEAN:STD[:CORR_SIGMA]`.
    /// Anything else is treated as a file path.
    pub fn parse(s: &str) -> Result<Self> {
        let Some((name, rest)) = s.split_once(':') else {
            return Ok(CleanSource::File(PathBuf::from(s)));
        };
        if !matches!(name, "constant" | "gradient" | "checkerboard" | "texture") {
            return Ok(CleanSource::File(PathBuf::from(s)));
        }
        let mut parts = rest.split(':');
        let size = parts
            .next()
            .ok_or_else(|| Error::Config(format!("missing size in {s:?}")))?;
        let (width, height) = parse_size(size)?;
        let nums: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {p:?} in {s:?}")))
            })
            .collect::<Result<_>>()?;
        let shape = match (name, nums.as_slice()) {
            ("constant", [value]) => PatternShape::Constant { value: *value },
            ("gradient", [low, high]) => PatternShape::Gradient {
                low: *low,
                high: *high,
            },
            ("checkerboard", [low, high]) => PatternShape::Checkerboard {
                low: *low,
                high: *high,
                tile: 1,
            },
            ("checkerboard", [low, high, tile]) => PatternShape::Checkerboard {
                low: *low,
                high: *high,
                tile: *tile as usize,
            },
            ("texture", [mean, std_dev]) => PatternShape::Texture {
                mean: *mean,
                std_dev: *std_dev,
                corr_sigma: 2.0,
            },
            ("texture", [mean, std_dev, corr]) => PatternShape::Texture {
                mean: *mean,
                std_dev: *std_dev,
                corr_sigma: *corr,
            },
            _ => {
                return Err(Error::Config(format!(
                    "wrong number of parameters in clean source {s:?}"
                )))
            }
        };
        Ok(CleanSource::Builtin(BuiltinPattern {
            shape,
            width,
            height,
        }))
    }

    /// Materialize the clean image at its native size.
    pub fn build(&self, seed: u64) -> Result<ImageGrid> {
        match self {
            CleanSource::Builtin(p) => build_pattern(p.shape, p.width, p.height, seed),
            CleanSource::File(path) => io::read_image(path),
        }
    }

    /// Materialize at an explicit size: builtins are regenerated, files are
    /// cropped to the top-left window (and must be large enough).
    pub fn build_at(&self, width: usize, height: usize, seed: u64) -> Result<ImageGrid> {
        match self {
            CleanSource::Builtin(p) => build_pattern(p.shape, width, height, seed),
            CleanSource::File(path) => {
                let img = io::read_image(path)?;
                if img.width() < width || img.height() < height {
                    return Err(Error::TooSmall {
                        min_width: width,
                        min_height: height,
                        width: img.width(),
                        height: img.height(),
                    });
                }
                ImageGrid::from_fn(width, height, |r, c| img.get(r, c))
            }
        }
    }
}

fn build_pattern(shape: PatternShape, width: usize, height: usize, seed: u64) -> Result<ImageGrid> {
    match shape {
        PatternShape::Constant { value } => patterns::constant(width, height, value),
        PatternShape::Gradient { low, high } => patterns::gradient(width, height, low, high),
        PatternShape::Checkerboard { low, high, tile } => {
            patterns::checkerboard(width, height, low, high, tile)
        }
        PatternShape::Texture {
            mean,
            std_dev,
            corr_sigma,
        } => patterns::smooth_texture(width, height, mean, std_dev, corr_sigma, seed),
    }
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| Error::Config(format!("bad size {s:?}, expected WxH")))?;
    let parse = |p: &str| {
        p.parse::<usize>()
            .map_err(|_| Error::Config(format!("bad size {s:?}, expected WxH")))
    };
    Ok((parse(w)?, parse(h)?))
}

/// The denoiser under evaluation. `ExternalFile` stands for a denoised
/// image produced by an outside tool: applying it returns the file's
/// contents (which must match the input dimensions).
#[derive(Debug, Clone, PartialEq)]
pub enum DenoiserSpec {
    Identity,
    GaussianSmooth(f64),
    Box(usize),
    ExternalFile(PathBuf),
}

impl DenoiserSpec {
    /// Parse `identity`, `gaussian_smooth:<sigma>`, `box:<radius>`, or
    /// `file:<path>`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(DenoiserSpec::Identity);
        }
        if let Some(sigma) = s.strip_prefix("gaussian_smooth:") {
            let sigma: f64 = sigma
                .parse()
                .map_err(|_| Error::Config(format!("bad smoothing sigma {sigma:?}")))?;
            return Ok(DenoiserSpec::GaussianSmooth(sigma));
        }
        if let Some(radius) = s.strip_prefix("box:") {
            let radius: usize = radius
                .parse()
                .map_err(|_| Error::Config(format!("bad box radius {radius:?}")))?;
            return Ok(DenoiserSpec::Box(radius));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(DenoiserSpec::ExternalFile(PathBuf::from(path)));
        }
        Err(Error::Config(format!(
            "unknown denoiser {s:?} (expected identity, gaussian_smooth:<sigma>, box:<radius>, or file:<path>)"
        )))
    }

    pub fn apply(&self, input: &ImageGrid) -> Result<ImageGrid> {
        match self {
            DenoiserSpec::Identity => Ok(synth::identity_denoiser(input)),
            DenoiserSpec::GaussianSmooth(sigma) => synth::gaussian_smooth(input, *sigma),
            DenoiserSpec::Box(radius) => synth::box_filter(input, *radius),
            DenoiserSpec::ExternalFile(path) => {
                let img = io::read_image(path)?;
                input.check_same_shape(&img)?;
                Ok(img)
            }
        }
    }
}

/// Axis along which pixel-lag correlations are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "horizontal" => Ok(Axis::Horizontal),
            "vertical" => Ok(Axis::Vertical),
            _ => Err(Error::Config(format!("unknown axis {s:?}"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        }
    }
}

/// Full description of one Monte Carlo study. Required fields come through
/// [`ExperimentConfig::new`]; sweep lists and kind-specific knobs default
/// to empty/neutral values and are validated per kind.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub clean: CleanSource,
    pub noise: NoiseModel,
    pub denoiser: DenoiserSpec,
    pub trials: usize,
    pub peak: f64,
    pub seed: u64,
    /// Pixel counts for consistency/normality sweeps.
    pub pixel_counts: Vec<usize>,
    /// Bootstrap parameters (required for coverage runs).
    pub bootstrap: Option<BootstrapConfig>,
    /// Reference counts m for the averaging-baseline bias sweep.
    pub reference_counts: Vec<usize>,
    /// Clean-image smoothing levels for the subsampling bias sweep.
    pub smoothing_levels: Vec<f64>,
    pub subsample_mode: SubsampleMode,
    /// Number of frames for the lag-correlation diagnostic.
    pub frames: usize,
    pub max_lag: usize,
    pub axis: Axis,
}

impl ExperimentConfig {
    pub fn new(
        kind: ExperimentKind,
        clean: CleanSource,
        noise: NoiseModel,
        denoiser: DenoiserSpec,
        trials: usize,
        peak: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind,
            clean,
            noise,
            denoiser,
            trials,
            peak,
            seed,
            pixel_counts: Vec::new(),
            bootstrap: None,
            reference_counts: Vec::new(),
            smoothing_levels: Vec::new(),
            subsample_mode: SubsampleMode::Deterministic,
            frames: 8,
            max_lag: 8,
            axis: Axis::Horizontal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        check_peak(self.peak).map_err(|e| Error::Config(e.to_string()))?;
        match self.kind {
            ExperimentKind::ConsistencySlope | ExperimentKind::Normality => {
                if self.pixel_counts.is_empty() {
                    return Err(Error::Config(format!(
                        "{} requires a nonempty pixel_counts list",
                        self.kind.label()
                    )));
                }
                if self.pixel_counts.contains(&0) {
                    return Err(Error::Config("pixel counts must be positive".into()));
                }
            }
            ExperimentKind::Coverage => {
                if self.bootstrap.is_none() {
                    return Err(Error::Config(
                        "coverage requires bootstrap parameters (bootstrap_k, alpha)".into(),
                    ));
                }
            }
            ExperimentKind::AvgBaselineBias => {
                if self.reference_counts.is_empty() {
                    return Err(Error::Config(
                        "avg_baseline_bias requires a nonempty m_values list".into(),
                    ));
                }
                if self.reference_counts.contains(&0) {
                    return Err(Error::Config("m values must be positive".into()));
                }
            }
            ExperimentKind::SubsamplingBiasSweep => {
                if self.smoothing_levels.is_empty() {
                    return Err(Error::Config(
                        "subsampling_bias_sweep requires a nonempty smooth_levels list".into(),
                    ));
                }
                if self
                    .smoothing_levels
                    .iter()
                    .any(|s| !s.is_finite() || *s < 0.0)
                {
                    return Err(Error::Config(
                        "smoothing levels must be finite and non-negative".into(),
                    ));
                }
                if matches!(self.denoiser, DenoiserSpec::ExternalFile(_)) {
                    return Err(Error::Config(
                        "subsampling_bias_sweep redraws the noisy input per trial, so a fixed external denoised file cannot be used".into(),
                    ));
                }
            }
            ExperimentKind::LagCorrelation => {
                if self.frames < 2 {
                    return Err(Error::Config(
                        "lag_correlation requires at least 2 frames".into(),
                    ));
                }
                if self.max_lag == 0 {
                    return Err(Error::Config("max_lag must be at least 1".into()));
                }
            }
            ExperimentKind::Unbiasedness => {}
        }
        Ok(())
    }

    /// Parse a `key = value` config file body. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut clean = None;
        let mut noise = None;
        let mut denoiser = DenoiserSpec::Identity;
        let mut trials = None;
        let mut peak = None;
        let mut seed = 0u64;
        let mut pixel_counts = Vec::new();
        let mut bootstrap_k = None;
        let mut alpha = 0.05f64;
        let mut reference_counts = Vec::new();
        let mut smoothing_levels = Vec::new();
        let mut subsample_mode = SubsampleMode::Deterministic;
        let mut frames = 8usize;
        let mut max_lag = 8usize;
        let mut axis = Axis::Horizontal;

        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: bad {what} {value:?}", lineno + 1));
            match key {
                "kind" => kind = Some(ExperimentKind::parse(value)?),
                "clean" => clean = Some(CleanSource::parse(value)?),
                "noise" => noise = Some(NoiseModel::parse(value)?),
                "denoiser" => denoiser = DenoiserSpec::parse(value)?,
                "trials" => trials = Some(value.parse().map_err(|_| bad("trials"))?),
                "peak" => peak = Some(value.parse().map_err(|_| bad("peak"))?),
                "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
                "pixel_counts" => pixel_counts = parse_list(value, lineno)?,
                "bootstrap_k" => bootstrap_k = Some(value.parse().map_err(|_| bad("bootstrap_k"))?),
                "alpha" => alpha = value.parse().map_err(|_| bad("alpha"))?,
                "m_values" => reference_counts = parse_list(value, lineno)?,
                "smooth_levels" => smoothing_levels = parse_list(value, lineno)?,
                "subsample_mode" => {
                    subsample_mode = match value {
                        "deterministic" | "det" => SubsampleMode::Deterministic,
                        "randomized" | "rand" => SubsampleMode::Randomized,
                        _ => return Err(bad("subsample_mode")),
                    }
                }
                "frames" => frames = value.parse().map_err(|_| bad("frames"))?,
                "max_lag" => max_lag = value.parse().map_err(|_| bad("max_lag"))?,
                "axis" => axis = Axis::parse(value)?,
                _ => return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }

        let kind = kind.ok_or_else(|| Error::Config("missing key: kind".into()))?;
        let clean = clean.ok_or_else(|| Error::Config("missing key: clean".into()))?;
        let noise = noise.ok_or_else(|| Error::Config("missing key: noise".into()))?;
        let trials = trials.ok_or_else(|| Error::Config("missing key: trials".into()))?;
        let peak = peak.ok_or_else(|| Error::Config("missing key: peak".into()))?;

        let bootstrap = match bootstrap_k {
            // The stored seed is a placeholder: runs derive per-trial
            // bootstrap seeds from the experiment master seed.
            Some(k) => Some(BootstrapConfig::new(k, alpha, seed).map_err(|e| {
                Error::Config(format!("bad bootstrap parameters: {e}"))
            })?),
            None => None,
        };

        let mut config = ExperimentConfig::new(kind, clean, noise, denoiser, trials, peak, seed);
        config.pixel_counts = pixel_counts;
        config.bootstrap = bootstrap;
        config.reference_counts = reference_counts;
        config.smoothing_levels = smoothing_levels;
        config.subsample_mode = subsample_mode;
        config.frames = frames;
        config.max_lag = max_lag;
        config.axis = axis;
        config.validate()?;
        Ok(config)
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, lineno: usize) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("line {}: bad list entry {p:?}", lineno + 1)))
        })
        .collect()
}

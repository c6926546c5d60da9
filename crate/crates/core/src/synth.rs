//! Seeded noise simulators and simple baseline denoisers.
//!
//! These exist so every statistical claim about the metrics can be tested
//! end-to-end without external models or data. Gaussian-noisy outputs are
//! deliberately not clipped to any range: clipping would break the
//! centered-noise assumption that the unsupervised estimators rely on.


use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, ReferenceSet};
use crate::seeds;

/// Pixel-wise independent noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Adds N(0, sigma²) to every pixel.
    AdditiveGaussian { sigma: f64 },
    /// Replaces every pixel x with a Poisson(x) draw (mean x, variance x).
    Poisson,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(format!(
                "gaussian sigma must be positive, got {sigma}"
            )));
        }
        Ok(NoiseModel::AdditiveGaussian { sigma })
    }

    pub fn poisson() -> Self {
        NoiseModel::Poisson
    }

    /// Parse `gaussian:<sigma>` or `poisson`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "poisson" {
            return Ok(NoiseModel::Poisson);
        }
        if let Some(sigma) = s.strip_prefix("gaussian:") {
            let sigma: f64 = sigma
                .parse()
                .map_err(|_| Error::param(format!("bad gaussian sigma {sigma:?}")))?;
            return NoiseModel::gaussian(sigma);
        }
        Err(Error::param(format!(
            "unknown noise model {s:?} (expected gaussian:<sigma> or poisson)"
        )))
    }

    /// Noise variance at a pixel whose clean intensity is `clean_value`.
    pub fn variance_at(&self, clean_value: f64) -> f64 {
        match self {
            NoiseModel::AdditiveGaussian { sigma } => sigma * sigma,
            NoiseModel::Poisson => clean_value,
        }
    }
}

/// Stream tags used to derive the four independent draws of a reference set
/// from one master seed.
pub mod stream_tag {
    pub const INPUT_Y: u64 = 0;
    pub const REF_A: u64 = 1;
    pub const REF_B: u64 = 2;
    pub const REF_C: u64 = 3;
}

/// One noisy realization of `clean`, reproducible given the seed.
pub fn add_noise(clean: &ImageGrid, model: &NoiseModel, seed: u64) -> Result<ImageGrid> {
    let mut rng = seeds::stream(seed, 0);
    let data: Vec<f64> = match model {
        NoiseModel::AdditiveGaussian { sigma } => {
            let normal = Normal::new(0.0, *sigma).expect("sigma validated on construction");
            clean
                .data()
                .iter()
                .map(|&x| x + normal.sample(&mut rng))
                .collect()
        }
        NoiseModel::Poisson => {
            if let Some(index) = clean.data().iter().position(|&x| x < 0.0) {
                return Err(Error::param(format!(
                    "poisson noise requires non-negative intensities, found {} at index {index}",
                    clean.data()[index]
                )));
            }
            // Poisson(0) is identically 0; cache the sampler since clean
            // images are often piecewise constant.
            let mut cached: Option<(f64, Poisson<f64>)> = None;
            let mut draw = |lambda: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Result<f64> {
                if lambda == 0.0 {
                    return Ok(0.0);
                }
                if cached.map(|(l, _)| l) != Some(lambda) {
                    let dist = Poisson::new(lambda).map_err(|e| {
                        Error::param(format!("poisson parameter {lambda}: {e}"))
                    })?;
                    cached = Some((lambda, dist));
                }
                Ok(cached.unwrap().1.sample(rng))
            };
            let mut data = Vec::with_capacity(clean.len());
            for &x in clean.data() {
                data.push(draw(x, &mut rng)?);
            }
            data
        }
    };
    ImageGrid::new(clean.width(), clean.height(), data)
}

/// Four independent noisy realizations of the same clean grid, packed as
/// input Y plus references A, B, C. Stream seeds are derived from the
/// master seed with the tags in [`stream_tag`].
pub fn make_reference_set(clean: &ImageGrid, model: &NoiseModel, seed: u64) -> Result<ReferenceSet> {
    ReferenceSet::new(
        add_noise(clean, model, seeds::mix(seed, stream_tag::INPUT_Y))?,
        add_noise(clean, model, seeds::mix(seed, stream_tag::REF_A))?,
        add_noise(clean, model, seeds::mix(seed, stream_tag::REF_B))?,
        add_noise(clean, model, seeds::mix(seed, stream_tag::REF_C))?,
    )
}

fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// 2D Gaussian smoothing. The kernel is truncated at radius
/// `ceil(3·filter_sigma)` and renormalized to sum 1; borders replicate the
/// edge pixel. Implemented as two separable passes, which is exact for the
/// truncated product kernel under per-axis clamping.
pub fn gaussian_smooth(image: &ImageGrid, filter_sigma: f64) -> Result<ImageGrid> {
    if !(filter_sigma.is_finite() && filter_sigma > 0.0) {
        return Err(Error::param(format!(
            "filter sigma must be positive, got {filter_sigma}"
        )));
    }
    let radius = (3.0 * filter_sigma).ceil() as usize;
    let radius = radius.max(1);
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * filter_sigma * filter_sigma)).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }
    separable_filter(image, &kernel)
}

fn separable_filter(image: &ImageGrid, kernel: &[f64]) -> Result<ImageGrid> {
    let (w, h) = (image.width(), image.height());
    let radius = kernel.len() / 2;
    // Horizontal pass.
    let horizontal = ImageGrid::from_fn(w, h, |r, c| {
        let mut acc = 0.0;
        for (i, &k) in kernel.iter().enumerate() {
            let cc = clamp_index(c as isize + i as isize - radius as isize, w);
            acc += k * image.get(r, cc);
        }
        acc
    })?;
    // Vertical pass.
    ImageGrid::from_fn(w, h, |r, c| {
        let mut acc = 0.0;
        for (i, &k) in kernel.iter().enumerate() {
            let rr = clamp_index(r as isize + i as isize - radius as isize, h);
            acc += k * horizontal.get(rr, c);
        }
        acc
    })
}

/// Mean over the (2r+1)² neighborhood with edge replication.
pub fn box_filter(image: &ImageGrid, radius: usize) -> Result<ImageGrid> {
    if radius == 0 {
        return Err(Error::param("box filter radius must be positive"));
    }
    let (w, h) = (image.width(), image.height());
    let side = 2 * radius + 1;
    let weight = 1.0 / (side * side) as f64;
    ImageGrid::from_fn(w, h, |r, c| {
        let mut acc = 0.0;
        for dr in 0..side {
            let rr = clamp_index(r as isize + dr as isize - radius as isize, h);
            for dc in 0..side {
                let cc = clamp_index(c as isize + dc as isize - radius as isize, w);
                acc += image.get(rr, cc);
            }
        }
        acc * weight
    })
}

/// The trivial denoiser: returns its input.
pub fn identity_denoiser(image: &ImageGrid) -> ImageGrid {
    image.clone()
}

/// Seeded white-noise grid (used by tests and texture synthesis).
pub(crate) fn white_gaussian(width: usize, height: usize, seed: u64) -> Result<ImageGrid> {
    let mut rng = seeds::stream(seed, 0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    ImageGrid::new(
        width,
        height,
        (0..width * height).map(|_| normal.sample(&mut rng)).collect(),
    )
}

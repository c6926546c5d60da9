//! Builtin clean-image patterns spanning the smoothness axis: a constant
//! (perfectly smooth), a linear gradient, a band-limited texture, and a
//! pixel-level checkerboard (maximally non-smooth). They make every
//! simulation self-contained, with no dataset dependency.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::stats;
use crate::synth;

pub fn constant(width: usize, height: usize, value: f64) -> Result<ImageGrid> {
    ImageGrid::constant(width, height, value)
}

/// Diagonal linear ramp from `low` at the top-left corner to `high` at the
/// bottom-right corner.
pub fn gradient(width: usize, height: usize, low: f64, high: f64) -> Result<ImageGrid> {
    let span = (width + height).saturating_sub(2).max(1) as f64;
    ImageGrid::from_fn(width, height, |r, c| {
        low + (high - low) * (r + c) as f64 / span
    })
}

/// Checkerboard alternating between `low` and `high` in `tile`-sized squares.
pub fn checkerboard(
    width: usize,
    height: usize,
    low: f64,
    high: f64,
    tile: usize,
) -> Result<ImageGrid> {
    if tile == 0 {
        return Err(Error::param("checkerboard tile size must be positive"));
    }
    ImageGrid::from_fn(width, height, |r, c| {
        if (r / tile + c / tile) % 2 == 0 {
            low
        } else {
            high
        }
    })
}

/// Band-limited texture: a seeded white-noise field smoothed with a
/// Gaussian of width `corr_sigma`, then rescaled to the exact sample mean
/// and standard deviation requested.
pub fn smooth_texture(
    width: usize,
    height: usize,
    mean: f64,
    std_dev: f64,
    corr_sigma: f64,
    seed: u64,
) -> Result<ImageGrid> {
    if !(std_dev.is_finite() && std_dev >= 0.0) {
        return Err(Error::param(format!(
            "texture standard deviation must be non-negative, got {std_dev}"
        )));
    }
    if width * height < 2 {
        return Err(Error::param("texture needs at least two pixels"));
    }
    let field = synth::gaussian_smooth(&synth::white_gaussian(width, height, seed)?, corr_sigma)?;
    let (m, s) = stats::mean_and_std(field.data());
    if s == 0.0 {
        return Err(Error::DegenerateVariance("smoothed texture field"));
    }
    ImageGrid::new(
        width,
        height,
        field
            .data()
            .iter()
            .map(|&v| mean + (v - m) / s * std_dev)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_hits_endpoints() {
        let g = gradient(5, 3, 10.0, 20.0).unwrap();
        assert_eq!(g.get(0, 0), 10.0);
        assert_eq!(g.get(2, 4), 20.0);
    }

    #[test]
    fn checkerboard_alternates() {
        let g = checkerboard(4, 4, 0.0, 1.0, 1).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        assert_eq!(g.get(0, 1), 1.0);
        assert_eq!(g.get(1, 0), 1.0);
        assert_eq!(g.get(1, 1), 0.0);
        let tiled = checkerboard(4, 4, 0.0, 1.0, 2).unwrap();
        assert_eq!(tiled.get(0, 1), 0.0);
        assert_eq!(tiled.get(0, 2), 1.0);
    }

    #[test]
    fn texture_matches_requested_moments_and_seed() {
        let t = smooth_texture(64, 64, 128.0, 30.0, 2.0, 5).unwrap();
        let (m, s) = crate::stats::mean_and_std(t.data());
        assert!((m - 128.0).abs() < 1e-9);
        assert!((s - 30.0).abs() < 1e-9);
        let again = smooth_texture(64, 64, 128.0, 30.0, 2.0, 5).unwrap();
        assert_eq!(t, again);
        let other = smooth_texture(64, 64, 128.0, 30.0, 2.0, 6).unwrap();
        assert_ne!(t, other);
    }
}

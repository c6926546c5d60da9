//! Unsupervised estimates of denoising quality computed purely from noisy
//! data.
//!
//! The unsupervised MSE compares a denoised image against a noisy reference
//! of the same scene and subtracts a noise-variance estimate built from two
//! further references, which makes it an unbiased estimator of the true MSE
//! under pixel-wise independent, signal-centered noise. The unsupervised
//! PSNR is its decibel transform. This crate provides:
//!
//! - exact implementations of the supervised and unsupervised metrics and
//!   their per-pixel decompositions ([`metrics`]);
//! - spatial subsampling, which manufactures the required references from a
//!   single noisy image ([`subsample`]);
//! - percentile-bootstrap confidence intervals ([`bootstrap`]);
//! - seeded noise simulators and baseline denoisers ([`synth`],
//!   [`patterns`]);
//! - a Monte Carlo harness that verifies the estimators' statistical
//!   guarantees empirically ([`experiments`]);
//! - PGM / float-raster file I/O ([`io`]) backing the `umetrics` CLI.
//!
//! All operations are pure functions of their inputs (randomness enters
//! only through explicit 64-bit seeds), so everything is safe to call
//! concurrently and reproducible within a build.

pub mod bootstrap;
pub mod error;
pub mod experiments;
mod grid;
pub mod io;
pub mod metrics;
pub mod patterns;
pub mod seeds;
pub mod stats;
pub mod subsample;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{ImageGrid, ReferenceSet};

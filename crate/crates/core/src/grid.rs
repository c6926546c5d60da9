//! Core raster types: a 2D grid of real values and the set of noisy
//! references required by the unsupervised metrics.

use crate::error::{Error, Result};

/// A 2D real-valued raster, stored row-major. The universal carrier for
/// clean images, noisy frames, references, and denoised outputs.
///
/// Construction rejects data whose length does not match `width * height`
/// and any non-finite value, so downstream metric code can assume both.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::BadDataLength {
                width,
                height,
                len: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Grid filled with a single value.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Grid built from a function of (row, col).
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // width and height are positive by construction
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Fail with a shape error unless `other` has identical dimensions.
    pub fn check_same_shape(&self, other: &ImageGrid) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected_width: self.width,
                expected_height: self.height,
                got_width: other.width,
                got_height: other.height,
            })
        }
    }
}

/// A noisy input together with the three noisy references the unsupervised
/// metrics require. All four grids share the same dimensions. Whether the
/// references actually carry independent, signal-centered noise is a
/// property of the data source, not of this container.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    input_y: ImageGrid,
    ref_a: ImageGrid,
    ref_b: ImageGrid,
    ref_c: ImageGrid,
}

impl ReferenceSet {
    pub fn new(
        input_y: ImageGrid,
        ref_a: ImageGrid,
        ref_b: ImageGrid,
        ref_c: ImageGrid,
    ) -> Result<Self> {
        input_y.check_same_shape(&ref_a)?;
        input_y.check_same_shape(&ref_b)?;
        input_y.check_same_shape(&ref_c)?;
        Ok(Self {
            input_y,
            ref_a,
            ref_b,
            ref_c,
        })
    }

    pub fn input_y(&self) -> &ImageGrid {
        &self.input_y
    }

    pub fn ref_a(&self) -> &ImageGrid {
        &self.ref_a
    }

    pub fn ref_b(&self) -> &ImageGrid {
        &self.ref_b
    }

    pub fn ref_c(&self) -> &ImageGrid {
        &self.ref_c
    }

    pub fn width(&self) -> usize {
        self.input_y.width()
    }

    pub fn height(&self) -> usize {
        self.input_y.height()
    }

    /// Number of pixels per grid.
    pub fn len(&self) -> usize {
        self.input_y.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same references with b and c exchanged.
    pub fn with_swapped_bc(self) -> Self {
        Self {
            input_y: self.input_y,
            ref_a: self.ref_a,
            ref_b: self.ref_c,
            ref_c: self.ref_b,
        }
    }
}

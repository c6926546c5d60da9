//! Image file formats: binary PGM (P5, 8- or 16-bit) for interoperability
//! with standard tools, and a minimal float raster ("UMF1") for exact
//! transport of real-valued grids.
//!
//! The float raster layout is: magic bytes `UMF1`, width and height as
//! little-endian u32, then width·height little-endian f32 samples in
//! row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

const F32_MAGIC: &[u8; 4] = b"UMF1";

/// Supported on-disk raster formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    Pgm8,
    Pgm16,
    F32Raster,
}

impl RasterFormat {
    /// Parse a format name (`pgm8`, `pgm16`, `f32`).
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pgm8" => Ok(RasterFormat::Pgm8),
            "pgm16" => Ok(RasterFormat::Pgm16),
            "f32" => Ok(RasterFormat::F32Raster),
            _ => Err(Error::param(format!(
                "unknown raster format {s:?} (expected pgm8, pgm16, or f32)"
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            RasterFormat::Pgm8 | RasterFormat::Pgm16 => "pgm",
            RasterFormat::F32Raster => "f32",
        }
    }
}

/// Read an image, sniffing the format from the magic bytes.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(F32_MAGIC) {
        read_f32_raster(path, &bytes)
    } else if bytes.starts_with(b"P5") {
        read_pgm(path, &bytes)
    } else {
        Err(Error::format(path, "unrecognized format (expected P5 or UMF1 magic)"))
    }
}

/// Write an image in the requested format.
///
/// PGM output requires every value to be an integer within the format's
/// range; fractional values are rejected rather than silently quantized.
pub fn write_image(grid: &ImageGrid, path: impl AsRef<Path>, format: RasterFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        RasterFormat::Pgm8 => encode_pgm(grid, 255)?,
        RasterFormat::Pgm16 => encode_pgm(grid, 65535)?,
        RasterFormat::F32Raster => encode_f32_raster(grid)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_f32_raster(path: &Path, bytes: &[u8]) -> Result<ImageGrid> {
    if bytes.len() < 12 {
        return Err(Error::format(path, "truncated header"));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| Error::format(path, "dimensions overflow"))?;
    if bytes.len() < expected {
        return Err(Error::format(
            path,
            format!("truncated payload: need {expected} bytes, have {}", bytes.len()),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(path, "trailing bytes after payload"));
    }
    let data: Vec<f64> = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    ImageGrid::new(width, height, data)
        .map_err(|e| Error::format(path, format!("invalid raster: {e}")))
}

fn encode_f32_raster(grid: &ImageGrid) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(12 + 4 * grid.len());
    out.extend_from_slice(F32_MAGIC);
    out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    for &v in grid.data() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::param(format!(
                "value {v} is outside the f32 range"
            )));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

fn read_pgm(path: &Path, bytes: &[u8]) -> Result<ImageGrid> {
    let mut pos = 2; // past "P5"
    let mut fields = [0usize; 3]; // width, height, maxval
    for field in &mut fields {
        *field = read_pgm_int(path, bytes, &mut pos)?;
    }
    // exactly one whitespace byte separates the header from the payload
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(path, "corrupt header: missing separator")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::format(path, "zero dimension"));
    }
    let bytes_per_sample = match maxval {
        255 => 1,
        65535 => 2,
        other => {
            return Err(Error::format(
                path,
                format!("unsupported maxval {other} (expected 255 or 65535)"),
            ))
        }
    };
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per_sample))
        .ok_or_else(|| Error::format(path, "dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::format(
            path,
            format!("truncated payload: need {expected} bytes, have {}", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(path, "trailing bytes after payload"));
    }
    let data: Vec<f64> = if bytes_per_sample == 1 {
        payload.iter().map(|&b| b as f64).collect()
    } else {
        // 16-bit samples are big-endian, most significant byte first
        payload
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes(c.try_into().unwrap()) as f64)
            .collect()
    };
    ImageGrid::new(width, height, data)
        .map_err(|e| Error::format(path, format!("invalid raster: {e}")))
}

/// Read one whitespace-delimited decimal header field, skipping `#` comments.
fn read_pgm_int(path: &Path, bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            _ => return Err(Error::format(path, "corrupt header")),
        }
    }
    let mut value = 0usize;
    while let Some(&b) = bytes.get(*pos) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as usize))
            .ok_or_else(|| Error::format(path, "header value overflow"))?;
        *pos += 1;
    }
    Ok(value)
}

fn encode_pgm(grid: &ImageGrid, maxval: u32) -> Result<Vec<u8>> {
    for (i, &v) in grid.data().iter().enumerate() {
        if v.fract() != 0.0 || v < 0.0 || v > maxval as f64 {
            return Err(Error::param(format!(
                "pixel {i} has value {v}, not an integer in 0..={maxval}; \
                 PGM output refuses to quantize"
            )));
        }
    }
    let header = format!("P5\n{} {}\n{}\n", grid.width(), grid.height(), maxval);
    let mut out = header.into_bytes();
    if maxval == 255 {
        out.extend(grid.data().iter().map(|&v| v as u8));
    } else {
        for &v in grid.data() {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    }
    Ok(out)
}

//! Python bindings for the umetrics crate.
//!
//! Thin wrappers only: images cross the boundary as 2D float64 numpy
//! arrays (rows = height, columns = width), per-pixel vectors as 1D
//! arrays, and all algorithm logic stays in the umetrics crate.

use numpy::ndarray::{Array1, Array2};
use numpy::{IntoPyArray, PyArray1, PyArray2, PyReadonlyArray1, PyReadonlyArray2};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use umetrics::bootstrap::BootstrapConfig;
use umetrics::experiments::{self, Axis};
use umetrics::io::RasterFormat;
use umetrics::subsample::{SubImage, SubsampleMode};
use umetrics::synth::NoiseModel;
use umetrics::{metrics, ImageGrid, ReferenceSet};

fn to_py_err(e: umetrics::Error) -> PyErr {
    match e {
        umetrics::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn grid_from_array(array: &PyReadonlyArray2<'_, f64>) -> PyResult<ImageGrid> {
    let view = array.as_array();
    let (height, width) = (view.nrows(), view.ncols());
    let data: Vec<f64> = view.iter().copied().collect();
    ImageGrid::new(width, height, data).map_err(to_py_err)
}

fn grid_to_array<'py>(py: Python<'py>, grid: &ImageGrid) -> Bound<'py, PyArray2<f64>> {
    Array2::from_shape_vec((grid.height(), grid.width()), grid.data().to_vec())
        .expect("grid dimensions are consistent")
        .into_pyarray(py)
}

fn reference_set(
    input_y: &PyReadonlyArray2<'_, f64>,
    ref_a: &PyReadonlyArray2<'_, f64>,
    ref_b: &PyReadonlyArray2<'_, f64>,
    ref_c: &PyReadonlyArray2<'_, f64>,
) -> PyResult<ReferenceSet> {
    ReferenceSet::new(
        grid_from_array(input_y)?,
        grid_from_array(ref_a)?,
        grid_from_array(ref_b)?,
        grid_from_array(ref_c)?,
    )
    .map_err(to_py_err)
}

fn parse_subsample_mode(mode: &str) -> PyResult<SubsampleMode> {
    match mode {
        "det" | "deterministic" => Ok(SubsampleMode::Deterministic),
        "rand" | "randomized" => Ok(SubsampleMode::Randomized),
        _ => Err(PyValueError::new_err(format!(
            "unknown subsample mode {mode:?} (expected det or rand)"
        ))),
    }
}

/// Metric value plus context, mirroring the Rust report type.
#[pyclass(name = "MetricReport", skip_from_py_object)]
#[derive(Clone)]
struct PyMetricReport {
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    value: Option<f64>,
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    peak: Option<f64>,
    #[pyo3(get)]
    valid: bool,
}

#[pymethods]
impl PyMetricReport {
    fn __repr__(&self) -> String {
        format!(
            "MetricReport(kind={:?}, value={:?}, n={}, peak={:?}, valid={})",
            self.kind, self.value, self.n, self.peak, self.valid
        )
    }
}

/// Bootstrap confidence intervals, mirroring the Rust result type.
#[pyclass(name = "BootstrapCi", skip_from_py_object)]
#[derive(Clone)]
struct PyBootstrapCi {
    #[pyo3(get)]
    umse: (f64, f64),
    #[pyo3(get)]
    upsnr: Option<(f64, f64)>,
    #[pyo3(get)]
    excluded_resamples: usize,
    #[pyo3(get)]
    resamples: usize,
}

#[pymethods]
impl PyBootstrapCi {
    fn __repr__(&self) -> String {
        format!(
            "BootstrapCi(umse={:?}, upsnr={:?}, excluded_resamples={}, resamples={})",
            self.umse, self.upsnr, self.excluded_resamples, self.resamples
        )
    }
}

/// Mean squared error between a clean image and a denoised estimate.
#[pyfunction]
fn mse(clean: PyReadonlyArray2<'_, f64>, denoised: PyReadonlyArray2<'_, f64>) -> PyResult<f64> {
    metrics::mse(&grid_from_array(&clean)?, &grid_from_array(&denoised)?).map_err(to_py_err)
}

/// Per-pixel squared errors, flattened row-major.
#[pyfunction]
fn se_per_pixel<'py>(
    py: Python<'py>,
    clean: PyReadonlyArray2<'py, f64>,
    denoised: PyReadonlyArray2<'py, f64>,
) -> PyResult<Bound<'py, PyArray1<f64>>> {
    let values = metrics::se_per_pixel(&grid_from_array(&clean)?, &grid_from_array(&denoised)?)
        .map_err(to_py_err)?;
    Ok(Array1::from_vec(values).into_pyarray(py))
}

/// Unsupervised MSE from three noisy references; may be negative.
#[pyfunction]
fn umse(
    input_y: PyReadonlyArray2<'_, f64>,
    ref_a: PyReadonlyArray2<'_, f64>,
    ref_b: PyReadonlyArray2<'_, f64>,
    ref_c: PyReadonlyArray2<'_, f64>,
    denoised: PyReadonlyArray2<'_, f64>,
) -> PyResult<f64> {
    let refs = reference_set(&input_y, &ref_a, &ref_b, &ref_c)?;
    metrics::umse(&refs, &grid_from_array(&denoised)?).map_err(to_py_err)
}

/// Per-pixel unsupervised squared errors (the bootstrap resampling unit).
#[pyfunction]
fn use_per_pixel<'py>(
    py: Python<'py>,
    input_y: PyReadonlyArray2<'py, f64>,
    ref_a: PyReadonlyArray2<'py, f64>,
    ref_b: PyReadonlyArray2<'py, f64>,
    ref_c: PyReadonlyArray2<'py, f64>,
    denoised: PyReadonlyArray2<'py, f64>,
) -> PyResult<Bound<'py, PyArray1<f64>>> {
    let refs = reference_set(&input_y, &ref_a, &ref_b, &ref_c)?;
    let values =
        metrics::use_per_pixel(&refs, &grid_from_array(&denoised)?).map_err(to_py_err)?;
    Ok(Array1::from_vec(values).into_pyarray(py))
}

/// Noise-variance estimate: mean of (b − c)² / 2.
#[pyfunction]
fn noise_variance_estimate(
    ref_b: PyReadonlyArray2<'_, f64>,
    ref_c: PyReadonlyArray2<'_, f64>,
) -> PyResult<f64> {
    metrics::noise_variance_estimate(&grid_from_array(&ref_b)?, &grid_from_array(&ref_c)?)
        .map_err(to_py_err)
}

/// PSNR in dB; raises ValueError when the MSE value is not positive.
#[pyfunction]
fn psnr(mse_value: f64, peak: f64) -> PyResult<f64> {
    metrics::psnr(mse_value, peak).map_err(to_py_err)
}

/// Unsupervised PSNR report; `valid` is false when the uMSE was not positive.
#[pyfunction]
fn upsnr(
    input_y: PyReadonlyArray2<'_, f64>,
    ref_a: PyReadonlyArray2<'_, f64>,
    ref_b: PyReadonlyArray2<'_, f64>,
    ref_c: PyReadonlyArray2<'_, f64>,
    denoised: PyReadonlyArray2<'_, f64>,
    peak: f64,
) -> PyResult<PyMetricReport> {
    let refs = reference_set(&input_y, &ref_a, &ref_b, &ref_c)?;
    let report =
        metrics::upsnr(&refs, &grid_from_array(&denoised)?, peak).map_err(to_py_err)?;
    Ok(PyMetricReport {
        kind: report.kind.label().to_string(),
        value: report.value,
        n: report.n,
        peak: report.peak,
        valid: report.valid,
    })
}

/// MSE against the pixel-wise average of m noisy references.
#[pyfunction]
fn mse_avg(
    references: Vec<PyReadonlyArray2<'_, f64>>,
    denoised: PyReadonlyArray2<'_, f64>,
) -> PyResult<f64> {
    let grids: Vec<ImageGrid> = references
        .iter()
        .map(grid_from_array)
        .collect::<PyResult<_>>()?;
    metrics::mse_avg(&grids, &grid_from_array(&denoised)?).map_err(to_py_err)
}

/// Decompose an even-sized image into four sub-images (y, a, b, c) plus the
/// per-block assignment table (one row per block: positions 1..=4 taken by
/// Y, A, B, C).
#[pyfunction]
#[pyo3(signature = (image, mode="det", seed=0))]
fn spatial_subsample<'py>(
    py: Python<'py>,
    image: PyReadonlyArray2<'py, f64>,
    mode: &str,
    seed: u64,
) -> PyResult<(
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<u8>>,
)> {
    let out = umetrics::subsample::spatial_subsample(
        &grid_from_array(&image)?,
        parse_subsample_mode(mode)?,
        seed,
    )
    .map_err(to_py_err)?;
    let flat: Vec<u8> = out.assignment.iter().flatten().copied().collect();
    let assignment = Array2::from_shape_vec((out.assignment.len(), 4), flat)
        .expect("assignment rows have width 4")
        .into_pyarray(py);
    Ok((
        grid_to_array(py, &out.sub_y),
        grid_to_array(py, &out.sub_a),
        grid_to_array(py, &out.sub_b),
        grid_to_array(py, &out.sub_c),
        assignment,
    ))
}

/// Subsample a companion image (clean or denoised) at the block positions
/// the decomposition of another image records for one of its sub-images.
#[pyfunction]
#[pyo3(signature = (image, decomposition_of, role="y", mode="det", seed=0))]
fn extract_matching<'py>(
    py: Python<'py>,
    image: PyReadonlyArray2<'py, f64>,
    decomposition_of: PyReadonlyArray2<'py, f64>,
    role: &str,
    mode: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let out = umetrics::subsample::spatial_subsample(
        &grid_from_array(&decomposition_of)?,
        parse_subsample_mode(mode)?,
        seed,
    )
    .map_err(to_py_err)?;
    let role = match role {
        "y" => SubImage::Y,
        "a" => SubImage::A,
        "b" => SubImage::B,
        "c" => SubImage::C,
        _ => return Err(PyValueError::new_err(format!("unknown role {role:?}"))),
    };
    let extracted = out
        .extract_matching(&grid_from_array(&image)?, role)
        .map_err(to_py_err)?;
    Ok(grid_to_array(py, &extracted))
}

/// Crop to even dimensions by dropping the last row/column when odd.
#[pyfunction]
fn crop_to_even<'py>(
    py: Python<'py>,
    image: PyReadonlyArray2<'py, f64>,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let cropped =
        umetrics::subsample::crop_to_even(&grid_from_array(&image)?).map_err(to_py_err)?;
    Ok(grid_to_array(py, &cropped))
}

/// Percentile-bootstrap confidence intervals over per-pixel uSE terms.
#[pyfunction]
#[pyo3(signature = (use_values, peak, resamples=1000, alpha=0.05, seed=0))]
fn bootstrap_ci(
    use_values: PyReadonlyArray1<'_, f64>,
    peak: f64,
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> PyResult<PyBootstrapCi> {
    let values: Vec<f64> = use_values.as_array().iter().copied().collect();
    let config = BootstrapConfig::new(resamples, alpha, seed).map_err(to_py_err)?;
    let ci = umetrics::bootstrap::bootstrap_ci(&values, peak, &config).map_err(to_py_err)?;
    Ok(PyBootstrapCi {
        umse: ci.umse,
        upsnr: ci.upsnr,
        excluded_resamples: ci.excluded_resamples,
        resamples: ci.resamples,
    })
}

/// One noisy realization of a clean image under `gaussian:<sigma>` or
/// `poisson` noise.
#[pyfunction]
fn add_noise<'py>(
    py: Python<'py>,
    clean: PyReadonlyArray2<'py, f64>,
    model: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let model = NoiseModel::parse(model).map_err(to_py_err)?;
    let noisy =
        umetrics::synth::add_noise(&grid_from_array(&clean)?, &model, seed).map_err(to_py_err)?;
    Ok(grid_to_array(py, &noisy))
}

/// Four independent noisy realizations (y, a, b, c) of a clean image.
#[pyfunction]
fn make_reference_set<'py>(
    py: Python<'py>,
    clean: PyReadonlyArray2<'py, f64>,
    model: &str,
    seed: u64,
) -> PyResult<(
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray2<f64>>,
)> {
    let model = NoiseModel::parse(model).map_err(to_py_err)?;
    let refs = umetrics::synth::make_reference_set(&grid_from_array(&clean)?, &model, seed)
        .map_err(to_py_err)?;
    Ok((
        grid_to_array(py, refs.input_y()),
        grid_to_array(py, refs.ref_a()),
        grid_to_array(py, refs.ref_b()),
        grid_to_array(py, refs.ref_c()),
    ))
}

/// Gaussian smoothing with kernel radius ceil(3·sigma) and replicated edges.
#[pyfunction]
fn gaussian_smooth<'py>(
    py: Python<'py>,
    image: PyReadonlyArray2<'py, f64>,
    sigma: f64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let smoothed =
        umetrics::synth::gaussian_smooth(&grid_from_array(&image)?, sigma).map_err(to_py_err)?;
    Ok(grid_to_array(py, &smoothed))
}

/// Box filter over the (2r+1)² neighborhood with replicated edges.
#[pyfunction]
fn box_filter<'py>(
    py: Python<'py>,
    image: PyReadonlyArray2<'py, f64>,
    radius: usize,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let filtered =
        umetrics::synth::box_filter(&grid_from_array(&image)?, radius).map_err(to_py_err)?;
    Ok(grid_to_array(py, &filtered))
}

/// Relative RMS difference between the four clean sub-images of a
/// deterministic spatial decomposition.
#[pyfunction]
fn reference_relative_rmse(clean: PyReadonlyArray2<'_, f64>) -> PyResult<f64> {
    experiments::reference_relative_rmse(&grid_from_array(&clean)?).map_err(to_py_err)
}

/// Pixel-lag correlations (lags 1..=max_lag) of cross-frame residuals.
#[pyfunction]
#[pyo3(signature = (frames, max_lag, axis="horizontal"))]
fn lag_correlation<'py>(
    py: Python<'py>,
    frames: Vec<PyReadonlyArray2<'py, f64>>,
    max_lag: usize,
    axis: &str,
) -> PyResult<Bound<'py, PyArray1<f64>>> {
    let grids: Vec<ImageGrid> = frames.iter().map(grid_from_array).collect::<PyResult<_>>()?;
    let axis = match axis {
        "horizontal" => Axis::Horizontal,
        "vertical" => Axis::Vertical,
        _ => return Err(PyValueError::new_err(format!("unknown axis {axis:?}"))),
    };
    let correlations = experiments::lag_correlation(&grids, max_lag, axis).map_err(to_py_err)?;
    Ok(Array1::from_vec(correlations).into_pyarray(py))
}

/// Read a PGM or UMF1 float raster as a 2D float64 array.
#[pyfunction]
fn read_image<'py>(py: Python<'py>, path: &str) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let grid = umetrics::io::read_image(path).map_err(to_py_err)?;
    Ok(grid_to_array(py, &grid))
}

/// Write a 2D array as `pgm8`, `pgm16`, or `f32` (UMF1 raster).
#[pyfunction]
#[pyo3(signature = (image, path, format="f32"))]
fn write_image(image: PyReadonlyArray2<'_, f64>, path: &str, format: &str) -> PyResult<()> {
    let format = RasterFormat::parse(format).map_err(to_py_err)?;
    umetrics::io::write_image(&grid_from_array(&image)?, path, format).map_err(to_py_err)
}

#[pymodule]
fn umetrics_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetricReport>()?;
    m.add_class::<PyBootstrapCi>()?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(se_per_pixel, m)?)?;
    m.add_function(wrap_pyfunction!(umse, m)?)?;
    m.add_function(wrap_pyfunction!(use_per_pixel, m)?)?;
    m.add_function(wrap_pyfunction!(noise_variance_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(upsnr, m)?)?;
    m.add_function(wrap_pyfunction!(mse_avg, m)?)?;
    m.add_function(wrap_pyfunction!(spatial_subsample, m)?)?;
    m.add_function(wrap_pyfunction!(extract_matching, m)?)?;
    m.add_function(wrap_pyfunction!(crop_to_even, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_ci, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(make_reference_set, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_smooth, m)?)?;
    m.add_function(wrap_pyfunction!(box_filter, m)?)?;
    m.add_function(wrap_pyfunction!(reference_relative_rmse, m)?)?;
    m.add_function(wrap_pyfunction!(lag_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(read_image, m)?)?;
    m.add_function(wrap_pyfunction!(write_image, m)?)?;
    Ok(())
}

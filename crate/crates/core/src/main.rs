//! Command-line surface: metric evaluation, noise simulation, spatial
//! subsampling, and Monte Carlo experiment runs. CSV goes to stdout (or to
//! the experiment output directory); every failure prints a one-line
//! `umetrics: error: ...` message on stderr and exits nonzero.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use umetrics::bootstrap::{bootstrap_ci, BootstrapConfig};
use umetrics::error::{Error, Result};
use umetrics::experiments::{CleanSource, ExperimentConfig};
use umetrics::io::{read_image, write_image, RasterFormat};
use umetrics::metrics;
use umetrics::seeds;
use umetrics::subsample::{crop_to_even, spatial_subsample, SubImage, SubsampleMode};
use umetrics::synth::{add_noise, make_reference_set, stream_tag, NoiseModel};
use umetrics::{ImageGrid, ReferenceSet};

// Tag separating builtin-pattern generation from noise streams.
const TAG_CLEAN: u64 = 0xC1EA;
// Tag separating the pooled bootstrap stream from per-image streams.
const TAG_POOLED: u64 = u64::MAX;

#[derive(Parser)]
#[command(
    name = "umetrics",
    version,
    about = "Unsupervised denoising-quality metrics (uMSE / uPSNR) from noisy data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute metrics; emits one CSV row per image plus a pooled row.
    Metrics(MetricsArgs),
    /// Write noisy frames or a four-frame reference set for a clean image.
    Simulate(SimulateArgs),
    /// Decompose a noisy image into four half-resolution sub-images.
    Subsample(SubsampleArgs),
    /// Run a Monte Carlo experiment described by a config file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct MetricsArgs {
    /// Denoised image file(s), comma-separated.
    #[arg(long, value_delimiter = ',')]
    denoised: Vec<PathBuf>,
    /// First noisy reference file(s).
    #[arg(long, value_delimiter = ',')]
    ref_a: Vec<PathBuf>,
    /// Second noisy reference file(s).
    #[arg(long, value_delimiter = ',')]
    ref_b: Vec<PathBuf>,
    /// Third noisy reference file(s).
    #[arg(long, value_delimiter = ',')]
    ref_c: Vec<PathBuf>,
    /// Noisy input to decompose via spatial subsampling.
    #[arg(long)]
    noisy: Option<PathBuf>,
    /// Clean ground-truth image(s) for supervised MSE/PSNR.
    #[arg(long, value_delimiter = ',')]
    clean: Vec<PathBuf>,
    /// Noisy references to average for the baseline MSE_avg.
    #[arg(long, value_delimiter = ',')]
    avg_refs: Vec<PathBuf>,
    /// Peak signal value M fixing the dB scale (never inferred from data).
    #[arg(long)]
    peak: Option<f64>,
    /// Subsampling mode for --noisy: det or rand.
    #[arg(long)]
    subsample: Option<String>,
    /// Master seed for subsampling and bootstrap resampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of bootstrap resamples K; enables confidence intervals.
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Miscoverage level of the 1-alpha bootstrap intervals.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Clean source: image file or builtin pattern
    /// (constant:WxH:V, gradient:WxH:LO:HI, checkerboard:WxH:LO:HI[:TILE],
    /// texture:WxH:MEAN:STD[:CORR]).
    #[arg(long)]
    clean: String,
    /// Noise model: gaussian:<sigma> or poisson.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a single noisy frame here.
    #[arg(long)]
    out_noisy: Option<PathBuf>,
    /// Write a reference set to <prefix>_y/_a/_b/_c.<ext>.
    #[arg(long)]
    out_refs: Option<PathBuf>,
    /// Output format: f32, pgm8, or pgm16.
    #[arg(long, default_value = "f32")]
    format: String,
}

#[derive(Args)]
struct SubsampleArgs {
    /// Noisy input image.
    #[arg(long)]
    input: PathBuf,
    /// det or rand.
    #[arg(long, default_value = "det")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Crop odd-sized inputs to even dimensions instead of failing.
    #[arg(long)]
    crop: bool,
    /// Output prefix; writes <prefix>_y/_a/_b/_c.<ext> plus
    /// <prefix>_assignment.csv.
    #[arg(long)]
    out_prefix: PathBuf,
    /// Output format: f32, pgm8, or pgm16.
    #[arg(long, default_value = "f32")]
    format: String,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Directory for trials.csv and summary.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Metrics(args) => cmd_metrics(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Subsample(args) => cmd_subsample(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    if let Err(e) = result {
        eprintln!("umetrics: error: {e}");
        std::process::exit(1);
    }
}

fn parse_mode(s: &str) -> Result<SubsampleMode> {
    match s {
        "det" | "deterministic" => Ok(SubsampleMode::Deterministic),
        "rand" | "randomized" => Ok(SubsampleMode::Randomized),
        _ => Err(Error::InvalidParameter(format!(
            "unknown subsample mode {s:?} (expected det or rand)"
        ))),
    }
}

fn require_peak(peak: Option<f64>) -> Result<f64> {
    peak.ok_or_else(|| {
        Error::InvalidParameter("--peak is required for PSNR-family metrics".into())
    })
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let unsupervised_inputs =
        !args.ref_a.is_empty() || !args.ref_b.is_empty() || !args.ref_c.is_empty();
    match (
        !args.avg_refs.is_empty(),
        !args.clean.is_empty(),
        args.noisy.is_some(),
        unsupervised_inputs,
    ) {
        (true, false, false, false) => metrics_avg(args),
        (false, true, false, false) => metrics_supervised(args),
        (false, false, true, false) => metrics_subsampled(args),
        (false, false, false, true) => metrics_unsupervised(args),
        (false, false, false, false) => Err(Error::InvalidParameter(
            "metrics needs one of: --ref-a/--ref-b/--ref-c, --noisy, --clean, or --avg-refs".into(),
        )),
        _ => Err(Error::InvalidParameter(
            "conflicting metric modes: pass exactly one of --ref-a/b/c, --noisy, --clean, or --avg-refs".into(),
        )),
    }
}

struct UnsupervisedRow {
    label: String,
    n: usize,
    umse: f64,
    upsnr: Option<f64>,
    ci_umse: Option<(f64, f64)>,
    ci_upsnr: Option<(f64, f64)>,
    excluded: Option<usize>,
}

const UNSUPERVISED_HEADER: &str =
    "image,n,umse,upsnr,valid,umse_ci_low,umse_ci_high,upsnr_ci_low,upsnr_ci_high,excluded_resamples";

impl UnsupervisedRow {
    fn print(&self) {
        let upsnr = self.upsnr.map(|v| v.to_string()).unwrap_or_default();
        let valid = self.upsnr.is_some();
        let (ulo, uhi) = fmt_ci(self.ci_umse);
        let (plo, phi) = fmt_ci(self.ci_upsnr);
        let excluded = self.excluded.map(|e| e.to_string()).unwrap_or_default();
        println!(
            "{},{},{},{upsnr},{valid},{ulo},{uhi},{plo},{phi},{excluded}",
            self.label, self.n, self.umse
        );
    }
}

fn fmt_ci(ci: Option<(f64, f64)>) -> (String, String) {
    match ci {
        Some((lo, hi)) => (lo.to_string(), hi.to_string()),
        None => (String::new(), String::new()),
    }
}

/// uMSE/uPSNR rows for a list of (label, references, denoised) items plus
/// a pooled row over the concatenated per-pixel terms. Bootstrap seeds:
/// image i uses mix(seed, i), the pooled row mix(seed, u64::MAX).
fn emit_unsupervised(
    items: &[(String, ReferenceSet, ImageGrid)],
    peak: f64,
    bootstrap: Option<(usize, f64)>,
    seed: u64,
) -> Result<()> {
    let bcfg = bootstrap
        .map(|(k, alpha)| BootstrapConfig::new(k, alpha, seed))
        .transpose()?;
    let mut pooled_use: Vec<f64> = Vec::new();
    let mut rows = Vec::new();
    for (i, (label, refs, denoised)) in items.iter().enumerate() {
        let use_values = metrics::use_per_pixel(refs, denoised)?;
        let umse = metrics::umse(refs, denoised)?;
        let upsnr = metrics::psnr(umse, peak).ok();
        let ci = bcfg
            .map(|c| bootstrap_ci(&use_values, peak, &c.with_seed(seeds::mix(seed, i as u64))))
            .transpose()?;
        rows.push(UnsupervisedRow {
            label: label.clone(),
            n: use_values.len(),
            umse,
            upsnr,
            ci_umse: ci.map(|c| c.umse),
            ci_upsnr: ci.and_then(|c| c.upsnr),
            excluded: ci.map(|c| c.excluded_resamples),
        });
        pooled_use.extend_from_slice(&use_values);
    }
    if items.len() > 1 {
        let umse = umetrics::stats::mean(&pooled_use);
        let ci = bcfg
            .map(|c| bootstrap_ci(&pooled_use, peak, &c.with_seed(seeds::mix(seed, TAG_POOLED))))
            .transpose()?;
        rows.push(UnsupervisedRow {
            label: "pooled".into(),
            n: pooled_use.len(),
            umse,
            upsnr: metrics::psnr(umse, peak).ok(),
            ci_umse: ci.map(|c| c.umse),
            ci_upsnr: ci.and_then(|c| c.upsnr),
            excluded: ci.map(|c| c.excluded_resamples),
        });
    }
    println!("{UNSUPERVISED_HEADER}");
    for row in &rows {
        row.print();
    }
    Ok(())
}

fn metrics_unsupervised(args: MetricsArgs) -> Result<()> {
    let n_images = args.denoised.len();
    if n_images == 0 {
        return Err(Error::InvalidParameter("--denoised is required".into()));
    }
    if args.ref_a.len() != n_images || args.ref_b.len() != n_images || args.ref_c.len() != n_images
    {
        return Err(Error::InvalidParameter(
            "--denoised, --ref-a, --ref-b, and --ref-c must list the same number of files".into(),
        ));
    }
    let peak = require_peak(args.peak)?;
    let mut items = Vec::with_capacity(n_images);
    for i in 0..n_images {
        let denoised = read_image(&args.denoised[i])?;
        let a = read_image(&args.ref_a[i])?;
        let b = read_image(&args.ref_b[i])?;
        let c = read_image(&args.ref_c[i])?;
        // The metrics use only a, b, c; the denoiser input is not among the
        // CLI inputs, so reference a stands in as the carrier grid.
        let refs = ReferenceSet::new(a.clone(), a, b, c)?;
        refs.input_y().check_same_shape(&denoised)?;
        items.push((args.denoised[i].display().to_string(), refs, denoised));
    }
    emit_unsupervised(
        &items,
        peak,
        args.bootstrap.map(|k| (k, args.alpha)),
        args.seed,
    )
}

fn metrics_subsampled(args: MetricsArgs) -> Result<()> {
    if args.denoised.len() != 1 {
        return Err(Error::InvalidParameter(
            "--noisy mode takes exactly one --denoised file".into(),
        ));
    }
    let peak = require_peak(args.peak)?;
    let mode = parse_mode(args.subsample.as_deref().ok_or_else(|| {
        Error::InvalidParameter("--subsample {det|rand} is required with --noisy".into())
    })?)?;
    let noisy = read_image(args.noisy.as_ref().unwrap())?;
    let denoised = read_image(&args.denoised[0])?;
    noisy.check_same_shape(&denoised)?;
    let decomposition = spatial_subsample(&noisy, mode, args.seed)?;
    let denoised_sub = decomposition.extract_matching(&denoised, SubImage::Y)?;
    let refs = decomposition.to_reference_set();
    let items = vec![(
        args.denoised[0].display().to_string(),
        refs,
        denoised_sub,
    )];
    emit_unsupervised(
        &items,
        peak,
        args.bootstrap.map(|k| (k, args.alpha)),
        args.seed,
    )
}

fn metrics_supervised(args: MetricsArgs) -> Result<()> {
    let n_images = args.clean.len();
    if args.denoised.len() != n_images {
        return Err(Error::InvalidParameter(
            "--clean and --denoised must list the same number of files".into(),
        ));
    }
    let peak = require_peak(args.peak)?;
    println!("image,n,mse,psnr,valid");
    let mut pooled_se: Vec<f64> = Vec::new();
    let print_row = |label: &str, se_values: &[f64]| {
        let mse = umetrics::stats::mean(se_values);
        let psnr = metrics::psnr(mse, peak).ok();
        let psnr_text = psnr.map(|v| v.to_string()).unwrap_or_default();
        println!(
            "{label},{},{mse},{psnr_text},{}",
            se_values.len(),
            psnr.is_some()
        );
    };
    for i in 0..n_images {
        let clean = read_image(&args.clean[i])?;
        let denoised = read_image(&args.denoised[i])?;
        let se_values = metrics::se_per_pixel(&clean, &denoised)?;
        print_row(&args.denoised[i].display().to_string(), &se_values);
        pooled_se.extend_from_slice(&se_values);
    }
    if n_images > 1 {
        print_row("pooled", &pooled_se);
    }
    Ok(())
}

fn metrics_avg(args: MetricsArgs) -> Result<()> {
    if args.denoised.len() != 1 {
        return Err(Error::InvalidParameter(
            "--avg-refs mode takes exactly one --denoised file".into(),
        ));
    }
    let denoised = read_image(&args.denoised[0])?;
    let references: Vec<ImageGrid> = args
        .avg_refs
        .iter()
        .map(read_image)
        .collect::<Result<_>>()?;
    let value = metrics::mse_avg(&references, &denoised)?;
    println!("image,n,m,mse_avg");
    println!(
        "{},{},{},{value}",
        args.denoised[0].display(),
        denoised.len(),
        references.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate / subsample / experiment
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let format = RasterFormat::parse(&args.format)?;
    let model = NoiseModel::parse(&args.model)?;
    let clean = CleanSource::parse(&args.clean)?.build(seeds::mix(args.seed, TAG_CLEAN))?;
    match (&args.out_noisy, &args.out_refs) {
        (Some(path), None) => {
            let noisy = add_noise(&clean, &model, seeds::mix(args.seed, stream_tag::INPUT_Y))?;
            write_image(&noisy, path, format)
        }
        (None, Some(prefix)) => {
            let refs = make_reference_set(&clean, &model, args.seed)?;
            for (suffix, grid) in [
                ("y", refs.input_y()),
                ("a", refs.ref_a()),
                ("b", refs.ref_b()),
                ("c", refs.ref_c()),
            ] {
                write_image(grid, &suffixed(prefix, suffix, format.extension()), format)?;
            }
            Ok(())
        }
        _ => Err(Error::InvalidParameter(
            "pass exactly one of --out-noisy or --out-refs".into(),
        )),
    }
}

fn suffixed(prefix: &Path, suffix: &str, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(format!("_{suffix}.{ext}"));
    prefix.with_file_name(name)
}

fn cmd_subsample(args: SubsampleArgs) -> Result<()> {
    let format = RasterFormat::parse(&args.format)?;
    let mode = parse_mode(&args.mode)?;
    let mut image = read_image(&args.input)?;
    if args.crop {
        image = crop_to_even(&image)?;
    }
    let out = spatial_subsample(&image, mode, args.seed)?;
    for (suffix, grid) in [
        ("y", &out.sub_y),
        ("a", &out.sub_a),
        ("b", &out.sub_b),
        ("c", &out.sub_c),
    ] {
        write_image(grid, &suffixed(&args.out_prefix, suffix, format.extension()), format)?;
    }
    let mut csv = String::from("block,pos_y,pos_a,pos_b,pos_c\n");
    for (block, [y, a, b, c]) in out.assignment.iter().enumerate() {
        csv.push_str(&format!("{block},{y},{a},{b},{c}\n"));
    }
    let csv_path = suffixed(&args.out_prefix, "assignment", "csv");
    std::fs::write(&csv_path, csv).map_err(|e| Error::Io {
        path: csv_path,
        source: e,
    })
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let config = ExperimentConfig::from_key_values(&text)?;
    let report = umetrics::experiments::run(&config)?;
    report.write_csv(&args.out_dir)?;
    let summary = std::fs::read_to_string(args.out_dir.join("summary.csv")).map_err(|e| {
        Error::Io {
            path: args.out_dir.join("summary.csv"),
            source: e,
        }
    })?;
    print!("{summary}");
    Ok(())
}

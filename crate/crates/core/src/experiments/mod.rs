//! Monte Carlo verification harness: declarative experiment configs, the
//! runs that execute them, and CSV report output.

mod config;
mod runs;

pub use config::{
    Axis, BuiltinPattern, CleanSource, DenoiserSpec, ExperimentConfig, ExperimentKind,
    PatternShape,
};
pub use runs::{
    lag_correlation, reference_relative_rmse, run, run_avg_baseline_bias, run_consistency_slope,
    run_coverage, run_lag_correlation, run_normality, run_subsampling_bias_sweep,
    run_unbiasedness, AvgBaselineBiasReport, AvgBiasPoint, ConsistencySlopeReport,
    CoverageReport, ExperimentReport, LagCorrelationReport, NormalityPoint, NormalityReport,
    SlopePoint, SubsamplingBiasSweepReport, SweepPoint, UnbiasednessReport,
};

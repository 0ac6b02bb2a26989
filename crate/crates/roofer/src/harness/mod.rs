//! Synthetic benchmark harness: roof-surface sampling with the banded
//! vertical noise model, evaluation metrics, the stability experiment, and
//! the batch quality report.

pub mod metrics;
pub mod quality;
pub mod stability;
pub mod synth;

pub use metrics::{eval_iou, eval_psd, world_roof_planes};
pub use quality::{
    assess, run_quality, summarize, BuildingQuality, KindAggregate, QualityInput, QualityReport,
};
pub use stability::{
    random_primitive, run_stability, run_trial, DimensionRanges, KindSummary, StabilityConfig,
    StabilityReport, TrialReport,
};
pub use synth::{add_noise, add_noise_with_stats, sample_surface, NoiseModel, NoiseStats};

//! Stability experiment: fit noisy synthetic clouds from known primitives
//! and report the dimension and translation error statistics per roof kind.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{fit, OptimizerConfig};
use crate::pointcloud::GlobalTranslation;
use crate::primitives::{world_footprint, Pose, PrimitiveKind, RoofPrimitive, ShapeParams};
use crate::util::{derive_seed, population_std, rms, rng_stream};

use super::metrics::{eval_iou, eval_psd};
use super::synth::{add_noise, sample_surface, NoiseModel};

use rand::RngExt;

/// Sampling ranges for random true primitives (residential scale). Width is
/// capped at the drawn length so the ridge runs along the long side.
#[derive(Debug, Clone)]
pub struct DimensionRanges {
    pub length: (f64, f64),
    pub width: (f64, f64),
    pub rise: (f64, f64),
    pub ridge_ratio: (f64, f64),
    pub eave_z: (f64, f64),
}

impl Default for DimensionRanges {
    fn default() -> Self {
        DimensionRanges {
            length: (6.0, 16.0),
            width: (5.0, 12.0),
            rise: (1.5, 5.0),
            ridge_ratio: (0.2, 0.8),
            eave_z: (2.0, 6.0),
        }
    }
}

/// Configuration of one stability run.
#[derive(Debug, Clone)]
pub struct StabilityConfig {
    pub buildings_per_kind: usize,
    pub trials_per_building: usize,
    /// Sampling density in points per square meter of slant roof area.
    pub density: f64,
    pub noise: NoiseModel,
    pub seed: u64,
    pub ranges: DimensionRanges,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            buildings_per_kind: 20,
            trials_per_building: 30,
            density: 4.72,
            noise: NoiseModel::default(),
            seed: 0,
            ranges: DimensionRanges::default(),
        }
    }
}

/// One noisy fit against a known truth.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub kind: PrimitiveKind,
    pub building: usize,
    pub trial: usize,
    pub true_primitive: RoofPrimitive,
    pub estimated: Option<RoofPrimitive>,
    /// Signed estimated-minus-true differences for l, w, h and (hip) the
    /// ridge length rho*l, in meters.
    pub dimension_errors: Vec<f64>,
    /// True dimension values matching `dimension_errors` (for percentages).
    pub true_dimensions: Vec<f64>,
    /// Planar distance between estimated and true footprint centers.
    pub translation_error: f64,
    pub psd_mean: f64,
    pub psd_std: f64,
    pub iou: f64,
    pub converged: bool,
    pub failure: Option<String>,
}

/// Error statistics for one kind (or pooled over all kinds).
#[derive(Debug, Clone)]
pub struct KindSummary {
    pub label: String,
    pub n_buildings: usize,
    pub n_trials: usize,
    pub n_failed: usize,
    pub dim_rmse_m: f64,
    /// Pooled RMSE relative to the mean true dimension, in percent.
    pub dim_rmse_pct: f64,
    pub dim_std_m: f64,
    pub trans_rmse_m: f64,
    pub trans_std_m: f64,
    /// RMSE relative to the mean true value, per parameter.
    pub per_param_rmse_pct: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub trials: Vec<TrialReport>,
    /// Pyramid, gable, hip, then the pooled overall row.
    pub summaries: Vec<KindSummary>,
}

/// Draw a random true primitive from the given ranges, deterministically
/// for a seed.
pub fn random_primitive(kind: PrimitiveKind, ranges: &DimensionRanges, seed: u64) -> RoofPrimitive {
    let mut rng = rng_stream(seed, &[0x7121E]);
    let r = ranges;
    let uniform = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| {
        lo + (hi - lo) * rng.random::<f64>()
    };
    let length = uniform(&mut rng, r.length);
    let width_hi = r.width.1.min(length).max(r.width.0);
    let width = uniform(&mut rng, (r.width.0, width_hi));
    let rise = uniform(&mut rng, r.rise);
    let ridge_ratio = uniform(&mut rng, r.ridge_ratio);
    let rotation = uniform(
        &mut rng,
        (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
    );
    let eave_z = uniform(&mut rng, r.eave_z);
    let shape = match kind {
        PrimitiveKind::Hip => ShapeParams::new_hip(length, width, rise, ridge_ratio),
        _ => ShapeParams::new(length, width, rise),
    };
    RoofPrimitive {
        kind,
        shape,
        pose: Pose::new(rotation, crate::pointcloud::Point3::new(0.0, 0.0, eave_z)),
        t_global: GlobalTranslation::ZERO,
    }
}

/// Dimension labels matching the error vector layout.
fn dimension_values(prim: &RoofPrimitive) -> Vec<f64> {
    let mut v = vec![prim.shape.length, prim.shape.width, prim.shape.rise];
    if let Some(rho) = prim.shape.ridge_ratio {
        v.push(rho * prim.shape.length);
    }
    v
}

/// Run one trial end to end: sample, perturb, center, fit, score.
pub fn run_trial(
    truth: &RoofPrimitive,
    config: &StabilityConfig,
    opt: &OptimizerConfig,
    kind_idx: usize,
    building: usize,
    trial: usize,
) -> TrialReport {
    let kind = truth.kind;
    let tags = [kind_idx as u64, building as u64, trial as u64];
    let sample_seed = derive_seed(config.seed, &[1, tags[0], tags[1], tags[2]]);
    let noise_seed = derive_seed(config.seed, &[2, tags[0], tags[1], tags[2]]);

    let mut report = TrialReport {
        kind,
        building,
        trial,
        true_primitive: *truth,
        estimated: None,
        dimension_errors: Vec::new(),
        true_dimensions: dimension_values(truth),
        translation_error: 0.0,
        psd_mean: 0.0,
        psd_std: 0.0,
        iou: 0.0,
        converged: false,
        failure: None,
    };

    let attempt = || -> Result<(RoofPrimitive, bool, f64, f64, f64)> {
        let cloud = sample_surface(truth, config.density, sample_seed)?;
        let noise = NoiseModel {
            seed: noise_seed,
            ..config.noise.clone()
        };
        let noisy = add_noise(&cloud, &noise)?;
        let (local, t_global) = noisy.to_local()?;
        let result = fit(&local, kind, opt)?;
        let mut estimated = result.primitive;
        estimated.t_global = t_global;
        let (psd_mean, psd_std) = eval_psd(&noisy, &estimated)?;
        let iou = eval_iou(&estimated, &world_footprint(truth)?)?;
        Ok((estimated, result.converged, psd_mean, psd_std, iou))
    };

    match attempt() {
        Err(e) => report.failure = Some(e.to_string()),
        Ok((mut estimated, converged, psd_mean, psd_std, iou)) => {
            // A pyramid is invariant under quarter-turn with swapped
            // extents; compare in the l >= w normal form the generator uses.
            if kind == PrimitiveKind::Pyramid && estimated.shape.length < estimated.shape.width {
                std::mem::swap(&mut estimated.shape.length, &mut estimated.shape.width);
                estimated.pose.rotation =
                    crate::primitives::fold_half_turn(estimated.pose.rotation + std::f64::consts::FRAC_PI_2);
            }
            let est_dims = dimension_values(&estimated);
            report.dimension_errors = est_dims
                .iter()
                .zip(&report.true_dimensions)
                .map(|(e, t)| e - t)
                .collect();
            let ex = estimated.t_global.x + estimated.pose.translation.x;
            let ey = estimated.t_global.y + estimated.pose.translation.y;
            let tx = truth.t_global.x + truth.pose.translation.x;
            let ty = truth.t_global.y + truth.pose.translation.y;
            report.translation_error = (ex - tx).hypot(ey - ty);
            report.psd_mean = psd_mean;
            report.psd_std = psd_std;
            report.iou = iou;
            report.converged = converged;
            report.estimated = Some(estimated);
        }
    }
    report
}

const PARAM_LABELS: [&str; 4] = ["l", "w", "h", "rho*l"];

fn summarize(label: &str, n_buildings: usize, trials: &[&TrialReport]) -> KindSummary {
    let ok: Vec<&&TrialReport> = trials.iter().filter(|t| t.failure.is_none()).collect();
    let n_failed = trials
        .iter()
        .filter(|t| t.failure.is_some() || !t.converged)
        .count();

    let pooled_err: Vec<f64> = ok
        .iter()
        .flat_map(|t| t.dimension_errors.iter().copied())
        .collect();
    let pooled_true: Vec<f64> = ok
        .iter()
        .flat_map(|t| t.true_dimensions.iter().copied())
        .collect();
    let trans: Vec<f64> = ok.iter().map(|t| t.translation_error).collect();

    let dim_rmse_m = rms(&pooled_err);
    let mean_true = if pooled_true.is_empty() {
        1.0
    } else {
        pooled_true.iter().map(|v| v.abs()).sum::<f64>() / pooled_true.len() as f64
    };

    let mut per_param = Vec::new();
    for p in 0..4 {
        let errs: Vec<f64> = ok
            .iter()
            .filter_map(|t| t.dimension_errors.get(p).copied())
            .collect();
        if errs.is_empty() {
            continue;
        }
        let trues: Vec<f64> = ok
            .iter()
            .filter_map(|t| t.true_dimensions.get(p).copied())
            .collect();
        let mean_t = trues.iter().map(|v| v.abs()).sum::<f64>() / trues.len() as f64;
        per_param.push((PARAM_LABELS[p], 100.0 * rms(&errs) / mean_t.max(1e-12)));
    }

    KindSummary {
        label: label.to_string(),
        n_buildings,
        n_trials: trials.len(),
        n_failed,
        dim_rmse_m,
        dim_rmse_pct: 100.0 * dim_rmse_m / mean_true.max(1e-12),
        dim_std_m: population_std(&pooled_err),
        trans_rmse_m: rms(&trans),
        trans_std_m: population_std(&trans),
        per_param_rmse_pct: per_param,
    }
}

/// Run the full stability experiment. Trials carry independent RNG streams
/// derived from `(seed, kind, building, trial)`, so any `jobs` level yields
/// the same report.
pub fn run_stability(
    config: &StabilityConfig,
    opt: &OptimizerConfig,
    jobs: usize,
) -> Result<StabilityReport> {
    if config.buildings_per_kind == 0 || config.trials_per_building == 0 {
        return Err(Error::InvalidParameter {
            field: "buildings_per_kind",
            message: "counts must be positive".into(),
        });
    }
    config.noise.validate()?;
    opt.validate()?;

    let mut tasks: Vec<(usize, usize, usize, RoofPrimitive)> = Vec::new();
    for (kind_idx, kind) in PrimitiveKind::ALL.iter().enumerate() {
        for b in 0..config.buildings_per_kind {
            let truth = random_primitive(
                *kind,
                &config.ranges,
                derive_seed(config.seed, &[0x70, kind_idx as u64, b as u64]),
            );
            for t in 0..config.trials_per_building {
                tasks.push((kind_idx, b, t, truth));
            }
        }
    }

    let run = |(kind_idx, b, t, truth): &(usize, usize, usize, RoofPrimitive)| {
        run_trial(truth, config, opt, *kind_idx, *b, *t)
    };
    let trials: Vec<TrialReport> = if jobs <= 1 {
        tasks.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParameter {
                field: "jobs",
                message: e.to_string(),
            })?;
        pool.install(|| tasks.par_iter().map(run).collect())
    };

    let mut summaries = Vec::with_capacity(4);
    for kind in PrimitiveKind::ALL {
        let of_kind: Vec<&TrialReport> = trials.iter().filter(|t| t.kind == kind).collect();
        summaries.push(summarize(kind.name(), config.buildings_per_kind, &of_kind));
    }
    let all: Vec<&TrialReport> = trials.iter().collect();
    summaries.push(summarize(
        "overall",
        config.buildings_per_kind * PrimitiveKind::ALL.len(),
        &all,
    ));

    Ok(StabilityReport { trials, summaries })
}

impl StabilityReport {
    /// Table-shaped CSV: one row per kind plus the overall row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "kind,n_buildings,dim_rmse_m,dim_rmse_pct,dim_std_m,trans_rmse_m,trans_std_m,n_failed\n",
        );
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.label,
                s.n_buildings,
                s.dim_rmse_m,
                s.dim_rmse_pct,
                s.dim_std_m,
                s.trans_rmse_m,
                s.trans_std_m,
                s.n_failed
            ));
        }
        out
    }

    /// Human-readable summary for standard output.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<9} {:>6} {:>12} {:>12} {:>10} {:>12} {:>11} {:>8}\n",
            "kind", "bldgs", "dim RMSE m", "dim RMSE %", "dim STD m", "trans RMSE m", "trans STD m", "failed"
        ));
        for s in &self.summaries {
            out.push_str(&format!(
                "{:<9} {:>6} {:>12.4} {:>12.2} {:>10.4} {:>12.4} {:>11.4} {:>8}\n",
                s.label,
                s.n_buildings,
                s.dim_rmse_m,
                s.dim_rmse_pct,
                s.dim_std_m,
                s.trans_rmse_m,
                s.trans_std_m,
                s.n_failed
            ));
        }
        out.push_str("per-parameter RMSE%: ");
        for s in &self.summaries {
            let parts: Vec<String> = s
                .per_param_rmse_pct
                .iter()
                .map(|(name, pct)| format!("{name}={pct:.2}"))
                .collect();
            out.push_str(&format!("[{} {}] ", s.label, parts.join(" ")));
        }
        out.push('\n');
        out
    }
}

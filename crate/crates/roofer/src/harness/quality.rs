//! Batch quality evaluation: classify, fit and score a set of building
//! clouds, then aggregate per kind with fixed-bin error histograms.

use rayon::prelude::*;

use crate::geometry::Polygon2D;
use crate::optimizer::{fit_world, CostBreakdown, OptimizerConfig};
use crate::pointcloud::PointCloud;
use crate::primitives::{PrimitiveKind, RoofPrimitive};

use super::metrics::{eval_iou, eval_psd};

pub const PSD_BIN_WIDTH: f64 = 0.02;
pub const PSD_BIN_COUNT: usize = 25; // 0 .. 0.5 m
pub const IOU_BIN_WIDTH: f64 = 0.02;
pub const IOU_BIN_COUNT: usize = 50; // 0 .. 1

/// One building to evaluate: a world-frame cloud and an optional reference
/// footprint for the IoU column.
#[derive(Debug, Clone)]
pub struct QualityInput {
    pub id: String,
    pub cloud: PointCloud,
    pub truth_footprint: Option<Polygon2D>,
}

/// Per-building metrics row.
#[derive(Debug, Clone)]
pub struct BuildingQuality {
    pub id: String,
    pub kind: Option<PrimitiveKind>,
    pub n_points: usize,
    pub psd_mean: f64,
    pub psd_std: f64,
    /// Against the truth footprint when given, otherwise against the
    /// cloud's own alpha-shape boundary.
    pub iou: f64,
    pub converged: bool,
    pub primitive: Option<RoofPrimitive>,
    pub cost: Option<CostBreakdown>,
    pub failure: Option<String>,
}

/// Aggregate row for one kind (or all buildings pooled).
#[derive(Debug, Clone)]
pub struct KindAggregate {
    pub label: String,
    pub n_buildings: usize,
    pub n_points: usize,
    /// Point-count-weighted mean of the per-building mean PSD.
    pub psd_mean: f64,
    /// Pooled population standard deviation of the PSD.
    pub psd_std: f64,
    pub iou_mean: f64,
}

#[derive(Debug, Clone)]
pub struct QualityReport {
    pub buildings: Vec<BuildingQuality>,
    /// One row per kind present plus an overall row.
    pub aggregates: Vec<KindAggregate>,
    pub psd_histogram: Vec<usize>,
    pub iou_histogram: Vec<usize>,
}

/// Score one already-fitted building against its cloud.
pub fn assess(
    id: &str,
    cloud: &PointCloud,
    prim: &RoofPrimitive,
    truth_footprint: Option<&Polygon2D>,
    iou_fallback: Option<f64>,
    cost: Option<CostBreakdown>,
    converged: bool,
) -> BuildingQuality {
    let outcome = (|| -> crate::error::Result<(f64, f64, f64)> {
        let (psd_mean, psd_std) = eval_psd(cloud, prim)?;
        let iou = match truth_footprint {
            Some(truth) => eval_iou(prim, truth)?,
            None => iou_fallback.unwrap_or(f64::NAN),
        };
        Ok((psd_mean, psd_std, iou))
    })();
    match outcome {
        Ok((psd_mean, psd_std, iou)) => BuildingQuality {
            id: id.to_string(),
            kind: Some(prim.kind),
            n_points: cloud.len(),
            psd_mean,
            psd_std,
            iou,
            converged,
            primitive: Some(*prim),
            cost,
            failure: None,
        },
        Err(e) => BuildingQuality {
            id: id.to_string(),
            kind: Some(prim.kind),
            n_points: cloud.len(),
            psd_mean: 0.0,
            psd_std: 0.0,
            iou: 0.0,
            converged,
            primitive: Some(*prim),
            cost,
            failure: Some(e.to_string()),
        },
    }
}

fn classify_and_assess(
    input: &QualityInput,
    opt: &OptimizerConfig,
    alpha_radius: Option<f64>,
) -> BuildingQuality {
    match fit_world(&input.cloud, None, opt, alpha_radius) {
        Ok((best, _)) => assess(
            &input.id,
            &input.cloud,
            &best.primitive,
            input.truth_footprint.as_ref(),
            Some(1.0 - best.cost.j2),
            Some(best.cost),
            best.converged,
        ),
        Err(e) => BuildingQuality {
            id: input.id.clone(),
            kind: None,
            n_points: input.cloud.len(),
            psd_mean: 0.0,
            psd_std: 0.0,
            iou: 0.0,
            converged: false,
            primitive: None,
            cost: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Build aggregates and histograms from assessed rows.
pub fn summarize(buildings: Vec<BuildingQuality>) -> QualityReport {
    let mut psd_histogram = vec![0usize; PSD_BIN_COUNT];
    let mut iou_histogram = vec![0usize; IOU_BIN_COUNT];
    for b in buildings.iter().filter(|b| b.failure.is_none()) {
        let pbin = ((b.psd_mean / PSD_BIN_WIDTH) as usize).min(PSD_BIN_COUNT - 1);
        psd_histogram[pbin] += 1;
        let ibin = ((b.iou / IOU_BIN_WIDTH) as usize).min(IOU_BIN_COUNT - 1);
        iou_histogram[ibin] += 1;
    }

    let aggregate = |label: &str, rows: &[&BuildingQuality]| -> KindAggregate {
        let n_points: usize = rows.iter().map(|b| b.n_points).sum();
        let weight = n_points.max(1) as f64;
        let psd_mean = rows
            .iter()
            .map(|b| b.psd_mean * b.n_points as f64)
            .sum::<f64>()
            / weight;
        // Pooled variance from per-building moments.
        let second_moment = rows
            .iter()
            .map(|b| (b.psd_std * b.psd_std + b.psd_mean * b.psd_mean) * b.n_points as f64)
            .sum::<f64>()
            / weight;
        let psd_std = (second_moment - psd_mean * psd_mean).max(0.0).sqrt();
        let iou_mean = if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|b| b.iou).sum::<f64>() / rows.len() as f64
        };
        KindAggregate {
            label: label.to_string(),
            n_buildings: rows.len(),
            n_points,
            psd_mean,
            psd_std,
            iou_mean,
        }
    };

    let ok_rows: Vec<&BuildingQuality> =
        buildings.iter().filter(|b| b.failure.is_none()).collect();
    let mut aggregates = Vec::new();
    for kind in PrimitiveKind::ALL {
        let rows: Vec<&BuildingQuality> = ok_rows
            .iter()
            .copied()
            .filter(|b| b.kind == Some(kind))
            .collect();
        if !rows.is_empty() {
            aggregates.push(aggregate(kind.name(), &rows));
        }
    }
    aggregates.push(aggregate("overall", &ok_rows));

    QualityReport {
        buildings,
        aggregates,
        psd_histogram,
        iou_histogram,
    }
}

/// Classify, fit and score every input. Per-building failures land in the
/// rows; the batch always completes.
pub fn run_quality(
    inputs: &[QualityInput],
    opt: &OptimizerConfig,
    alpha_radius: Option<f64>,
    jobs: usize,
) -> QualityReport {
    let rows: Vec<BuildingQuality> = if jobs <= 1 {
        inputs
            .iter()
            .map(|i| classify_and_assess(i, opt, alpha_radius))
            .collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| {
                inputs
                    .par_iter()
                    .map(|i| classify_and_assess(i, opt, alpha_radius))
                    .collect()
            }),
            Err(_) => inputs
                .iter()
                .map(|i| classify_and_assess(i, opt, alpha_radius))
                .collect(),
        }
    };
    summarize(rows)
}

impl QualityReport {
    /// Per-building rows followed by the aggregate rows.
    pub fn metrics_csv(&self) -> String {
        let mut out =
            String::from("id,kind,n_points,psd_mean_m,psd_std_m,iou,converged,failure\n");
        for b in &self.buildings {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                b.id,
                b.kind.map(|k| k.name()).unwrap_or("-"),
                b.n_points,
                b.psd_mean,
                b.psd_std,
                b.iou,
                b.converged,
                b.failure.as_deref().unwrap_or("")
            ));
        }
        for a in &self.aggregates {
            out.push_str(&format!(
                "(aggregate),{},{},{},{},{},,\n",
                a.label, a.n_points, a.psd_mean, a.psd_std, a.iou_mean
            ));
        }
        out
    }

    pub fn psd_histogram_csv(&self) -> String {
        let mut out = String::from("bin_lo_m,bin_hi_m,count\n");
        for (i, c) in self.psd_histogram.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                i as f64 * PSD_BIN_WIDTH,
                (i + 1) as f64 * PSD_BIN_WIDTH,
                c
            ));
        }
        out
    }

    pub fn iou_histogram_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.iou_histogram.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                i as f64 * IOU_BIN_WIDTH,
                (i + 1) as f64 * IOU_BIN_WIDTH,
                c
            ));
        }
        out
    }

    /// Human-readable aggregate table.
    pub fn pretty(&self) -> String {
        let mut out = format!(
            "{:<9} {:>6} {:>9} {:>12} {:>11} {:>9}\n",
            "kind", "bldgs", "points", "mean PSD m", "std PSD m", "mean IoU"
        );
        for a in &self.aggregates {
            out.push_str(&format!(
                "{:<9} {:>6} {:>9} {:>12.4} {:>11.4} {:>9.4}\n",
                a.label, a.n_buildings, a.n_points, a.psd_mean, a.psd_std, a.iou_mean
            ));
        }
        out
    }
}

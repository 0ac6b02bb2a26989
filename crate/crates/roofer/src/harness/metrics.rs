//! Evaluation metrics: point-surface distance against the reconstructed
//! roof, and footprint IoU against a reference boundary.

use crate::error::{Error, Result};
use crate::geometry::{fit_plane_svd, iou_2d, Plane, Polygon2D};
use crate::pointcloud::PointCloud;
use crate::primitives::{roof_faces, world_footprint, RoofPrimitive};
use crate::reconstruct::world_vertices;

/// Planes of the primitive's roof faces in the world frame.
pub fn world_roof_planes(prim: &RoofPrimitive) -> Result<Vec<Plane>> {
    let verts = world_vertices(prim)?;
    roof_faces(prim.kind)
        .faces
        .iter()
        .map(|ring| {
            let pts: Vec<_> = ring.iter().map(|&i| verts[i]).collect();
            fit_plane_svd(&pts)
        })
        .collect()
}

/// Mean and population standard deviation of the per-point distance to the
/// nearest roof plane. The cloud must be in the same frame as the
/// primitive's world placement.
pub fn eval_psd(cloud: &PointCloud, prim: &RoofPrimitive) -> Result<(f64, f64)> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("PSD of empty cloud".into()));
    }
    let planes = world_roof_planes(prim)?;
    let n = cloud.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in &cloud.points {
        let d = planes
            .iter()
            .map(|pl| pl.distance(p))
            .fold(f64::INFINITY, f64::min);
        sum += d;
        sum_sq += d * d;
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, var.sqrt()))
}

/// 2D IoU between the primitive's world footprint and a reference footprint.
pub fn eval_iou(prim: &RoofPrimitive, truth: &Polygon2D) -> Result<f64> {
    Ok(iou_2d(&world_footprint(prim)?, truth))
}

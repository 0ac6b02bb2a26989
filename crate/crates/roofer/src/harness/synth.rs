//! Synthetic roof clouds and the banded vertical noise model.

use rand::RngExt;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::pointcloud::{Frame, Point3, PointCloud};
use crate::primitives::{roof_faces, RoofPrimitive};
use crate::reconstruct::world_vertices;
use crate::util::{rng_stream, rms};

/// Vertical banded noise: magnitudes drawn uniformly inside bands of width
/// `rmse` chosen with `band_probs`, random sign, then globally rescaled so
/// the realized RMSE hits `rmse` exactly.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub rmse: f64,
    /// Probabilities of the [0,1), [1,2), [2,3) x rmse magnitude bands.
    pub band_probs: [f64; 3],
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            rmse: 0.12,
            band_probs: [0.90, 0.09, 0.01],
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.rmse >= 0.0) || !self.rmse.is_finite() {
            return Err(Error::InvalidParameter {
                field: "rmse",
                message: format!("must be non-negative and finite, got {}", self.rmse),
            });
        }
        let sum: f64 = self.band_probs.iter().sum();
        if self.band_probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                field: "band_probs",
                message: format!("must be non-negative and sum to 1, got {:?}", self.band_probs),
            });
        }
        Ok(())
    }
}

/// Bookkeeping from one noise application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStats {
    /// RMS of the applied offsets after rescaling.
    pub realized_rmse: f64,
    /// How many draws fell in each magnitude band.
    pub band_counts: [usize; 3],
    /// Global factor applied to hit the configured RMSE.
    pub scale: f64,
}

/// Sample a cloud from the roof surfaces of a primitive (world frame).
///
/// The total count is Poisson with mean `density x total slant area`. Face
/// vertices and evenly spaced points along every face edge (at the linear
/// density `sqrt(density)`) are placed first so the projected outline of the
/// cloud traces the footprint; the rest of the budget is filled uniformly by
/// area. Deterministic for a fixed seed.
pub fn sample_surface(prim: &RoofPrimitive, density: f64, seed: u64) -> Result<PointCloud> {
    if !(density > 0.0) || !density.is_finite() {
        return Err(Error::InvalidParameter {
            field: "density",
            message: format!("must be positive and finite, got {density}"),
        });
    }
    prim.validate()?;
    let verts = world_vertices(prim)?;
    let topology = roof_faces(prim.kind);

    // Fan-triangulate each face; remember per-triangle areas for the
    // area-uniform interior draw.
    let mut triangles: Vec<([Point3; 3], f64)> = Vec::new();
    let mut total_area = 0.0;
    for ring in &topology.faces {
        let base = verts[ring[0]];
        for i in 1..ring.len() - 1 {
            let (b, c) = (verts[ring[i]], verts[ring[i + 1]]);
            let ab = b.sub(&base);
            let ac = c.sub(&base);
            let cx = ab.y * ac.z - ab.z * ac.y;
            let cy = ab.z * ac.x - ab.x * ac.z;
            let cz = ab.x * ac.y - ab.y * ac.x;
            let area = 0.5 * (cx * cx + cy * cy + cz * cz).sqrt();
            if area > 0.0 {
                triangles.push(([base, b, c], area));
                total_area += area;
            }
        }
    }
    if triangles.is_empty() {
        return Err(Error::DegenerateGeometry("primitive has no roof area".into()));
    }

    let mut rng = rng_stream(seed, &[0x5A17]);
    let target: f64 = Poisson::new(density * total_area)
        .map_err(|e| Error::InvalidParameter {
            field: "density",
            message: format!("invalid Poisson mean: {e}"),
        })?
        .sample(&mut rng);
    let target = target.round().max(0.0) as usize;

    // Structural points: unique vertices, then evenly spaced edge points.
    let quant = |p: &Point3| ((p.x * 1e9) as i64, (p.y * 1e9) as i64, (p.z * 1e9) as i64);
    let mut structural: Vec<Point3> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for ring in &topology.faces {
        for &i in ring {
            if seen.insert(quant(&verts[i])) {
                structural.push(verts[i]);
            }
        }
    }
    let mut edges = std::collections::HashSet::new();
    let linear_density = density.sqrt();
    for ring in &topology.faces {
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            if a == b || !edges.insert((a.min(b), a.max(b))) {
                continue;
            }
            let (pa, pb) = (verts[a], verts[b]);
            let len = pa.dist(&pb);
            let k = (len * linear_density).floor() as usize;
            for j in 1..=k {
                let t = j as f64 / (k + 1) as f64;
                structural.push(Point3::new(
                    pa.x + t * (pb.x - pa.x),
                    pa.y + t * (pb.y - pa.y),
                    pa.z + t * (pb.z - pa.z),
                ));
            }
        }
    }
    structural.truncate(target);

    let mut points = structural;
    let cumulative: Vec<f64> = triangles
        .iter()
        .scan(0.0, |acc, (_, a)| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    while points.len() < target {
        let pick = rng.random::<f64>() * total_area;
        let idx = cumulative.partition_point(|&c| c < pick).min(triangles.len() - 1);
        let ([a, b, c], _) = &triangles[idx];
        let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        points.push(Point3::new(
            a.x + u * (b.x - a.x) + v * (c.x - a.x),
            a.y + u * (b.y - a.y) + v * (c.y - a.y),
            a.z + u * (b.z - a.z) + v * (c.z - a.z),
        ));
    }
    Ok(PointCloud {
        points,
        frame: Frame::World,
        srs_name: None,
    })
}

/// Apply the noise model, returning the perturbed cloud and the realized
/// statistics. Offsets are vertical; a zero RMSE leaves the cloud unchanged.
pub fn add_noise_with_stats(cloud: &PointCloud, model: &NoiseModel) -> Result<(PointCloud, NoiseStats)> {
    model.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyInput("noise on empty cloud".into()));
    }
    if model.rmse == 0.0 {
        return Ok((
            cloud.clone(),
            NoiseStats {
                realized_rmse: 0.0,
                band_counts: [0; 3],
                scale: 1.0,
            },
        ));
    }
    let mut rng = rng_stream(model.seed, &[0x4015E]);
    let c1 = model.band_probs[0];
    let c2 = c1 + model.band_probs[1];
    let mut band_counts = [0usize; 3];
    let mut offsets: Vec<f64> = Vec::with_capacity(cloud.len());
    for _ in 0..cloud.len() {
        let u: f64 = rng.random();
        let band = if u < c1 {
            0
        } else if u < c2 {
            1
        } else {
            2
        };
        band_counts[band] += 1;
        let magnitude = (band as f64 + rng.random::<f64>()) * model.rmse;
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        offsets.push(sign * magnitude);
    }
    let raw_rms = rms(&offsets);
    let scale = if raw_rms > 0.0 { model.rmse / raw_rms } else { 1.0 };
    for dz in &mut offsets {
        *dz *= scale;
    }
    let points = cloud
        .points
        .iter()
        .zip(&offsets)
        .map(|(p, dz)| Point3::new(p.x, p.y, p.z + dz))
        .collect();
    Ok((
        PointCloud {
            points,
            frame: cloud.frame,
            srs_name: cloud.srs_name.clone(),
        },
        NoiseStats {
            realized_rmse: rms(&offsets),
            band_counts,
            scale,
        },
    ))
}

/// Apply the noise model, discarding the statistics.
pub fn add_noise(cloud: &PointCloud, model: &NoiseModel) -> Result<PointCloud> {
    Ok(add_noise_with_stats(cloud, model)?.0)
}

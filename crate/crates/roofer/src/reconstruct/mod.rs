//! From fitted primitive to watertight semantic building model: world-frame
//! vertices, roof/wall/ground boundary assembly, DEM-based ground
//! elevation, CityGML emission and the intermediate parameter file.

mod citygml;
mod dem;
mod params;

pub use citygml::{citygml_string, write_citygml};
pub use dem::Dem;
pub use params::{params_from_json, params_to_json, read_params_json, write_params_json, ParamsFile};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::pointcloud::Point3;
use crate::primitives::{
    apply_pose, eave_corner_indices, roof_faces, roof_vertices, world_footprint, PrimitiveKind,
    RoofPrimitive,
};

/// Semantic class of a boundary surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceLabel {
    Roof,
    Wall,
    Ground,
}

impl SurfaceLabel {
    pub fn citygml_name(&self) -> &'static str {
        match self {
            SurfaceLabel::Roof => "RoofSurface",
            SurfaceLabel::Wall => "WallSurface",
            SurfaceLabel::Ground => "GroundSurface",
        }
    }
}

/// One labelled planar surface; the ring is closed (first point repeated at
/// the end) and counter-clockwise seen from outside the solid.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSurface {
    pub label: SurfaceLabel,
    pub ring: Vec<Point3>,
}

/// Watertight semantic boundary representation of one building.
#[derive(Debug, Clone)]
pub struct BuildingModel {
    pub id: String,
    pub surfaces: Vec<SemanticSurface>,
    pub envelope: (Point3, Point3),
    pub measured_height: f64,
    pub srs_name: Option<String>,
    /// Terrain intersection curve (closed), present when a DEM was used.
    pub terrain_curve: Option<Vec<Point3>>,
}

/// World coordinates of the roof vertices: rotate by the pose angle, then
/// apply the local and global translations.
pub fn world_vertices(prim: &RoofPrimitive) -> Result<Vec<Point3>> {
    let verts = roof_vertices(prim.kind, &prim.shape)?;
    let posed = apply_pose(&verts, &prim.pose);
    let t = prim.t_global.as_point();
    Ok(posed.iter().map(|p| p.add(&t)).collect())
}

/// Minimum of the ground elevations over the footprint vertices. With a DEM
/// each vertex is sampled bilinearly; without one the caller-provided
/// fallback is returned.
pub fn ground_elevation(dem: Option<&Dem>, footprint: &[Point2], fallback: f64) -> Result<f64> {
    if footprint.is_empty() {
        return Err(Error::EmptyInput("ground elevation of empty footprint".into()));
    }
    match dem {
        None => Ok(fallback),
        Some(dem) => {
            let mut z_min = f64::INFINITY;
            for v in footprint {
                z_min = z_min.min(dem.sample_bilinear(v.x, v.y)?);
            }
            Ok(z_min)
        }
    }
}

/// Terrain intersection curve: the footprint ring sampled on the DEM,
/// closed by repeating the first vertex.
pub fn terrain_curve(prim: &RoofPrimitive, dem: &Dem) -> Result<Vec<Point3>> {
    let footprint = world_footprint(prim)?;
    let mut curve: Vec<Point3> = footprint
        .ring()
        .iter()
        .map(|v| Ok(Point3::new(v.x, v.y, dem.sample_bilinear(v.x, v.y)?)))
        .collect::<Result<_>>()?;
    if let Some(first) = curve.first().copied() {
        curve.push(first);
    }
    Ok(curve)
}

// Merge consecutive coincident vertices (hip with a zero ridge collapses
// trapezoids to triangles); a closed zero-area ring comes back empty.
fn dedupe_ring(points: Vec<Point3>) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().map(|q| q.dist(&p) > 1e-9).unwrap_or(true) {
            out.push(p);
        }
    }
    while out.len() > 1 && out.first().unwrap().dist(out.last().unwrap()) <= 1e-9 {
        out.pop();
    }
    out
}

fn close_ring(mut ring: Vec<Point3>) -> Vec<Point3> {
    if let Some(first) = ring.first().copied() {
        ring.push(first);
    }
    ring
}

/// Assemble the closed semantic surface set of a fitted primitive over a
/// horizontal ground plane at `base_z` (world elevation).
///
/// Gable yields 2 roof + 4 wall (two rectangles and two pentagons through
/// the ridge) + 1 ground = 7 surfaces; pyramid and hip yield 4 + 4 + 1 = 9.
/// Ground vertices sit under the eave corners at `base_z`.
pub fn assemble(prim: &RoofPrimitive, base_z: f64, id: &str) -> Result<BuildingModel> {
    prim.validate()?;
    let eave_z = prim.t_global.z + prim.pose.translation.z;
    if !(base_z < eave_z - 1e-9) {
        return Err(Error::InvalidBase(format!(
            "base elevation {base_z} is not below the eave elevation {eave_z}"
        )));
    }
    let wverts = world_vertices(prim)?;
    let mut surfaces = Vec::with_capacity(9);

    for ring in roof_faces(prim.kind).faces {
        let pts: Vec<Point3> = ring.iter().map(|&i| wverts[i]).collect();
        let pts = dedupe_ring(pts);
        if pts.len() < 3 {
            continue; // fully degenerate face (zero-width primitive)
        }
        surfaces.push(SemanticSurface {
            label: SurfaceLabel::Roof,
            ring: close_ring(pts),
        });
    }

    // Eave corners in v1, v2, v5, v6 order and their ground images.
    let corner_idx = eave_corner_indices(prim.kind);
    let c: Vec<Point3> = corner_idx.iter().map(|&i| wverts[i]).collect();
    let g: Vec<Point3> = c.iter().map(|p| Point3::new(p.x, p.y, base_z)).collect();

    let wall = |ring: Vec<Point3>| SemanticSurface {
        label: SurfaceLabel::Wall,
        ring: close_ring(dedupe_ring(ring)),
    };
    match prim.kind {
        PrimitiveKind::Gable => {
            let ridge_pos = wverts[2]; // v3, on the +x gable end
            let ridge_neg = wverts[3]; // v4, on the -x gable end
            surfaces.push(wall(vec![c[0], c[1], g[1], g[0]]));
            surfaces.push(wall(vec![c[1], ridge_pos, c[3], g[3], g[1]]));
            surfaces.push(wall(vec![c[3], c[2], g[2], g[3]]));
            surfaces.push(wall(vec![c[2], ridge_neg, c[0], g[0], g[2]]));
        }
        PrimitiveKind::Pyramid | PrimitiveKind::Hip => {
            surfaces.push(wall(vec![c[0], c[1], g[1], g[0]]));
            surfaces.push(wall(vec![c[1], c[3], g[3], g[1]]));
            surfaces.push(wall(vec![c[3], c[2], g[2], g[3]]));
            surfaces.push(wall(vec![c[2], c[0], g[0], g[2]]));
        }
    }

    // Ground ring oriented downward (outward from the solid).
    surfaces.push(SemanticSurface {
        label: SurfaceLabel::Ground,
        ring: close_ring(vec![g[0], g[1], g[3], g[2]]),
    });

    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in &surfaces {
        for p in &s.ring {
            lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
    }

    Ok(BuildingModel {
        id: id.to_string(),
        surfaces,
        envelope: (lo, hi),
        measured_height: eave_z + prim.shape.rise - base_z,
        srs_name: None,
        terrain_curve: None,
    })
}

impl BuildingModel {
    /// Every undirected edge of the surface set must be shared by exactly
    /// two surfaces for the boundary to enclose a volume.
    pub fn is_watertight(&self) -> bool {
        use std::collections::HashMap;
        let q = |v: f64| (v * 1e8).round() as i64;
        let mut edges: HashMap<((i64, i64, i64), (i64, i64, i64)), usize> = HashMap::new();
        for s in &self.surfaces {
            let ring = &s.ring[..s.ring.len() - 1]; // drop the closing vertex
            for i in 0..ring.len() {
                let a = ring[i];
                let b = ring[(i + 1) % ring.len()];
                let ka = (q(a.x), q(a.y), q(a.z));
                let kb = (q(b.x), q(b.y), q(b.z));
                let key = if ka <= kb { (ka, kb) } else { (kb, ka) };
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        !edges.is_empty() && edges.values().all(|&c| c == 2)
    }

    /// Signed volume from the oriented surface fans; positive when all
    /// surfaces face outward.
    pub fn signed_volume(&self) -> f64 {
        // Work relative to the envelope center to avoid catastrophic
        // cancellation at UTM-scale coordinates.
        let center = Point3::new(
            (self.envelope.0.x + self.envelope.1.x) / 2.0,
            (self.envelope.0.y + self.envelope.1.y) / 2.0,
            (self.envelope.0.z + self.envelope.1.z) / 2.0,
        );
        let mut six_v = 0.0;
        for s in &self.surfaces {
            let ring = &s.ring[..s.ring.len() - 1];
            if ring.len() < 3 {
                continue;
            }
            let p0 = ring[0].sub(&center);
            for i in 1..ring.len() - 1 {
                let p1 = ring[i].sub(&center);
                let p2 = ring[i + 1].sub(&center);
                six_v += p0.x * (p1.y * p2.z - p1.z * p2.y)
                    - p0.y * (p1.x * p2.z - p1.z * p2.x)
                    + p0.z * (p1.x * p2.y - p1.y * p2.x);
            }
        }
        six_v / 6.0
    }

    pub fn surface_count(&self, label: SurfaceLabel) -> usize {
        self.surfaces.iter().filter(|s| s.label == label).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::GlobalTranslation;
    use crate::primitives::{Pose, ShapeParams};
    use std::f64::consts::FRAC_PI_2;

    fn gable(l: f64, w: f64, h: f64) -> RoofPrimitive {
        RoofPrimitive {
            kind: PrimitiveKind::Gable,
            shape: ShapeParams::new(l, w, h),
            pose: Pose::IDENTITY,
            t_global: GlobalTranslation::ZERO,
        }
    }

    fn hip(l: f64, w: f64, h: f64, rho: f64) -> RoofPrimitive {
        RoofPrimitive {
            kind: PrimitiveKind::Hip,
            shape: ShapeParams::new_hip(l, w, h, rho),
            pose: Pose::IDENTITY,
            t_global: GlobalTranslation::ZERO,
        }
    }

    #[test]
    fn world_vertices_identity_equals_local() {
        let prim = gable(10.0, 8.0, 3.0);
        let w = world_vertices(&prim).unwrap();
        let l = roof_vertices(prim.kind, &prim.shape).unwrap();
        assert_eq!(w, l);
    }

    #[test]
    fn world_vertices_hand_rotation() {
        let mut prim = gable(10.0, 8.0, 3.0);
        prim.pose.rotation = FRAC_PI_2;
        prim.t_global = GlobalTranslation::new(100.0, 200.0, 50.0);
        let w = world_vertices(&prim).unwrap();
        // Ridge (±5, 0, 3) rotates onto (0, ±5, 3) and shifts.
        let ridge: Vec<Point3> = vec![w[2], w[3]];
        for r in &ridge {
            assert!((r.x - 100.0).abs() < 1e-9);
            assert!((r.z - 53.0).abs() < 1e-9);
        }
        let ys: Vec<f64> = ridge.iter().map(|r| r.y).collect();
        assert!(ys.contains(&205.0) && ys.contains(&195.0), "{ys:?}");
    }

    #[test]
    fn world_vertices_rigid() {
        let mut prim = hip(12.0, 7.0, 2.5, 0.4);
        prim.pose = Pose::new(0.9, Point3::new(3.0, -2.0, 4.0));
        prim.t_global = GlobalTranslation::new(500.0, 600.0, 10.0);
        let w = world_vertices(&prim).unwrap();
        let l = roof_vertices(prim.kind, &prim.shape).unwrap();
        for i in 0..l.len() {
            for j in i + 1..l.len() {
                assert!((w[i].dist(&w[j]) - l[i].dist(&l[j])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eq9_consistency_roundtrip() {
        let mut prim = hip(11.0, 9.0, 3.0, 0.6);
        prim.pose = Pose::new(0.5, Point3::new(1.0, 2.0, 5.0));
        prim.t_global = GlobalTranslation::new(-30.0, 40.0, 7.0);
        let w = world_vertices(&prim).unwrap();
        let local = roof_vertices(prim.kind, &prim.shape).unwrap();
        let (s, c) = (-prim.pose.rotation).sin_cos();
        for (wv, lv) in w.iter().zip(&local) {
            let x = wv.x - prim.t_global.x - prim.pose.translation.x;
            let y = wv.y - prim.t_global.y - prim.pose.translation.y;
            let z = wv.z - prim.t_global.z - prim.pose.translation.z;
            let unrot = Point3::new(c * x - s * y, s * x + c * y, z);
            assert!(unrot.dist(lv) < 1e-9);
        }
    }

    #[test]
    fn ground_elevation_min_rule() {
        // Samples 10.2, 10.5, 9.8, 10.0 -> 9.8; emulate with a tilted DEM.
        let dem = Dem::from_ascii(
            "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\n9.8 10.5\n10.0 10.2\n",
        )
        .unwrap();
        let corners = [
            Point2::new(5.0, 5.0),
            Point2::new(15.0, 5.0),
            Point2::new(5.0, 15.0),
            Point2::new(15.0, 15.0),
        ];
        let z = ground_elevation(Some(&dem), &corners, 0.0).unwrap();
        assert!((z - 9.8).abs() < 1e-9);
    }

    #[test]
    fn ground_elevation_fallback_without_dem() {
        let z = ground_elevation(None, &[Point2::new(0.0, 0.0)], 7.5).unwrap();
        assert_eq!(z, 7.5);
    }

    #[test]
    fn gable_has_seven_surfaces() {
        let model = assemble(&gable(10.0, 8.0, 3.0), -3.0, "b1").unwrap();
        assert_eq!(model.surfaces.len(), 7);
        assert_eq!(model.surface_count(SurfaceLabel::Roof), 2);
        assert_eq!(model.surface_count(SurfaceLabel::Wall), 4);
        assert_eq!(model.surface_count(SurfaceLabel::Ground), 1);
    }

    #[test]
    fn hip_and_pyramid_have_nine_surfaces() {
        for prim in [
            hip(10.0, 8.0, 3.0, 0.5),
            RoofPrimitive {
                kind: PrimitiveKind::Pyramid,
                shape: ShapeParams::new(10.0, 8.0, 3.0),
                pose: Pose::IDENTITY,
                t_global: GlobalTranslation::ZERO,
            },
        ] {
            let model = assemble(&prim, -3.0, "b").unwrap();
            assert_eq!(model.surfaces.len(), 9);
            assert_eq!(model.surface_count(SurfaceLabel::Roof), 4);
        }
    }

    #[test]
    fn watertight_across_kinds_and_degenerate_hips() {
        let mut prims = vec![
            gable(10.0, 8.0, 3.0),
            RoofPrimitive {
                kind: PrimitiveKind::Pyramid,
                shape: ShapeParams::new(9.0, 7.0, 2.0),
                pose: Pose::new(0.4, Point3::new(1.0, 2.0, 6.0)),
                t_global: GlobalTranslation::new(100.0, -50.0, 3.0),
            },
        ];
        for rho in [0.0, 1e-6, 0.5, 1.0] {
            prims.push(hip(10.0, 8.0, 3.0, rho));
        }
        for prim in prims {
            let base = prim.t_global.z + prim.pose.translation.z - 3.0;
            let model = assemble(&prim, base, "b").unwrap();
            assert!(model.is_watertight(), "{:?} rho leaks", prim.kind);
            assert!(
                model.signed_volume() > 0.0,
                "{:?} volume {} not positive",
                prim.kind,
                model.signed_volume()
            );
        }
    }

    #[test]
    fn degenerate_hip_collapses_to_triangles() {
        let model = assemble(&hip(10.0, 8.0, 3.0, 0.0), -3.0, "b").unwrap();
        assert_eq!(model.surfaces.len(), 9);
        for s in &model.surfaces {
            if s.label == SurfaceLabel::Roof {
                assert_eq!(s.ring.len(), 4, "roof ring should be a closed triangle");
            }
        }
    }

    #[test]
    fn measured_height_is_ridge_minus_base() {
        let mut prim = gable(10.0, 8.0, 3.0);
        prim.pose.translation.z = 5.0;
        prim.t_global = GlobalTranslation::new(0.0, 0.0, 100.0);
        let model = assemble(&prim, 101.0, "b").unwrap();
        // ridge z = 100 + 5 + 3 = 108; base 101.
        assert!((model.measured_height - 7.0).abs() < 1e-9);
        let ridge_z = model
            .surfaces
            .iter()
            .flat_map(|s| s.ring.iter())
            .map(|p| p.z)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((model.measured_height - (ridge_z - 101.0)).abs() < 1e-9);
    }

    #[test]
    fn base_above_eave_is_rejected() {
        let err = assemble(&gable(10.0, 8.0, 3.0), 0.5, "b").unwrap_err();
        assert!(matches!(err, Error::InvalidBase(_)));
    }

    #[test]
    fn rings_are_closed_and_coplanar() {
        let model = assemble(&hip(10.0, 8.0, 3.0, 0.5), -4.0, "b").unwrap();
        for s in &model.surfaces {
            assert!(s.ring.len() >= 4);
            assert_eq!(s.ring.first(), s.ring.last());
            let plane = crate::geometry::fit_plane_svd(&s.ring[..s.ring.len() - 1]).unwrap();
            for p in &s.ring {
                assert!(plane.distance(p) < 1e-6);
            }
        }
    }
}

//! Parametric roof-primitive library: shape parameters, pose, the vertex
//! function per kind, roof-face topology, footprint, and the flat parameter
//! vector used by the optimizer.
//!
//! Canonical primitive frame: eave plane at z = 0, footprint centered at the
//! origin, ridge along the x axis. Numbered vertices follow the usual
//! labelling with v1/v2 on the +y eave, v5/v6 on the -y eave and v3/v4 the
//! ridge (v3 at +x); rings are counter-clockwise seen from outside, so roof
//! normals point up and outward.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon2D};
use crate::pointcloud::{GlobalTranslation, Point3};

/// The shipped primitive kinds. The registry functions below are the single
/// place that maps a kind to its vertex function, topology, and bounds, so
/// further kinds can slot in without touching the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Pyramid,
    Gable,
    Hip,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 3] = [
        PrimitiveKind::Pyramid,
        PrimitiveKind::Gable,
        PrimitiveKind::Hip,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PrimitiveKind::Pyramid => "pyramid",
            PrimitiveKind::Gable => "gable",
            PrimitiveKind::Hip => "hip",
        }
    }

    /// Number of shape parameters (pyramid/gable 3, hip 4).
    pub fn shape_param_count(&self) -> usize {
        match self {
            PrimitiveKind::Hip => 4,
            _ => 3,
        }
    }

    /// Length of the packed optimizer vector: shape params plus kappa and
    /// the local translation.
    pub fn param_count(&self) -> usize {
        self.shape_param_count() + 4
    }
}

impl std::fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PrimitiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pyramid" => Ok(PrimitiveKind::Pyramid),
            "gable" => Ok(PrimitiveKind::Gable),
            "hip" => Ok(PrimitiveKind::Hip),
            other => Err(Error::InvalidParameter {
                field: "kind",
                message: format!("unknown primitive kind `{other}`"),
            }),
        }
    }
}

/// Shape parameters in the primitive frame: footprint length along local x,
/// width along local y, ridge/apex rise above the eave plane, and (hip only)
/// the ridge-to-length ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub length: f64,
    pub width: f64,
    pub rise: f64,
    /// `ridge length = ridge_ratio * length`; present iff the kind is hip.
    pub ridge_ratio: Option<f64>,
}

impl ShapeParams {
    pub fn new(length: f64, width: f64, rise: f64) -> Self {
        ShapeParams {
            length,
            width,
            rise,
            ridge_ratio: None,
        }
    }

    pub fn new_hip(length: f64, width: f64, rise: f64, ridge_ratio: f64) -> Self {
        ShapeParams {
            length,
            width,
            rise,
            ridge_ratio: Some(ridge_ratio),
        }
    }

    pub fn validate(&self, kind: PrimitiveKind) -> Result<()> {
        let positive = |field: &'static str, v: f64| -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    message: format!("must be positive and finite, got {v}"),
                });
            }
            Ok(())
        };
        positive("l", self.length)?;
        positive("w", self.width)?;
        positive("h", self.rise)?;
        match (kind, self.ridge_ratio) {
            (PrimitiveKind::Hip, Some(rho)) => {
                if !(0.0..=1.0).contains(&rho) {
                    return Err(Error::InvalidParameter {
                        field: "rho",
                        message: format!("must lie in [0, 1], got {rho}"),
                    });
                }
            }
            (PrimitiveKind::Hip, None) => {
                return Err(Error::InvalidParameter {
                    field: "rho",
                    message: "hip requires a ridge ratio".into(),
                })
            }
            (_, Some(_)) => {
                return Err(Error::InvalidParameter {
                    field: "rho",
                    message: format!("ridge ratio is only valid for hip, not {kind}"),
                })
            }
            (_, None) => {}
        }
        Ok(())
    }
}

/// Local rigid pose: rotation about the vertical axis plus a translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// Rotation about local Z in radians; canonical range [-pi/2, pi/2).
    pub rotation: f64,
    pub translation: Point3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: 0.0,
        translation: Point3::new(0.0, 0.0, 0.0),
    };

    pub fn new(rotation: f64, translation: Point3) -> Self {
        Pose {
            rotation,
            translation,
        }
    }
}

/// A fitted (or synthetic) roof primitive: kind, shape, local pose, and the
/// global translation back to the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofPrimitive {
    pub kind: PrimitiveKind,
    pub shape: ShapeParams,
    pub pose: Pose,
    pub t_global: GlobalTranslation,
}

impl RoofPrimitive {
    pub fn validate(&self) -> Result<()> {
        self.shape.validate(self.kind)?;
        if !self.pose.rotation.is_finite() || !self.pose.translation.is_finite() {
            return Err(Error::InvalidParameter {
                field: "pose",
                message: "pose must be finite".into(),
            });
        }
        Ok(())
    }

    /// Fold the rotation into [-pi/2, pi/2); the rectangle footprint has a
    /// half-turn symmetry, so geometry is unchanged.
    pub fn canonicalized(mut self) -> RoofPrimitive {
        self.pose.rotation = fold_half_turn(self.pose.rotation);
        self
    }
}

pub(crate) fn fold_half_turn(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(PI);
    if a >= FRAC_PI_2 {
        a -= PI;
    }
    a
}

/// Roof-face topology: vertex-index rings (roof faces only, outward
/// counter-clockwise) over the vertex list of [`roof_vertices`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceTopology {
    pub faces: Vec<Vec<usize>>,
    pub vertex_count: usize,
}

/// Canonical pre-pose roof vertices for a kind.
///
/// Gable order: `[v1, v2, v3, v4, v5, v6]` with v1 = (-l/2, w/2, 0),
/// v2 = (l/2, w/2, 0), v3 = (l/2, 0, h), v4 = (-l/2, 0, h),
/// v5 = (-l/2, -w/2, 0), v6 = (l/2, -w/2, 0). Hip replaces the ridge with
/// (±rho·l/2, 0, h). Pyramid order: `[v1, v2, v5, v6, apex]`.
pub fn roof_vertices(kind: PrimitiveKind, shape: &ShapeParams) -> Result<Vec<Point3>> {
    shape.validate(kind)?;
    let hl = shape.length / 2.0;
    let hw = shape.width / 2.0;
    let h = shape.rise;
    Ok(match kind {
        PrimitiveKind::Gable => vec![
            Point3::new(-hl, hw, 0.0),
            Point3::new(hl, hw, 0.0),
            Point3::new(hl, 0.0, h),
            Point3::new(-hl, 0.0, h),
            Point3::new(-hl, -hw, 0.0),
            Point3::new(hl, -hw, 0.0),
        ],
        PrimitiveKind::Hip => {
            let hr = shape.ridge_ratio.unwrap_or(0.0) * hl;
            vec![
                Point3::new(-hl, hw, 0.0),
                Point3::new(hl, hw, 0.0),
                Point3::new(hr, 0.0, h),
                Point3::new(-hr, 0.0, h),
                Point3::new(-hl, -hw, 0.0),
                Point3::new(hl, -hw, 0.0),
            ]
        }
        PrimitiveKind::Pyramid => vec![
            Point3::new(-hl, hw, 0.0),
            Point3::new(hl, hw, 0.0),
            Point3::new(-hl, -hw, 0.0),
            Point3::new(hl, -hw, 0.0),
            Point3::new(0.0, 0.0, h),
        ],
    })
}

/// Indices of the four eave corners (v1, v2, v5, v6) in the vertex list.
pub fn eave_corner_indices(kind: PrimitiveKind) -> [usize; 4] {
    match kind {
        PrimitiveKind::Pyramid => [0, 1, 2, 3],
        _ => [0, 1, 4, 5],
    }
}

/// Roof-face rings per kind, counter-clockwise seen from outside.
pub fn roof_faces(kind: PrimitiveKind) -> FaceTopology {
    match kind {
        // S1 = {v4, v3, v2, v1}, S2 = {v3, v4, v5, v6} (0-based below).
        PrimitiveKind::Gable => FaceTopology {
            faces: vec![vec![3, 2, 1, 0], vec![2, 3, 4, 5]],
            vertex_count: 6,
        },
        PrimitiveKind::Hip => FaceTopology {
            faces: vec![
                vec![3, 2, 1, 0],
                vec![2, 3, 4, 5],
                vec![1, 2, 5],
                vec![4, 3, 0],
            ],
            vertex_count: 6,
        },
        PrimitiveKind::Pyramid => FaceTopology {
            faces: vec![vec![4, 1, 0], vec![4, 2, 3], vec![4, 3, 1], vec![4, 0, 2]],
            vertex_count: 5,
        },
    }
}

/// Rotate about Z by the pose angle and translate: `v -> R v + t`.
pub fn apply_pose(vertices: &[Point3], pose: &Pose) -> Vec<Point3> {
    let (s, c) = pose.rotation.sin_cos();
    let t = pose.translation;
    vertices
        .iter()
        .map(|v| Point3::new(c * v.x - s * v.y + t.x, s * v.x + c * v.y + t.y, v.z + t.z))
        .collect()
}

/// Horizontal footprint of the primitive in the local frame: the l×w
/// rectangle rotated by the pose angle, centered on the pose translation.
pub fn footprint_polygon(prim: &RoofPrimitive) -> Result<Polygon2D> {
    prim.shape.validate(prim.kind)?;
    let hl = prim.shape.length / 2.0;
    let hw = prim.shape.width / 2.0;
    let center = Point2::new(prim.pose.translation.x, prim.pose.translation.y);
    let ring = [
        Point2::new(-hl, -hw),
        Point2::new(hl, -hw),
        Point2::new(hl, hw),
        Point2::new(-hl, hw),
    ]
    .iter()
    .map(|p| p.rotate(prim.pose.rotation).add(&center))
    .collect();
    Polygon2D::new(ring)
}

/// World-frame footprint (local footprint shifted by the global translation).
pub fn world_footprint(prim: &RoofPrimitive) -> Result<Polygon2D> {
    Ok(footprint_polygon(prim)?.translated(Point2::new(prim.t_global.x, prim.t_global.y)))
}

/// Box bounds for the packed parameter vector of a kind.
///
/// Layout `[l, w, h, (rho), kappa, tx, ty, tz]`; dimensions in [0.5, 200] m,
/// ratio in [0, 1], rotation in [-pi/2, pi/2], translations in [-50, 50] m
/// (local frame).
pub fn param_bounds(kind: PrimitiveKind) -> (Vec<f64>, Vec<f64>) {
    let mut lower = vec![0.5, 0.5, 0.5];
    let mut upper = vec![200.0, 200.0, 200.0];
    if kind == PrimitiveKind::Hip {
        lower.push(0.0);
        upper.push(1.0);
    }
    lower.extend_from_slice(&[-FRAC_PI_2, -50.0, -50.0, -50.0]);
    upper.extend_from_slice(&[FRAC_PI_2, 50.0, 50.0, 50.0]);
    (lower, upper)
}

/// Pack shape and pose into the flat optimizer vector.
pub fn pack_params(prim: &RoofPrimitive) -> Vec<f64> {
    let mut x = vec![prim.shape.length, prim.shape.width, prim.shape.rise];
    if let Some(rho) = prim.shape.ridge_ratio {
        x.push(rho);
    }
    x.extend_from_slice(&[
        prim.pose.rotation,
        prim.pose.translation.x,
        prim.pose.translation.y,
        prim.pose.translation.z,
    ]);
    x
}

/// Inverse of [`pack_params`]; checks the vector length and the bounds.
pub fn unpack_params(
    kind: PrimitiveKind,
    x: &[f64],
    t_global: GlobalTranslation,
) -> Result<RoofPrimitive> {
    if x.len() != kind.param_count() {
        return Err(Error::ShapeMismatch(format!(
            "{kind} expects {} parameters, got {}",
            kind.param_count(),
            x.len()
        )));
    }
    let (lower, upper) = param_bounds(kind);
    const FIELDS: [&str; 8] = ["l", "w", "h", "rho", "kappa", "tx", "ty", "tz"];
    for (i, &v) in x.iter().enumerate() {
        let name_idx = if kind == PrimitiveKind::Hip || i < 3 { i } else { i + 1 };
        if !v.is_finite() || v < lower[i] - 1e-12 || v > upper[i] + 1e-12 {
            return Err(Error::InvalidParameter {
                field: FIELDS[name_idx],
                message: format!("{v} outside [{}, {}]", lower[i], upper[i]),
            });
        }
    }
    let (shape, rest) = if kind == PrimitiveKind::Hip {
        (ShapeParams::new_hip(x[0], x[1], x[2], x[3]), &x[4..])
    } else {
        (ShapeParams::new(x[0], x[1], x[2]), &x[3..])
    };
    Ok(RoofPrimitive {
        kind,
        shape,
        pose: Pose::new(rest[0], Point3::new(rest[1], rest[2], rest[3])),
        t_global,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn sorted_set(pts: &[Point3]) -> Vec<(i64, i64, i64)> {
        let mut v: Vec<(i64, i64, i64)> = pts
            .iter()
            .map(|p| {
                (
                    (p.x * 1e9).round() as i64,
                    (p.y * 1e9).round() as i64,
                    (p.z * 1e9).round() as i64,
                )
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn gable_vertices_match_parametrization() {
        let verts = roof_vertices(
            PrimitiveKind::Gable,
            &ShapeParams::new(10.0, 8.0, 3.0),
        )
        .unwrap();
        assert_eq!(verts.len(), 6);
        // Ridge endpoints at (±5, 0, 3).
        assert_eq!(verts[2], Point3::new(5.0, 0.0, 3.0));
        assert_eq!(verts[3], Point3::new(-5.0, 0.0, 3.0));
        // Eave corners at (±5, ±4, 0).
        let eaves: BTreeSet<(i64, i64)> = eave_corner_indices(PrimitiveKind::Gable)
            .iter()
            .map(|&i| (verts[i].x as i64, verts[i].y as i64))
            .collect();
        assert_eq!(
            eaves,
            BTreeSet::from([(-5, 4), (5, 4), (-5, -4), (5, -4)])
        );
        assert!(eave_corner_indices(PrimitiveKind::Gable)
            .iter()
            .all(|&i| verts[i].z == 0.0));
    }

    #[test]
    fn hip_degenerates_to_pyramid_and_gable() {
        let shape_h = |rho| ShapeParams::new_hip(10.0, 8.0, 3.0, rho);
        let hip0 = roof_vertices(PrimitiveKind::Hip, &shape_h(0.0)).unwrap();
        let pyr = roof_vertices(
            PrimitiveKind::Pyramid,
            &ShapeParams::new(10.0, 8.0, 3.0),
        )
        .unwrap();
        assert_eq!(
            sorted_set(&hip0).into_iter().collect::<BTreeSet<_>>(),
            sorted_set(&pyr).into_iter().collect::<BTreeSet<_>>()
        );

        let hip1 = roof_vertices(PrimitiveKind::Hip, &shape_h(1.0)).unwrap();
        let gable = roof_vertices(
            PrimitiveKind::Gable,
            &ShapeParams::new(10.0, 8.0, 3.0),
        )
        .unwrap();
        assert_eq!(sorted_set(&hip1), sorted_set(&gable));
    }

    #[test]
    fn face_rings_match_quoted_labels() {
        // 1-based rings [[4,3,2,1],[3,4,5,6]] with v1..v6 at indices 0..5.
        let topo = roof_faces(PrimitiveKind::Gable);
        assert_eq!(topo.faces, vec![vec![3, 2, 1, 0], vec![2, 3, 4, 5]]);
    }

    #[test]
    fn pyramid_faces_contain_apex() {
        let topo = roof_faces(PrimitiveKind::Pyramid);
        assert_eq!(topo.faces.len(), 4);
        assert!(topo.faces.iter().all(|f| f.contains(&4)));
    }

    #[test]
    fn hip_boundary_edge_count_by_enumeration() {
        let topo = roof_faces(PrimitiveKind::Hip);
        assert_eq!(topo.faces.len(), 4);
        let mut counts = std::collections::HashMap::new();
        for f in &topo.faces {
            for i in 0..f.len() {
                let a = f[i];
                let b = f[(i + 1) % f.len()];
                *counts.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
            }
        }
        let boundary = counts.values().filter(|&&c| c == 1).count();
        assert_eq!(boundary, 4);
        assert!(counts.values().all(|&c| c <= 2));
    }

    #[test]
    fn roof_normals_point_upward() {
        for kind in PrimitiveKind::ALL {
            let shape = match kind {
                PrimitiveKind::Hip => ShapeParams::new_hip(10.0, 8.0, 3.0, 0.5),
                _ => ShapeParams::new(10.0, 8.0, 3.0),
            };
            let verts = roof_vertices(kind, &shape).unwrap();
            for ring in roof_faces(kind).faces {
                // Newell z-component must be positive for up-facing rings.
                let mut nz = 0.0;
                for i in 0..ring.len() {
                    let a = verts[ring[i]];
                    let b = verts[ring[(i + 1) % ring.len()]];
                    nz += (a.x - b.x) * (a.y + b.y);
                }
                assert!(nz > 0.0, "{kind} ring {ring:?} faces down");
            }
        }
    }

    #[test]
    fn apply_pose_quarter_turn() {
        let out = apply_pose(
            &[Point3::new(1.0, 0.0, 0.0)],
            &Pose::new(std::f64::consts::FRAC_PI_2, Point3::new(0.0, 0.0, 0.0)),
        );
        assert!((out[0].x).abs() < 1e-12);
        assert!((out[0].y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_pose_pure_translation() {
        let out = apply_pose(
            &[Point3::new(0.0, 0.0, 0.0)],
            &Pose::new(0.0, Point3::new(1.0, 2.0, 3.0)),
        );
        assert_eq!(out[0], Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn pose_composition_with_inverse() {
        let pose = Pose::new(0.7, Point3::new(1.5, -2.0, 0.4));
        let fwd = apply_pose(&[Point3::new(3.0, 4.0, 5.0)], &pose);
        // Inverse: rotate back after removing the translation.
        let shifted = Point3::new(fwd[0].x - pose.translation.x, fwd[0].y - pose.translation.y, fwd[0].z - pose.translation.z);
        let back = apply_pose(
            &[shifted],
            &Pose::new(-pose.rotation, Point3::new(0.0, 0.0, 0.0)),
        );
        assert!(back[0].dist(&Point3::new(3.0, 4.0, 5.0)) < 1e-12);
    }

    #[test]
    fn footprint_rectangle_ccw() {
        let prim = RoofPrimitive {
            kind: PrimitiveKind::Gable,
            shape: ShapeParams::new(2.0, 1.0, 1.0),
            pose: Pose::IDENTITY,
            t_global: GlobalTranslation::ZERO,
        };
        let poly = footprint_polygon(&prim).unwrap();
        assert_eq!(
            poly.ring(),
            &[
                Point2::new(-1.0, -0.5),
                Point2::new(1.0, -0.5),
                Point2::new(1.0, 0.5),
                Point2::new(-1.0, 0.5),
            ]
        );
        assert!((poly.area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn footprint_quarter_turn_swaps_extents() {
        let prim = RoofPrimitive {
            kind: PrimitiveKind::Gable,
            shape: ShapeParams::new(4.0, 2.0, 1.0),
            pose: Pose::new(std::f64::consts::FRAC_PI_2, Point3::new(0.0, 0.0, 0.0)),
            t_global: GlobalTranslation::ZERO,
        };
        let poly = footprint_polygon(&prim).unwrap();
        let xs: Vec<f64> = poly.ring().iter().map(|p| p.x).collect();
        let ys: Vec<f64> = poly.ring().iter().map(|p| p.y).collect();
        let span = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((span(&xs) - 2.0).abs() < 1e-12);
        assert!((span(&ys) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn param_vector_lengths() {
        assert_eq!(PrimitiveKind::Gable.param_count(), 7);
        assert_eq!(PrimitiveKind::Pyramid.param_count(), 7);
        assert_eq!(PrimitiveKind::Hip.param_count(), 8);
    }

    #[test]
    fn unpack_rejects_out_of_bounds_length() {
        let x = [0.0, 8.0, 3.0, 0.1, 0.0, 0.0, 0.0];
        let err =
            unpack_params(PrimitiveKind::Gable, &x, GlobalTranslation::ZERO).unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "l"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unpack_rejects_wrong_arity() {
        let x = [10.0, 8.0, 3.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            unpack_params(PrimitiveKind::Gable, &x, GlobalTranslation::ZERO),
            Err(Error::ShapeMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(
            l in 0.5f64..60.0, w in 0.5f64..60.0, h in 0.5f64..20.0,
            rho in 0.0f64..=1.0, kappa in -1.5f64..1.5,
            tx in -40.0f64..40.0, ty in -40.0f64..40.0, tz in -40.0f64..40.0,
            kind_idx in 0usize..3,
        ) {
            let kind = PrimitiveKind::ALL[kind_idx];
            let shape = match kind {
                PrimitiveKind::Hip => ShapeParams::new_hip(l, w, h, rho),
                _ => ShapeParams::new(l, w, h),
            };
            let prim = RoofPrimitive {
                kind,
                shape,
                pose: Pose::new(kappa, Point3::new(tx, ty, tz)),
                t_global: GlobalTranslation::new(1.0, 2.0, 3.0),
            };
            let x = pack_params(&prim);
            prop_assert_eq!(x.len(), kind.param_count());
            let back = unpack_params(kind, &x, prim.t_global).unwrap();
            prop_assert_eq!(back, prim);
        }

        #[test]
        fn pose_preserves_pairwise_distances(
            kappa in -3.0f64..3.0,
            tx in -20.0f64..20.0, ty in -20.0f64..20.0, tz in -20.0f64..20.0,
        ) {
            let verts = roof_vertices(
                PrimitiveKind::Hip,
                &ShapeParams::new_hip(11.0, 7.0, 2.5, 0.4),
            ).unwrap();
            let posed = apply_pose(&verts, &Pose::new(kappa, Point3::new(tx, ty, tz)));
            for i in 0..verts.len() {
                for j in i + 1..verts.len() {
                    let before = verts[i].dist(&verts[j]);
                    let after = posed[i].dist(&posed[j]);
                    prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
                }
            }
        }

        #[test]
        fn symmetry_of_vertex_sets(
            l in 0.5f64..40.0, w in 0.5f64..40.0, h in 0.5f64..10.0, rho in 0.0f64..=1.0,
        ) {
            // Gable and hip are mirror-symmetric in y; pyramid and hip in x.
            let mirror = |pts: &[Point3], fx: f64, fy: f64| -> Vec<Point3> {
                pts.iter().map(|p| Point3::new(p.x * fx, p.y * fy, p.z)).collect()
            };
            let gable = roof_vertices(PrimitiveKind::Gable, &ShapeParams::new(l, w, h)).unwrap();
            prop_assert_eq!(sorted_set(&mirror(&gable, 1.0, -1.0)), sorted_set(&gable));
            let hip = roof_vertices(PrimitiveKind::Hip, &ShapeParams::new_hip(l, w, h, rho)).unwrap();
            prop_assert_eq!(sorted_set(&mirror(&hip, 1.0, -1.0)), sorted_set(&hip));
            prop_assert_eq!(sorted_set(&mirror(&hip, -1.0, 1.0)), sorted_set(&hip));
            let pyr = roof_vertices(PrimitiveKind::Pyramid, &ShapeParams::new(l, w, h)).unwrap();
            prop_assert_eq!(sorted_set(&mirror(&pyr, -1.0, 1.0)), sorted_set(&pyr));
        }
    }

    #[test]
    fn planarity_of_roof_faces() {
        use crate::geometry::fit_plane_svd;
        let mut rng = crate::util::rng_stream(17, &[8]);
        use rand::RngExt;
        for _ in 0..1000 {
            let kind = PrimitiveKind::ALL[(rng.random::<f64>() * 3.0) as usize % 3];
            let l = 0.5 + rng.random::<f64>() * 50.0;
            let w = 0.5 + rng.random::<f64>() * 50.0;
            let h = 0.5 + rng.random::<f64>() * 10.0;
            let shape = match kind {
                PrimitiveKind::Hip => ShapeParams::new_hip(l, w, h, rng.random()),
                _ => ShapeParams::new(l, w, h),
            };
            let verts = roof_vertices(kind, &shape).unwrap();
            for ring in roof_faces(kind).faces {
                let pts: Vec<Point3> = ring.iter().map(|&i| verts[i]).collect();
                let plane = match fit_plane_svd(&pts) {
                    Ok(p) => p,
                    Err(_) => continue, // rho=0 can collapse a ring to 3 collinear-ish points
                };
                for p in &pts {
                    assert!(plane.distance(p) < 1e-9);
                }
            }
        }
    }
}

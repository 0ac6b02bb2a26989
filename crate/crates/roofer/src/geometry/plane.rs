//! Plane coefficients from vertex sets via SVD, and point-plane distance.

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};
use crate::pointcloud::Point3;

/// Plane `a*x + b*y + c*z + d = 0` with unit normal `[a, b, c]`.
///
/// The sign convention is `c >= 0`, breaking ties with `b >= 0` and then
/// `a >= 0`, so fitted coefficients are reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Plane {
    /// Unsigned distance from a point; the normal is unit length so no
    /// renormalization is needed.
    pub fn distance(&self, p: &Point3) -> f64 {
        (self.a * p.x + self.b * p.y + self.c * p.z + self.d).abs()
    }

    /// Signed evaluation of the plane equation.
    pub fn signed(&self, p: &Point3) -> f64 {
        self.a * p.x + self.b * p.y + self.c * p.z + self.d
    }
}

/// Unsigned point-plane distance.
pub fn point_plane_distance(p: &Point3, plane: &Plane) -> f64 {
    plane.distance(p)
}

/// Fit a plane to vertices by centering them and taking the left singular
/// vector of the smallest singular value of the 3×n centered coordinate
/// matrix as the normal; the offset places the plane through the centroid.
pub fn fit_plane_svd(vertices: &[Point3]) -> Result<Plane> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "plane fit needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let n = vertices.len() as f64;
    let cx = vertices.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = vertices.iter().map(|p| p.y).sum::<f64>() / n;
    let cz = vertices.iter().map(|p| p.z).sum::<f64>() / n;

    let centered = DMatrix::from_fn(3, vertices.len(), |r, c| match r {
        0 => vertices[c].x - cx,
        1 => vertices[c].y - cy,
        _ => vertices[c].z - cz,
    });
    let scale = centered.amax().max(f64::MIN_POSITIVE);
    let svd = centered.clone().svd(true, false);
    let sv = &svd.singular_values;
    // Rank < 2 means the vertices are collinear (or coincident).
    if sv[1] <= 1e-12 * scale {
        return Err(Error::DegenerateGeometry(
            "plane fit vertices are collinear".into(),
        ));
    }
    let u = svd.u.as_ref().expect("u requested");
    let mut normal = Vector3::new(u[(0, 2)], u[(1, 2)], u[(2, 2)]);
    normal /= normal.norm();

    let flip = normal.z < 0.0
        || (normal.z == 0.0 && (normal.y < 0.0 || (normal.y == 0.0 && normal.x < 0.0)));
    if flip {
        normal = -normal;
    }
    let d = -(normal.x * cx + normal.y * cy + normal.z * cz);
    Ok(Plane {
        a: normal.x,
        b: normal.y,
        c: normal.z,
        d,
    })
}

//! Computational-geometry kernel: plane fitting, 2D polygons and booleans,
//! alpha-shape boundaries, and minimum-area oriented bounding rectangles.

mod alpha;
mod plane;
mod polygon;

pub use alpha::{alpha_shape_boundary, ALPHA_SPACING_FACTOR};
pub use plane::{fit_plane_svd, point_plane_distance, Plane};
pub use polygon::{
    convex_hull, intersection_area, iou_2d, min_area_rect, OrientedRect, Polygon2D,
};

use serde::{Deserialize, Serialize};

/// A 2D point/vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn dot(&self, other: &Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(&self, other: &Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        self.sub(other).norm()
    }

    pub fn scale(&self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn rotate(&self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

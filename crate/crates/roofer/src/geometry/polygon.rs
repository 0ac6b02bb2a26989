//! Simple polygons: area, convexity, convex-clipper booleans, IoU, convex
//! hull, and minimum-area oriented bounding rectangles.

use crate::error::{Error, Result};

use super::Point2;

/// A simple planar polygon stored as a counter-clockwise vertex ring without
/// a repeated closing vertex.
///
/// The constructor normalizes orientation, strips consecutive duplicates and
/// an explicit closing vertex, and rejects rings whose edges properly cross.
/// Rings that merely touch at a vertex (pinch points from alpha shapes) are
/// accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    ring: Vec<Point2>,
}

fn shoelace(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let mut sum = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        sum += ring[i].cross(&ring[j]);
    }
    sum / 2.0
}

/// True if segments ab and cd properly cross (intersection interior to both).
fn segments_cross(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> bool {
    let d1 = b.sub(a).cross(&c.sub(a));
    let d2 = b.sub(a).cross(&d.sub(a));
    let d3 = d.sub(c).cross(&a.sub(c));
    let d4 = d.sub(c).cross(&b.sub(c));
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

impl Polygon2D {
    /// Build a polygon from a vertex ring in either orientation.
    pub fn new(ring: Vec<Point2>) -> Result<Polygon2D> {
        let mut pts = ring;
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon needs at least 3 distinct vertices, got {}",
                pts.len()
            )));
        }
        for p in &pts {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::DegenerateGeometry(
                    "polygon vertex is not finite".into(),
                ));
            }
        }
        let area = shoelace(&pts);
        if area == 0.0 {
            return Err(Error::DegenerateGeometry("polygon has zero area".into()));
        }
        if area < 0.0 {
            pts.reverse();
        }
        let n = pts.len();
        for i in 0..n {
            for j in i + 1..n {
                // Adjacent edges share an endpoint; skip them (and the wrap pair).
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (&pts[i], &pts[(i + 1) % n]);
                let (c, d) = (&pts[j], &pts[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return Err(Error::DegenerateGeometry(format!(
                        "polygon self-intersects between edges {i} and {j}"
                    )));
                }
            }
        }
        Ok(Polygon2D { ring: pts })
    }

    /// Axis-aligned rectangle helper.
    pub fn rectangle(center: Point2, width_x: f64, width_y: f64) -> Result<Polygon2D> {
        let hx = width_x / 2.0;
        let hy = width_y / 2.0;
        Polygon2D::new(vec![
            Point2::new(center.x - hx, center.y - hy),
            Point2::new(center.x + hx, center.y - hy),
            Point2::new(center.x + hx, center.y + hy),
            Point2::new(center.x - hx, center.y + hy),
        ])
    }

    pub fn ring(&self) -> &[Point2] {
        &self.ring
    }

    /// Shoelace area; positive because the ring is counter-clockwise.
    pub fn area(&self) -> f64 {
        shoelace(&self.ring)
    }

    /// Non-strict convexity (collinear vertices allowed).
    pub fn is_convex(&self) -> bool {
        let n = self.ring.len();
        for i in 0..n {
            let a = &self.ring[i];
            let b = &self.ring[(i + 1) % n];
            let c = &self.ring[(i + 2) % n];
            if b.sub(a).cross(&c.sub(b)) < -1e-12 {
                return false;
            }
        }
        true
    }

    /// Translate all vertices by `offset`.
    pub fn translated(&self, offset: Point2) -> Polygon2D {
        Polygon2D {
            ring: self.ring.iter().map(|p| p.add(&offset)).collect(),
        }
    }
}

/// Clip `subject` (any simple ring) against one half-plane of the directed
/// edge a→b, keeping the left side.
fn clip_halfplane(subject: &[Point2], a: &Point2, b: &Point2) -> Vec<Point2> {
    let edge = b.sub(a);
    let side = |p: &Point2| edge.cross(&p.sub(a));
    let n = subject.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let s = subject[i];
        let e = subject[(i + 1) % n];
        let sc = side(&s);
        let ec = side(&e);
        let s_in = sc >= 0.0;
        let e_in = ec >= 0.0;
        match (s_in, e_in) {
            (true, true) => out.push(e),
            (true, false) | (false, true) => {
                let denom = sc - ec;
                if denom.abs() > 0.0 {
                    let t = sc / denom;
                    out.push(Point2::new(s.x + (e.x - s.x) * t, s.y + (e.y - s.y) * t));
                }
                if e_in {
                    out.push(e);
                }
            }
            (false, false) => {}
        }
    }
    out
}

/// Sutherland-Hodgman clip of a simple subject ring against a convex CCW
/// clip ring. A non-convex subject may come back with zero-width bridge
/// edges connecting disjoint pieces; its shoelace area is still the summed
/// area of the pieces.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut result = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if result.len() < 3 {
            return Vec::new();
        }
        result = clip_halfplane(&result, &clip[i], &clip[(i + 1) % n]);
    }
    result
}

fn canonical_before(a: &Polygon2D, b: &Polygon2D) -> bool {
    match a.ring.len().cmp(&b.ring.len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            for (p, q) in a.ring.iter().zip(&b.ring) {
                match p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)) {
                    std::cmp::Ordering::Less => return true,
                    std::cmp::Ordering::Greater => return false,
                    std::cmp::Ordering::Equal => {}
                }
            }
            true
        }
    }
}

/// Intersection area of two simple polygons, at least one of which must be
/// convex (the fitting pipeline always supplies a rectangle).
///
/// The convex operand is chosen as the clip polygon by a rule independent of
/// argument order, so the result is symmetric.
///
/// # Panics
///
/// Panics if neither polygon is convex; general clipping is out of scope.
pub fn intersection_area(a: &Polygon2D, b: &Polygon2D) -> f64 {
    let (clip, subject) = match (a.is_convex(), b.is_convex()) {
        (true, false) => (a, b),
        (false, true) => (b, a),
        (true, true) => {
            if canonical_before(a, b) {
                (a, b)
            } else {
                (b, a)
            }
        }
        (false, false) => panic!("intersection_area requires at least one convex polygon"),
    };
    let out = clip_convex(subject.ring(), clip.ring());
    if out.len() < 3 {
        return 0.0;
    }
    shoelace(&out).max(0.0)
}

/// 2D intersection-over-union in [0, 1]; disjoint polygons give 0.
pub fn iou_2d(a: &Polygon2D, b: &Polygon2D) -> f64 {
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Convex hull (Andrew monotone chain), counter-clockwise, no duplicates.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * n);
    for p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if b.sub(&a).cross(&p.sub(&b)) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(*p);
    }
    hull.pop();
    // The lower/upper chain walk above visits points left-to-right then
    // right-to-left, which yields a clockwise ring under this cross-sign
    // convention; flip to counter-clockwise.
    if shoelace(&hull) < 0.0 {
        hull.reverse();
    }
    hull
}

/// Minimum-area oriented bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Point2,
    /// Longer extent; `length >= width`.
    pub length: f64,
    pub width: f64,
    /// Direction of the `length` axis, in [-pi/2, pi/2).
    pub angle: f64,
}

impl OrientedRect {
    /// Corner ring, counter-clockwise.
    pub fn corners(&self) -> [Point2; 4] {
        let axis = Point2::new(self.angle.cos(), self.angle.sin());
        let perp = Point2::new(-axis.y, axis.x);
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        [
            self.center.add(&axis.scale(-hl)).add(&perp.scale(-hw)),
            self.center.add(&axis.scale(hl)).add(&perp.scale(-hw)),
            self.center.add(&axis.scale(hl)).add(&perp.scale(hw)),
            self.center.add(&axis.scale(-hl)).add(&perp.scale(hw)),
        ]
    }
}

/// Fold an angle into [-pi/2, pi/2) by multiples of pi.
pub(crate) fn fold_half_turn(angle: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = angle.rem_euclid(PI);
    if a >= PI / 2.0 {
        a -= PI;
    }
    a
}

/// Minimum-area oriented bounding rectangle over the convex hull; one side
/// of the optimum is collinear with a hull edge, so scanning edge directions
/// suffices.
pub fn min_area_rect(points: &[Point2]) -> Result<OrientedRect> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::DegenerateGeometry(
            "min_area_rect needs at least 3 non-collinear points".into(),
        ));
    }
    let reference = hull[0];
    let mut best: Option<(f64, f64, f64, f64, f64, Point2)> = None; // area, umin, umax, vmin, vmax packed below
    let mut best_area = f64::INFINITY;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let e = b.sub(&a);
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        let axis = e.scale(1.0 / len);
        let (mut umin, mut umax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &hull {
            let r = p.sub(&reference);
            let u = r.dot(&axis);
            let v = axis.cross(&r);
            umin = umin.min(u);
            umax = umax.max(u);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        let area = (umax - umin) * (vmax - vmin);
        if area < best_area {
            best_area = area;
            best = Some((umin, umax, vmin, vmax, len, axis));
        }
    }
    let (umin, umax, vmin, vmax, _, axis) = best.expect("hull has edges");
    let perp = Point2::new(-axis.y, axis.x);
    let center = reference
        .add(&axis.scale((umin + umax) / 2.0))
        .add(&perp.scale((vmin + vmax) / 2.0));
    let du = umax - umin;
    let dv = vmax - vmin;
    let (length, width, raw_angle) = if du >= dv {
        (du, dv, axis.y.atan2(axis.x))
    } else {
        (dv, du, perp.y.atan2(perp.x))
    };
    Ok(OrientedRect {
        center,
        length,
        width,
        angle: fold_half_turn(raw_angle),
    })
}

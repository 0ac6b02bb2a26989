//! Outer boundary of the 2D alpha-shape of a point set.
//!
//! Triangles of the Delaunay triangulation whose circumradius exceeds the
//! disk radius are discarded; the boundary of the largest surviving
//! edge-connected component is walked into a counter-clockwise outer ring.
//! Holes are dropped: only the outer footprint boundary is needed.

use std::collections::HashMap;

use spade::{DelaunayTriangulation, Point2 as SpadePoint, Triangulation};

use crate::error::{Error, Result};

use super::{Point2, Polygon2D};

/// Disk radius used when none is configured: tracks point density so the
/// boundary hugs the cloud without fragmenting.
pub const ALPHA_SPACING_FACTOR: f64 = 1.5;

fn circumradius(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    let la = b.dist(c);
    let lb = a.dist(c);
    let lc = a.dist(b);
    let area2 = (b.sub(a)).cross(&c.sub(a)).abs(); // twice the area
    if area2 <= 0.0 {
        return f64::INFINITY;
    }
    (la * lb * lc) / (2.0 * area2)
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Outer boundary ring of the alpha-shape with the given disk radius.
///
/// If the alpha-complex is disconnected the component with the largest area
/// wins. Collinear input is degenerate; a radius below the smallest
/// circumradius leaves no triangles and is reported as such.
pub fn alpha_shape_boundary(points: &[Point2], alpha_radius: f64) -> Result<Polygon2D> {
    if !(alpha_radius > 0.0) || !alpha_radius.is_finite() {
        return Err(Error::InvalidParameter {
            field: "alpha_radius",
            message: format!("must be positive and finite, got {alpha_radius}"),
        });
    }
    if points.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "alpha shape needs at least 3 points, got {}",
            points.len()
        )));
    }

    let mut tri: DelaunayTriangulation<SpadePoint<f64>> = DelaunayTriangulation::new();
    for p in points {
        tri.insert(SpadePoint::new(p.x, p.y)).map_err(|e| {
            Error::DegenerateGeometry(format!("triangulation rejected point: {e:?}"))
        })?;
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::DegenerateGeometry(
            "all points are collinear".into(),
        ));
    }

    // Filter by circumradius.
    let faces: Vec<_> = tri.inner_faces().collect();
    let mut slot_of: HashMap<usize, usize> = HashMap::new();
    let mut kept = vec![false; faces.len()];
    let mut tri_area = vec![0.0f64; faces.len()];
    for (slot, face) in faces.iter().enumerate() {
        slot_of.insert(face.fix().index(), slot);
        let [a, b, c] = face.positions();
        let (a, b, c) = (
            Point2::new(a.x, a.y),
            Point2::new(b.x, b.y),
            Point2::new(c.x, c.y),
        );
        kept[slot] = circumradius(&a, &b, &c) <= alpha_radius;
        tri_area[slot] = (b.sub(&a)).cross(&c.sub(&a)).abs() / 2.0;
    }
    if !kept.iter().any(|&k| k) {
        return Err(Error::AlphaTooSmall(alpha_radius));
    }

    // Connected components over shared edges.
    let mut components = DisjointSet::new(faces.len());
    for (slot, face) in faces.iter().enumerate() {
        if !kept[slot] {
            continue;
        }
        for edge in face.adjacent_edges() {
            if let Some(neighbor) = edge.rev().face().as_inner() {
                let nslot = slot_of[&neighbor.fix().index()];
                if kept[nslot] {
                    components.union(slot, nslot);
                }
            }
        }
    }
    let mut component_area: HashMap<usize, f64> = HashMap::new();
    for slot in 0..faces.len() {
        if kept[slot] {
            let root = components.find(slot);
            *component_area.entry(root).or_insert(0.0) += tri_area[slot];
        }
    }
    let winner = *component_area
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty")
        .0;

    // Boundary edges of the winning component, directed with the kept face
    // on the left.
    let in_winner = |slot: usize, comps: &mut DisjointSet| kept[slot] && comps.find(slot) == winner;
    let mut boundary: Vec<(usize, usize, Point2, Point2)> = Vec::new();
    for (slot, face) in faces.iter().enumerate() {
        if !in_winner(slot, &mut components) {
            continue;
        }
        for edge in face.adjacent_edges() {
            let neighbor_in = edge
                .rev()
                .face()
                .as_inner()
                .map(|n| in_winner(slot_of[&n.fix().index()], &mut components))
                .unwrap_or(false);
            if !neighbor_in {
                let from = edge.from();
                let to = edge.to();
                boundary.push((
                    from.fix().index(),
                    to.fix().index(),
                    Point2::new(from.position().x, from.position().y),
                    Point2::new(to.position().x, to.position().y),
                ));
            }
        }
    }

    // Chain boundary edges into loops. At pinch vertices (several outgoing
    // edges) the sharpest left turn keeps outer-loop edges together.
    let mut outgoing: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, e) in boundary.iter().enumerate() {
        outgoing.entry(e.0).or_default().push(i);
    }
    let mut used = vec![false; boundary.len()];
    let mut best_ring: Option<(f64, Vec<Point2>)> = None;
    for start in 0..boundary.len() {
        if used[start] {
            continue;
        }
        let mut ring: Vec<Point2> = Vec::new();
        let mut current = start;
        loop {
            used[current] = true;
            let (_, to, p_from, p_to) = boundary[current];
            ring.push(p_from);
            let dir_in = p_to.sub(&p_from);
            let candidates = outgoing.get(&to).map(|v| v.as_slice()).unwrap_or(&[]);
            let mut next: Option<(f64, usize)> = None;
            for &cand in candidates {
                if used[cand] && cand != start {
                    continue;
                }
                let (_, _, q_from, q_to) = boundary[cand];
                let dir_out = q_to.sub(&q_from);
                let turn = dir_in.cross(&dir_out).atan2(dir_in.dot(&dir_out));
                if next.map(|(t, _)| turn > t).unwrap_or(true) {
                    next = Some((turn, cand));
                }
            }
            match next {
                Some((_, cand)) if cand == start => break,
                Some((_, cand)) => current = cand,
                None => break, // dangling chain; should not happen on valid complexes
            }
        }
        if ring.len() >= 3 {
            let area = {
                let mut s = 0.0;
                for i in 0..ring.len() {
                    s += ring[i].cross(&ring[(i + 1) % ring.len()]);
                }
                s / 2.0
            };
            if best_ring.as_ref().map(|(a, _)| area > *a).unwrap_or(true) {
                best_ring = Some((area, ring));
            }
        }
    }

    let (area, ring) = best_ring.ok_or_else(|| {
        Error::DegenerateGeometry("alpha-shape boundary could not be chained".into())
    })?;
    if area <= 0.0 {
        return Err(Error::DegenerateGeometry(
            "alpha-shape outer ring has non-positive area".into(),
        ));
    }
    Polygon2D::new(ring)
}

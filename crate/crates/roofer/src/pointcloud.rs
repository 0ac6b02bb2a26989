//! Per-building point-cloud ingestion, centering, and spacing statistics.
//!
//! Clouds arrive in a world frame (typically UTM) and are shifted to a
//! centroid-local frame before fitting; the subtracted centroid is kept as
//! the global translation so results can be mapped back exactly.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// A 3D point in meters. Coordinates are always finite; parsers reject
/// NaN/Inf on ingest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add(&self, other: &Point3) -> Point3 {
        Point3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        let d = self.sub(other);
        (d.x * d.x + d.y * d.y + d.z * d.z).sqrt()
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Which coordinate frame a cloud's points live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    World,
    Local,
}

/// Translation between the world frame and the centroid-local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalTranslation {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GlobalTranslation {
    pub const ZERO: GlobalTranslation = GlobalTranslation {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        GlobalTranslation { x, y, z }
    }

    pub fn as_point(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }
}

/// Ordered list of 3D points plus frame tag and optional spatial reference.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub frame: Frame,
    pub srs_name: Option<String>,
}

/// Supported on-disk cloud encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    XyzAscii,
    PlyAscii,
}

impl CloudFormat {
    /// Guess the format from a file extension (`.ply` vs anything else).
    pub fn from_path(path: &Path) -> CloudFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::XyzAscii,
        }
    }
}

/// Load a world-frame cloud from disk. Point order follows the file.
pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let points = match format {
        CloudFormat::XyzAscii => parse_xyz(&text)?,
        CloudFormat::PlyAscii => parse_ply(&text)?,
    };
    Ok(PointCloud {
        points,
        frame: Frame::World,
        srs_name: None,
    })
}

fn parse_coord(token: &str, line: usize, axis: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {axis} coordinate `{token}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite {axis} coordinate `{token}`"),
        });
    }
    Ok(v)
}

/// Parse whitespace-separated `x y z` lines. `#` starts a comment line;
/// columns beyond the third are ignored.
pub fn parse_xyz(text: &str) -> Result<Vec<Point3>> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let (Some(xs), Some(ys), Some(zs)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 coordinates, got `{line}`"),
            });
        };
        points.push(Point3::new(
            parse_coord(xs, line_no, "x")?,
            parse_coord(ys, line_no, "y")?,
            parse_coord(zs, line_no, "z")?,
        ));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("no points in XYZ input".into()));
    }
    Ok(points)
}

/// Parse an ASCII 1.0 PLY file with float/double `x`, `y`, `z` vertex
/// properties. Other scalar vertex properties and non-vertex elements are
/// skipped; list properties inside the vertex element are rejected because
/// they make column positions ambiguous.
pub fn parse_ply(text: &str) -> Result<Vec<Point3>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let Some((_, magic)) = lines.next() else {
        return Err(Error::EmptyInput("empty PLY input".into()));
    };
    if magic != "ply" {
        return Err(Error::Parse {
            line: 1,
            message: "missing `ply` magic line".into(),
        });
    }

    struct Element {
        name: String,
        count: usize,
        // property -> column index; only tracked for the vertex element
        columns: Vec<String>,
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    let mut header_end = 0usize;
    for (line_no, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with("comment") || line.starts_with("obj_info") {
            continue;
        }
        if line == "end_header" {
            header_end = line_no;
            break;
        }
        let mut parts = line.split_ascii_whitespace();
        match parts.next() {
            Some("format") => {
                let fmt: Vec<&str> = parts.collect();
                if fmt != ["ascii", "1.0"] {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unsupported format `{}` (need ascii 1.0)", fmt.join(" ")),
                    });
                }
                format_seen = true;
            }
            Some("element") => {
                let name = parts.next().ok_or(Error::Parse {
                    line: line_no,
                    message: "element without a name".into(),
                })?;
                let count: usize = parts
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or(Error::Parse {
                        line: line_no,
                        message: format!("element `{name}` without a valid count"),
                    })?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    columns: Vec::new(),
                });
            }
            Some("property") => {
                let Some(element) = elements.last_mut() else {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "property before any element".into(),
                    });
                };
                let kind = parts.next().unwrap_or("");
                if element.name == "vertex" {
                    if kind == "list" {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "list property in vertex element is unsupported".into(),
                        });
                    }
                    let name = parts.next().ok_or(Error::Parse {
                        line: line_no,
                        message: "property without a name".into(),
                    })?;
                    element.columns.push(name.to_string());
                }
            }
            Some(other) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown header keyword `{other}`"),
                });
            }
            None => {}
        }
    }
    if header_end == 0 {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "missing `end_header`".into(),
        });
    }
    if !format_seen {
        return Err(Error::Parse {
            line: header_end,
            message: "missing `format ascii 1.0` declaration".into(),
        });
    }

    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or(Error::Parse {
            line: header_end,
            message: "no vertex element declared".into(),
        })?;
    let col = |axis: &str| -> Result<usize> {
        vertex
            .columns
            .iter()
            .position(|c| c == axis)
            .ok_or(Error::Parse {
                line: header_end,
                message: format!("vertex element lacks a `{axis}` property"),
            })
    };
    let (cx, cy, cz) = (col("x")?, col("y")?, col("z")?);

    let mut points = Vec::with_capacity(vertex.count);
    let mut data = lines.filter(|(_, l)| !l.is_empty());
    for element in &elements {
        for _ in 0..element.count {
            let Some((line_no, line)) = data.next() else {
                return Err(Error::Parse {
                    line: text.lines().count().max(1),
                    message: format!("unexpected end of data in element `{}`", element.name),
                });
            };
            if element.name != "vertex" {
                continue;
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() != vertex.columns.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "vertex row has {} fields, header declares {}",
                        fields.len(),
                        vertex.columns.len()
                    ),
                });
            }
            points.push(Point3::new(
                parse_coord(fields[cx], line_no, "x")?,
                parse_coord(fields[cy], line_no, "y")?,
                parse_coord(fields[cz], line_no, "z")?,
            ));
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("PLY input declares zero vertices".into()));
    }
    Ok(points)
}

impl PointCloud {
    pub fn new_world(points: Vec<Point3>, srs_name: Option<String>) -> PointCloud {
        PointCloud {
            points,
            frame: Frame::World,
            srs_name,
        }
    }

    pub fn new_local(points: Vec<Point3>, srs_name: Option<String>) -> PointCloud {
        PointCloud {
            points,
            frame: Frame::Local,
            srs_name,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Arithmetic mean of the coordinates.
    pub fn centroid(&self) -> Result<Point3> {
        if self.points.is_empty() {
            return Err(Error::EmptyInput("centroid of empty cloud".into()));
        }
        let n = self.points.len() as f64;
        let sum = self
            .points
            .iter()
            .fold(Point3::new(0.0, 0.0, 0.0), |acc, p| acc.add(p));
        Ok(Point3::new(sum.x / n, sum.y / n, sum.z / n))
    }

    /// Shift a world cloud so its centroid sits at the origin. Returns the
    /// local cloud together with the subtracted centroid; adding the
    /// translation back reproduces the input coordinates.
    pub fn to_local(&self) -> Result<(PointCloud, GlobalTranslation)> {
        if self.frame != Frame::World {
            return Err(Error::InvalidParameter {
                field: "frame",
                message: "to_local expects a world-frame cloud".into(),
            });
        }
        let c = self.centroid()?;
        let points = self.points.iter().map(|p| p.sub(&c)).collect();
        Ok((
            PointCloud {
                points,
                frame: Frame::Local,
                srs_name: self.srs_name.clone(),
            },
            GlobalTranslation::new(c.x, c.y, c.z),
        ))
    }

    /// Inverse of [`to_local`](Self::to_local).
    pub fn to_world(&self, t: &GlobalTranslation) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| p.add(&t.as_point())).collect(),
            frame: Frame::World,
            srs_name: self.srs_name.clone(),
        }
    }

    /// Drop z, preserving point order (duplicates kept).
    pub fn project_xy(&self) -> Result<Vec<Point2>> {
        if self.points.is_empty() {
            return Err(Error::EmptyInput("projection of empty cloud".into()));
        }
        Ok(self.points.iter().map(|p| p.xy()).collect())
    }

    /// Mean 2D nearest-neighbor distance over the projected points, via an
    /// exact search on a uniform grid index.
    pub fn mean_spacing(&self) -> Result<f64> {
        let pts = match self.points.len() {
            0 | 1 => {
                return Err(Error::InsufficientData(
                    "mean_spacing needs at least 2 points".into(),
                ))
            }
            _ => self.project_xy()?,
        };
        Ok(mean_nearest_neighbor(&pts))
    }
}

fn mean_nearest_neighbor(pts: &[Point2]) -> f64 {
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let area = ((max_x - min_x) * (max_y - min_y)).max(f64::MIN_POSITIVE);
    let cell = (area / pts.len() as f64).sqrt().max(1e-12);

    let key = |p: &Point2| -> (i64, i64) {
        (
            ((p.x - min_x) / cell).floor() as i64,
            ((p.y - min_y) / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }

    let mut total = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let (cx, cy) = key(p);
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            let mut any_cell = false;
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue; // only the ring boundary
                    }
                    if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                        any_cell = true;
                        for &j in bucket {
                            if j != i {
                                best = best.min(p.dist(&pts[j]));
                            }
                        }
                    }
                }
            }
            // Any point in ring r+1 or beyond is at least r*cell away.
            if best <= ring as f64 * cell {
                break;
            }
            ring += 1;
            if !any_cell && ring as f64 * cell > (max_x - min_x) + (max_y - min_y) + cell {
                break; // exhausted the occupied extent
            }
        }
        total += best;
    }
    total / pts.len() as f64
}

//! Holistic fitting engine: the joint cost (mean point-surface distance
//! plus weighted footprint mismatch), finite-difference gradients, the
//! bound-constrained minimizer, bounding-box initialization, and the
//! fit-all-select-best roof-type classifier.

mod lbfgsb;

pub use lbfgsb::{lbfgsb_minimize, LbfgsbConfig, LbfgsbOutcome};

use crate::error::{Error, Result};
use crate::geometry::{
    alpha_shape_boundary, fit_plane_svd, iou_2d, min_area_rect, Plane, Polygon2D,
    ALPHA_SPACING_FACTOR,
};
use crate::pointcloud::{Frame, GlobalTranslation, PointCloud};
use crate::primitives::{
    apply_pose, footprint_polygon, pack_params, param_bounds, roof_faces, roof_vertices,
    unpack_params, Pose, PrimitiveKind, RoofPrimitive, ShapeParams,
};
use crate::util::percentile;

/// Fitting controls. `beta` weighs the footprint term against the mean
/// point-surface distance; the remaining fields drive the minimizer and the
/// finite-difference stencil.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub memory_pairs: usize,
    pub max_iterations: usize,
    /// Convergence tolerance on the projected-gradient infinity norm.
    pub gradient_tolerance: f64,
    /// Relative finite-difference step, scaled per coordinate.
    pub fd_step: f64,
    pub beta: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            memory_pairs: 10,
            max_iterations: 200,
            gradient_tolerance: 1e-6,
            fd_step: 1e-6,
            beta: 10.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let require = |field: &'static str, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    message: "must be positive".into(),
                })
            }
        };
        require("memory_pairs", self.memory_pairs > 0)?;
        require("max_iterations", self.max_iterations > 0)?;
        require("gradient_tolerance", self.gradient_tolerance > 0.0)?;
        require("fd_step", self.fd_step > 0.0)?;
        require("beta", self.beta >= 0.0)?;
        Ok(())
    }

    fn lbfgsb(&self) -> LbfgsbConfig {
        LbfgsbConfig {
            memory: self.memory_pairs,
            max_iterations: self.max_iterations,
            pg_tolerance: self.gradient_tolerance,
            f_rel_tolerance: 1e-10,
        }
    }
}

/// The two cost terms and their weighted total, `j = j1 + beta * j2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// Mean point-surface distance in meters.
    pub j1: f64,
    /// Footprint mismatch, `1 - IoU`, in [0, 1].
    pub j2: f64,
    pub beta: f64,
    pub j: f64,
}

/// Outcome of fitting one primitive kind to a cloud.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub primitive: RoofPrimitive,
    pub cost: CostBreakdown,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted iterates as (iteration, j); non-increasing.
    pub history: Vec<(usize, f64)>,
}

/// Planes of the posed roof faces, rebuilt the same way at every objective
/// evaluation: face vertices from the shape parameters, pose applied, then
/// an SVD plane through each ring.
pub fn roof_planes(prim: &RoofPrimitive) -> Result<Vec<Plane>> {
    let verts = roof_vertices(prim.kind, &prim.shape)?;
    let posed = apply_pose(&verts, &prim.pose);
    roof_faces(prim.kind)
        .faces
        .iter()
        .map(|ring| {
            let pts: Vec<_> = ring.iter().map(|&i| posed[i]).collect();
            fit_plane_svd(&pts)
        })
        .collect()
}

/// Mean over the cloud of the distance to the nearest roof plane.
fn mean_min_plane_distance(cloud: &PointCloud, planes: &[Plane]) -> f64 {
    let mut total = 0.0;
    for p in &cloud.points {
        let mut best = f64::INFINITY;
        for plane in planes {
            best = best.min(plane.distance(p));
        }
        total += best;
    }
    total / cloud.points.len() as f64
}

/// Evaluate the joint cost of a primitive against a local-frame cloud and
/// its precomputed footprint boundary.
pub fn cost(
    cloud: &PointCloud,
    prim: &RoofPrimitive,
    boundary: &Polygon2D,
    config: &OptimizerConfig,
) -> Result<CostBreakdown> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("cost of empty cloud".into()));
    }
    if cloud.frame != Frame::Local {
        return Err(Error::InvalidParameter {
            field: "frame",
            message: "cost expects a local-frame cloud".into(),
        });
    }
    prim.validate()?;
    let planes = roof_planes(prim)?;
    let j1 = mean_min_plane_distance(cloud, &planes);
    let j2 = 1.0 - iou_2d(&footprint_polygon(prim)?, boundary);
    Ok(CostBreakdown {
        j1,
        j2,
        beta: config.beta,
        j: j1 + config.beta * j2,
    })
}

/// Central-difference gradient with per-coordinate steps
/// `rel_step * max(|x_i|, 1)`, switching to one-sided differences where a
/// bound truncates the stencil.
pub fn fd_gradient(
    objective: &mut dyn FnMut(&[f64]) -> Result<f64>,
    x: &[f64],
    lower: &[f64],
    upper: &[f64],
    rel_step: f64,
) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; x.len()];
    let mut xt = x.to_vec();
    let mut f_center: Option<f64> = None;
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        let up_ok = x[i] + h <= upper[i];
        let down_ok = x[i] - h >= lower[i];
        let check = |v: f64, side: &str| -> Result<f64> {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::ObjectiveEvaluation {
                    coordinate: i,
                    message: format!("objective is {v} on the {side} stencil point"),
                })
            }
        };
        let g = match (up_ok, down_ok) {
            (true, true) => {
                xt[i] = x[i] + h;
                let fp = check(objective(&xt)?, "forward")?;
                xt[i] = x[i] - h;
                let fm = check(objective(&xt)?, "backward")?;
                (fp - fm) / (2.0 * h)
            }
            (true, false) => {
                let fc = match f_center {
                    Some(v) => v,
                    None => {
                        xt[i] = x[i];
                        let v = check(objective(&xt)?, "center")?;
                        f_center = Some(v);
                        v
                    }
                };
                xt[i] = x[i] + h;
                let fp = check(objective(&xt)?, "forward")?;
                (fp - fc) / h
            }
            (false, true) => {
                let fc = match f_center {
                    Some(v) => v,
                    None => {
                        xt[i] = x[i];
                        let v = check(objective(&xt)?, "center")?;
                        f_center = Some(v);
                        v
                    }
                };
                xt[i] = x[i] - h;
                let fm = check(objective(&xt)?, "backward")?;
                (fc - fm) / h
            }
            (false, false) => 0.0, // interval narrower than the stencil
        };
        xt[i] = x[i];
        grad[i] = g;
    }
    Ok(grad)
}

/// Footprint boundary of a local-frame cloud: the alpha-shape of the
/// projected points, with the radius defaulting to 1.5x the mean point
/// spacing.
pub fn compute_boundary(cloud: &PointCloud, alpha_radius: Option<f64>) -> Result<Polygon2D> {
    let projected = cloud.project_xy()?;
    let radius = match alpha_radius {
        Some(r) => r,
        None => ALPHA_SPACING_FACTOR * cloud.mean_spacing()?,
    };
    alpha_shape_boundary(&projected, radius)
}

/// Starting primitive from the minimum bounding box of the projected points
/// plus z percentiles: the 5th percentile estimates the eave elevation and
/// the 5th-to-95th span the rise (floored at 0.5 m). Hip starts mid-ridge.
pub fn initial_guess(cloud: &PointCloud, kind: PrimitiveKind) -> Result<RoofPrimitive> {
    let projected = cloud.project_xy()?;
    let rect = min_area_rect(&projected)?;
    let zs: Vec<f64> = cloud.points.iter().map(|p| p.z).collect();
    let z_low = percentile(&zs, 5.0);
    let z_high = percentile(&zs, 95.0);
    let rise = (z_high - z_low).max(0.5);

    let (lower, upper) = param_bounds(kind);
    let clamp_dim = |v: f64| v.clamp(lower[0], upper[0]);
    let shape = match kind {
        PrimitiveKind::Hip => ShapeParams::new_hip(
            clamp_dim(rect.length),
            clamp_dim(rect.width),
            rise.min(upper[2]),
            0.5,
        ),
        _ => ShapeParams::new(
            clamp_dim(rect.length),
            clamp_dim(rect.width),
            rise.min(upper[2]),
        ),
    };
    let prim = RoofPrimitive {
        kind,
        shape,
        pose: Pose::new(
            rect.angle,
            crate::pointcloud::Point3::new(
                rect.center.x.clamp(-50.0, 50.0),
                rect.center.y.clamp(-50.0, 50.0),
                z_low.clamp(-50.0, 50.0),
            ),
        ),
        t_global: GlobalTranslation::ZERO,
    };
    prim.validate()?;
    Ok(prim)
}

/// Fit one primitive kind to a local-frame cloud against a precomputed
/// boundary. The full cost pipeline (face planes, mean distance, footprint
/// IoU) is re-evaluated at every objective call.
pub fn fit_with_boundary(
    cloud: &PointCloud,
    kind: PrimitiveKind,
    config: &OptimizerConfig,
    boundary: &Polygon2D,
) -> Result<FitResult> {
    config.validate()?;
    let guess = initial_guess(cloud, kind)?;
    let x0 = pack_params(&guess);
    let (lower, upper) = param_bounds(kind);

    let make_eval = || {
        |x: &[f64]| -> Result<f64> {
            let prim = unpack_params(kind, x, GlobalTranslation::ZERO)?;
            Ok(cost(cloud, &prim, boundary, config)?.j)
        }
    };
    let mut objective = make_eval();
    let mut grad_objective = make_eval();
    let fd = config.fd_step;
    let (glower, gupper) = (lower.clone(), upper.clone());
    let mut gradient = move |x: &[f64]| -> Result<Vec<f64>> {
        fd_gradient(&mut grad_objective, x, &glower, &gupper, fd)
    };

    let outcome = lbfgsb_minimize(
        &mut objective,
        &mut gradient,
        &x0,
        &lower,
        &upper,
        &config.lbfgsb(),
    )?;

    let primitive = unpack_params(kind, &outcome.x, GlobalTranslation::ZERO)?.canonicalized();
    let final_cost = cost(cloud, &primitive, boundary, config)?;
    Ok(FitResult {
        primitive,
        cost: final_cost,
        iterations: outcome.iterations,
        converged: outcome.converged,
        history: outcome.history,
    })
}

/// Fit one primitive kind, computing the alpha-shape boundary internally.
pub fn fit(cloud: &PointCloud, kind: PrimitiveKind, config: &OptimizerConfig) -> Result<FitResult> {
    let boundary = compute_boundary(cloud, None)?;
    fit_with_boundary(cloud, kind, config, &boundary)
}

/// Margin below which a hip win counts as a tie with a simpler kind.
pub const PARSIMONY_MARGIN: f64 = 1e-3;

/// Fit every registered kind and pick the lowest final cost. A hip win by
/// less than [`PARSIMONY_MARGIN`] over the best 3-parameter kind is treated
/// as a tie and the simpler kind preferred, since hip nests both.
pub fn classify(
    cloud: &PointCloud,
    config: &OptimizerConfig,
    alpha_radius: Option<f64>,
) -> Result<(PrimitiveKind, Vec<(PrimitiveKind, FitResult)>)> {
    let boundary = compute_boundary(cloud, alpha_radius)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for kind in PrimitiveKind::ALL {
        match fit_with_boundary(cloud, kind, config, &boundary) {
            Ok(res) => results.push((kind, res)),
            Err(e) => failures.push(format!("{kind}: {e}")),
        }
    }
    if results.is_empty() {
        return Err(Error::ClassificationFailure(failures.join("; ")));
    }
    results.sort_by(|a, b| a.1.cost.j.total_cmp(&b.1.cost.j));

    let mut winner = results[0].0;
    if winner == PrimitiveKind::Hip {
        if let Some(best_simple) = results
            .iter()
            .filter(|(k, _)| *k != PrimitiveKind::Hip)
            .min_by(|a, b| a.1.cost.j.total_cmp(&b.1.cost.j))
        {
            if best_simple.1.cost.j - results[0].1.cost.j < PARSIMONY_MARGIN {
                winner = best_simple.0;
            }
        }
    }
    Ok((winner, results))
}

/// Convenience pipeline for world-frame clouds: center, fit (or classify
/// when `kind` is None), and attach the global translation to the results.
pub fn fit_world(
    cloud: &PointCloud,
    kind: Option<PrimitiveKind>,
    config: &OptimizerConfig,
    alpha_radius: Option<f64>,
) -> Result<(FitResult, Vec<(PrimitiveKind, FitResult)>)> {
    let (local, t_global) = cloud.to_local()?;
    let (mut best, mut all) = match kind {
        Some(k) => {
            let boundary = compute_boundary(&local, alpha_radius)?;
            let res = fit_with_boundary(&local, k, config, &boundary)?;
            (res.clone(), vec![(k, res)])
        }
        None => {
            let (winner, all) = classify(&local, config, alpha_radius)?;
            let best = all
                .iter()
                .find(|(k, _)| *k == winner)
                .expect("winner present")
                .1
                .clone();
            (best, all)
        }
    };
    best.primitive.t_global = t_global;
    for (_, r) in &mut all {
        r.primitive.t_global = t_global;
    }
    Ok((best, all))
}

#[cfg(test)]
mod tests;

//! Bound-constrained limited-memory quasi-Newton minimizer.
//!
//! Each iteration follows the classic three-phase structure: a gradient
//! projection along the breakpoint path of the box finds the generalized
//! Cauchy point and the active set, a Newton step on the free variables
//! refines it, and a strong-Wolfe line search accepts the step. The Hessian
//! model is the limited-memory BFGS matrix built from the last `memory`
//! curvature pairs; with the small parameter vectors fitted here (≤ 8
//! entries) it is assembled densely, which is the same matrix the compact
//! representation encodes. If the subspace solve fails the step falls back
//! to the projected steepest-descent direction, preserving monotone descent.

use nalgebra::{Cholesky, DMatrix, DVector};
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Controls for [`lbfgsb_minimize`].
#[derive(Debug, Clone)]
pub struct LbfgsbConfig {
    /// Number of curvature pairs kept for the Hessian model.
    pub memory: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the projected-gradient infinity norm.
    pub pg_tolerance: f64,
    /// Stop when the relative objective decrease falls below this.
    pub f_rel_tolerance: f64,
}

impl Default for LbfgsbConfig {
    fn default() -> Self {
        LbfgsbConfig {
            memory: 10,
            max_iterations: 200,
            pg_tolerance: 1e-6,
            f_rel_tolerance: 1e-10,
        }
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct LbfgsbOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Accepted iterates as (iteration, objective); non-increasing in f.
    pub history: Vec<(usize, f64)>,
    pub message: &'static str,
}

type Objective<'a> = dyn FnMut(&[f64]) -> Result<f64> + 'a;
type Gradient<'a> = dyn FnMut(&[f64]) -> Result<Vec<f64>> + 'a;

fn clamp_vec(x: &mut DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lower[i], upper[i]);
    }
}

/// Infinity norm of the projected gradient P(x - g) - x.
fn projected_gradient_norm(
    x: &DVector<f64>,
    g: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> f64 {
    let mut norm = 0.0f64;
    for i in 0..x.len() {
        let step = (x[i] - g[i]).clamp(lower[i], upper[i]) - x[i];
        norm = norm.max(step.abs());
    }
    norm
}

/// Dense limited-memory BFGS matrix: theta*I updated with the stored pairs.
fn build_hessian(n: usize, theta: f64, pairs: &VecDeque<(DVector<f64>, DVector<f64>)>) -> DMatrix<f64> {
    let mut b = DMatrix::<f64>::identity(n, n) * theta;
    for (s, y) in pairs {
        let bs = &b * s;
        let sbs = s.dot(&bs);
        let sy = s.dot(y);
        if sbs > 0.0 && sy > 0.0 {
            b -= &bs * bs.transpose() / sbs;
            b += y * y.transpose() / sy;
        }
    }
    b
}

/// Generalized Cauchy point: minimize the quadratic model along the
/// projected steepest-descent path, freezing coordinates at their bounds as
/// breakpoints are crossed. Returns the point and the free-variable set.
fn cauchy_point(
    x: &DVector<f64>,
    g: &DVector<f64>,
    b: &DMatrix<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> (DVector<f64>, Vec<usize>) {
    let n = x.len();
    let mut breakpoints = vec![f64::INFINITY; n];
    let mut d = DVector::<f64>::zeros(n);
    for i in 0..n {
        if g[i] < 0.0 {
            breakpoints[i] = (x[i] - upper[i]) / g[i];
        } else if g[i] > 0.0 {
            breakpoints[i] = (x[i] - lower[i]) / g[i];
        }
        if breakpoints[i] > 0.0 {
            d[i] = -g[i];
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| breakpoints[i] > 0.0).collect();
    order.sort_by(|&a, &bb| breakpoints[a].total_cmp(&breakpoints[bb]));

    let mut xcp = x.clone();
    let mut z = DVector::<f64>::zeros(n); // xcp - x so far
    let mut t_old = 0.0f64;
    let mut idx = 0usize;

    loop {
        if d.iter().all(|&v| v == 0.0) {
            break;
        }
        // Model derivatives along d at the current point.
        let bz = b * &z;
        let df = g.dot(&d) + d.dot(&bz);
        let bd = b * &d;
        let ddf = d.dot(&bd);
        if df >= 0.0 {
            break; // no further descent along the path
        }
        let dt_star = if ddf > 0.0 { -df / ddf } else { f64::INFINITY };

        // Length of the current segment until the next breakpoint.
        let (t_next, next_var) = if idx < order.len() {
            (breakpoints[order[idx]], Some(order[idx]))
        } else {
            (f64::INFINITY, None)
        };
        let seg = t_next - t_old;

        if dt_star < seg {
            for i in 0..n {
                z[i] += dt_star * d[i];
                xcp[i] = (x[i] + z[i]).clamp(lower[i], upper[i]);
            }
            break;
        }
        match next_var {
            Some(v) => {
                // Walk to the breakpoint and freeze the variable there.
                for i in 0..n {
                    z[i] += seg * d[i];
                }
                let bound = if d[v] > 0.0 { upper[v] } else { lower[v] };
                z[v] = bound - x[v];
                for i in 0..n {
                    xcp[i] = (x[i] + z[i]).clamp(lower[i], upper[i]);
                }
                d[v] = 0.0;
                t_old = t_next;
                idx += 1;
                // Skip over coinciding breakpoints.
                while idx < order.len() && breakpoints[order[idx]] <= t_old {
                    let u = order[idx];
                    if d[u] != 0.0 {
                        let bound = if d[u] > 0.0 { upper[u] } else { lower[u] };
                        z[u] = bound - x[u];
                        xcp[u] = x[u] + z[u];
                        d[u] = 0.0;
                    }
                    idx += 1;
                }
            }
            None => break, // unbounded path exhausted (all breakpoints passed)
        }
    }

    let free = (0..n)
        .filter(|&i| xcp[i] > lower[i] && xcp[i] < upper[i])
        .collect();
    (xcp, free)
}

/// Newton step of the quadratic model on the free variables, truncated to
/// stay inside the box. Returns the improved point, or None when the system
/// is unsolvable.
fn subspace_step(
    x: &DVector<f64>,
    g: &DVector<f64>,
    b: &DMatrix<f64>,
    xcp: &DVector<f64>,
    free: &[usize],
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Option<DVector<f64>> {
    if free.is_empty() {
        return None;
    }
    let z = xcp - x;
    let r_full = g + b * &z; // model gradient at the Cauchy point
    let k = free.len();
    let mut bff = DMatrix::<f64>::zeros(k, k);
    let mut rf = DVector::<f64>::zeros(k);
    for (a, &i) in free.iter().enumerate() {
        rf[a] = r_full[i];
        for (c, &j) in free.iter().enumerate() {
            bff[(a, c)] = b[(i, j)];
        }
    }
    let delta = match Cholesky::new(bff.clone()) {
        Some(chol) => chol.solve(&(-&rf)),
        None => bff.lu().solve(&(-&rf))?,
    };

    // Largest alpha in (0, 1] keeping the free coordinates feasible.
    let mut alpha = 1.0f64;
    for (a, &i) in free.iter().enumerate() {
        if delta[a] > 0.0 {
            alpha = alpha.min((upper[i] - xcp[i]) / delta[a]);
        } else if delta[a] < 0.0 {
            alpha = alpha.min((lower[i] - xcp[i]) / delta[a]);
        }
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return None;
    }
    let mut xbar = xcp.clone();
    for (a, &i) in free.iter().enumerate() {
        xbar[i] = (xcp[i] + alpha * delta[a]).clamp(lower[i], upper[i]);
    }
    Some(xbar)
}

struct LineSearchResult {
    alpha: f64,
    f: f64,
    g: DVector<f64>,
}

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;

/// Strong Wolfe line search (bracket + zoom with quadratic interpolation).
///
/// On functions with derivative kinks the curvature condition can be
/// unsatisfiable; the zoom phase then shrinks the bracket and the best
/// Armijo-feasible point is accepted, which keeps descent monotone.
#[allow(clippy::too_many_arguments)]
fn wolfe_search(
    objective: &mut Objective,
    gradient: &mut Gradient,
    x: &DVector<f64>,
    d: &DVector<f64>,
    f0: f64,
    dphi0: f64,
    alpha_max: f64,
    n_evals: &mut usize,
) -> Result<Option<LineSearchResult>> {
    let eval_f = |a: f64, objective: &mut Objective, n_evals: &mut usize| -> Result<f64> {
        *n_evals += 1;
        let xt: Vec<f64> = (0..x.len()).map(|i| x[i] + a * d[i]).collect();
        objective(&xt)
    };
    let eval_g = |a: f64, gradient: &mut Gradient| -> Result<DVector<f64>> {
        let xt: Vec<f64> = (0..x.len()).map(|i| x[i] + a * d[i]).collect();
        Ok(DVector::from_vec(gradient(&xt)?))
    };

    let mut alpha_prev = 0.0f64;
    let mut f_prev = f0;
    let mut alpha = 1.0f64.min(alpha_max);
    let mut bracket: Option<(f64, f64, f64, f64)> = None; // lo, f_lo, hi, f_hi

    for iter in 0..20 {
        let f_a = eval_f(alpha, objective, n_evals)?;
        if !f_a.is_finite() {
            return Err(Error::ObjectiveEvaluation {
                coordinate: 0,
                message: format!("non-finite objective at step {alpha}"),
            });
        }
        if f_a > f0 + WOLFE_C1 * alpha * dphi0 || (iter > 0 && f_a >= f_prev) {
            bracket = Some((alpha_prev, f_prev, alpha, f_a));
            break;
        }
        let g_a = eval_g(alpha, gradient)?;
        let dphi_a = g_a.dot(d);
        if dphi_a.abs() <= -WOLFE_C2 * dphi0 {
            return Ok(Some(LineSearchResult {
                alpha,
                f: f_a,
                g: g_a,
            }));
        }
        if dphi_a >= 0.0 {
            bracket = Some((alpha, f_a, alpha_prev, f_prev));
            break;
        }
        if alpha >= alpha_max {
            // Bound hit with sufficient decrease; accept the bounded step.
            return Ok(Some(LineSearchResult {
                alpha,
                f: f_a,
                g: g_a,
            }));
        }
        alpha_prev = alpha;
        f_prev = f_a;
        alpha = (2.0 * alpha).min(alpha_max);
    }

    let Some((mut lo, mut f_lo, mut hi, mut f_hi)) = bracket else {
        return Ok(None);
    };

    // Zoom.
    let mut best: Option<LineSearchResult> = None;
    for _ in 0..50 {
        if (hi - lo).abs() <= 1e-16 * hi.abs().max(1.0) {
            break;
        }
        // Quadratic interpolation through (lo, f_lo), (hi, f_hi) with slope
        // dphi0 as a proxy; fall back to bisection when it degenerates.
        let mid = 0.5 * (lo + hi);
        let denom = f_hi - f_lo - (hi - lo) * dphi0;
        let mut a_j = if denom.abs() > 1e-300 {
            lo - 0.5 * (lo - hi) * (lo - hi) * dphi0 / denom
        } else {
            mid
        };
        let (lo_b, hi_b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        if !a_j.is_finite() || a_j <= lo_b + 0.1 * (hi_b - lo_b) || a_j >= hi_b - 0.1 * (hi_b - lo_b)
        {
            a_j = mid;
        }
        let f_j = eval_f(a_j, objective, n_evals)?;
        if f_j > f0 + WOLFE_C1 * a_j * dphi0 || f_j >= f_lo {
            hi = a_j;
            f_hi = f_j;
        } else {
            let g_j = eval_g(a_j, gradient)?;
            let dphi_j = g_j.dot(d);
            if dphi_j.abs() <= -WOLFE_C2 * dphi0 {
                return Ok(Some(LineSearchResult {
                    alpha: a_j,
                    f: f_j,
                    g: g_j,
                }));
            }
            if dphi_j * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = a_j;
            f_lo = f_j;
            best = Some(LineSearchResult {
                alpha: a_j,
                f: f_j,
                g: g_j,
            });
        }
    }
    if best.is_none() && f_lo < f0 && lo > 0.0 {
        // The bracket shrank onto lo; recover its gradient and accept.
        let g_lo = eval_g(lo, gradient)?;
        best = Some(LineSearchResult {
            alpha: lo,
            f: f_lo,
            g: g_lo,
        });
    }
    Ok(best)
}

/// Minimize `objective` over the box `[lower, upper]` starting at `x0`.
///
/// The gradient callback is typically a finite-difference wrapper around the
/// objective. Line-search failure is not an error: the best point so far is
/// returned with `converged = false`.
pub fn lbfgsb_minimize(
    objective: &mut Objective,
    gradient: &mut Gradient,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    config: &LbfgsbConfig,
) -> Result<LbfgsbOutcome> {
    let n = x0.len();
    if lower.len() != n || upper.len() != n {
        return Err(Error::Bounds(format!(
            "bounds length {}/{} does not match x0 length {n}",
            lower.len(),
            upper.len()
        )));
    }
    for i in 0..n {
        if !(lower[i] <= upper[i]) {
            return Err(Error::Bounds(format!(
                "lower[{i}] = {} exceeds upper[{i}] = {}",
                lower[i], upper[i]
            )));
        }
        if x0[i] < lower[i] - 1e-12 || x0[i] > upper[i] + 1e-12 {
            return Err(Error::Bounds(format!(
                "x0[{i}] = {} outside [{}, {}]",
                x0[i], lower[i], upper[i]
            )));
        }
    }
    let lower = DVector::from_column_slice(lower);
    let upper = DVector::from_column_slice(upper);
    let mut x = DVector::from_column_slice(x0);
    clamp_vec(&mut x, &lower, &upper);

    let mut n_evals = 0usize;
    let mut f = objective(x.as_slice())?;
    n_evals += 1;
    if !f.is_finite() {
        return Err(Error::ObjectiveEvaluation {
            coordinate: 0,
            message: format!("objective is {f} at the start point"),
        });
    }
    let mut g = DVector::from_vec(gradient(x.as_slice())?);

    let mut pairs: VecDeque<(DVector<f64>, DVector<f64>)> = VecDeque::new();
    let mut theta = 1.0f64;
    let mut history = vec![(0usize, f)];

    let mut converged = false;
    let mut message = "max iterations reached";
    let mut iterations = 0usize;

    for iter in 1..=config.max_iterations {
        iterations = iter;
        if projected_gradient_norm(&x, &g, &lower, &upper) <= config.pg_tolerance {
            converged = true;
            message = "projected gradient within tolerance";
            iterations = iter - 1;
            break;
        }

        let b = build_hessian(n, theta, &pairs);
        let (xcp, free) = cauchy_point(&x, &g, &b, &lower, &upper);
        let mut d = match subspace_step(&x, &g, &b, &xcp, &free, &lower, &upper) {
            Some(xbar) => xbar - &x,
            None => &xcp - &x,
        };

        // The step must be a descent direction; otherwise retreat to the
        // projected steepest descent.
        let mut dphi0 = g.dot(&d);
        if dphi0 >= 0.0 || d.amax() == 0.0 {
            for i in 0..n {
                d[i] = (x[i] - g[i]).clamp(lower[i], upper[i]) - x[i];
            }
            dphi0 = g.dot(&d);
            if dphi0 >= 0.0 || d.amax() == 0.0 {
                converged = true;
                message = "no descent direction available";
                break;
            }
        }

        // Largest feasible step along d.
        let mut alpha_max = f64::INFINITY;
        for i in 0..n {
            if d[i] > 0.0 {
                alpha_max = alpha_max.min((upper[i] - x[i]) / d[i]);
            } else if d[i] < 0.0 {
                alpha_max = alpha_max.min((lower[i] - x[i]) / d[i]);
            }
        }
        alpha_max = alpha_max.max(1e-16);

        let search = wolfe_search(
            objective, gradient, &x, &d, f, dphi0, alpha_max, &mut n_evals,
        )?;
        let Some(step) = search else {
            // Try once more along projected steepest descent before giving up.
            let mut sd = DVector::<f64>::zeros(n);
            for i in 0..n {
                sd[i] = (x[i] - g[i]).clamp(lower[i], upper[i]) - x[i];
            }
            let sd_slope = g.dot(&sd);
            let retry = if sd_slope < 0.0 {
                let mut a_max = f64::INFINITY;
                for i in 0..n {
                    if sd[i] > 0.0 {
                        a_max = a_max.min((upper[i] - x[i]) / sd[i]);
                    } else if sd[i] < 0.0 {
                        a_max = a_max.min((lower[i] - x[i]) / sd[i]);
                    }
                }
                wolfe_search(
                    objective,
                    gradient,
                    &x,
                    &sd,
                    f,
                    sd_slope,
                    a_max.max(1e-16),
                    &mut n_evals,
                )?
                .map(|r| (sd, r))
            } else {
                None
            };
            match retry {
                Some((sd, r)) => {
                    let step_vec = sd * r.alpha;
                    let mut x_new = &x + &step_vec;
                    clamp_vec(&mut x_new, &lower, &upper);
                    let s = &x_new - &x;
                    let y = &r.g - &g;
                    accept_pair(&mut pairs, &mut theta, s, y, config.memory);
                    x = x_new;
                    let f_prev = f;
                    f = r.f;
                    g = r.g;
                    history.push((iter, f));
                    if f_prev - f <= config.f_rel_tolerance * f_prev.abs().max(f.abs()).max(1.0) {
                        converged = true;
                        message = "objective decrease below tolerance";
                        break;
                    }
                    continue;
                }
                None => {
                    message = "line search failed";
                    break;
                }
            }
        };

        let step_vec = &d * step.alpha;
        let mut x_new = &x + &step_vec;
        clamp_vec(&mut x_new, &lower, &upper);
        let s = &x_new - &x;
        let y = &step.g - &g;
        accept_pair(&mut pairs, &mut theta, s, y, config.memory);

        let f_prev = f;
        x = x_new;
        f = step.f;
        g = step.g;
        history.push((iter, f));

        if f_prev - f <= config.f_rel_tolerance * f_prev.abs().max(f.abs()).max(1.0) {
            converged = true;
            message = "objective decrease below tolerance";
            break;
        }
    }

    if !converged
        && iterations < config.max_iterations
        && projected_gradient_norm(&x, &g, &lower, &upper) <= config.pg_tolerance
    {
        converged = true;
        message = "projected gradient within tolerance";
    }
    if !converged && iterations >= config.max_iterations {
        message = "max iterations reached";
    }

    let _ = n_evals;
    Ok(LbfgsbOutcome {
        x: x.as_slice().to_vec(),
        f,
        converged,
        iterations,
        history,
        message,
    })
}

fn accept_pair(
    pairs: &mut VecDeque<(DVector<f64>, DVector<f64>)>,
    theta: &mut f64,
    s: DVector<f64>,
    y: DVector<f64>,
    memory: usize,
) {
    let sy = s.dot(&y);
    let yy = y.dot(&y);
    if sy > 1e-10 * s.norm() * y.norm() && yy > 0.0 {
        *theta = (yy / sy).clamp(1e-8, 1e12);
        pairs.push_back((s, y));
        while pairs.len() > memory.max(1) {
            pairs.pop_front();
        }
    }
}

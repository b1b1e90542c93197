//! The small convex program every module leans on:
//!
//! ```text
//!     maximize   t
//!     subject to <g_j, y> >= t   for all j
//!                ‖y‖ <= 1
//! ```
//!
//! By minimax duality the optimum equals the distance from the origin to the
//! convex hull of the `g_j`, and the optimal `y` is the minimum-norm point of
//! that hull, normalized. The minimum-norm point is found with Wolfe's
//! algorithm, which is finite and exact up to rounding.
//!
//! Uses: hemisphere feasibility (`g_j = p_j`), the spherical Chebyshev center
//! of a convex polygon (`g_j` = inward edge normals) and the expansive velocity
//! program (`g_j` = pair-rate rows in whitened joint coordinates).

use nalgebra::{DMatrix, DVector, Vector3};

use crate::geom::UnitVector;

/// Result of the minimum-norm-point computation.
#[derive(Debug, Clone)]
pub struct MinNormPoint {
    pub point: DVector<f64>,
    /// Convex weights `(index, weight)` of the active points.
    pub weights: Vec<(usize, f64)>,
}

/// Optimal value and direction of the maximin program.
#[derive(Debug, Clone)]
pub struct Maximin {
    /// `min_j <g_j, y>` attained by `direction`; never negative, because the
    /// origin is always feasible.
    pub value: f64,
    /// Unit optimizer; `None` when the origin lies in the hull (value 0).
    pub direction: Option<DVector<f64>>,
}

const OPTIMALITY: f64 = 1e-15;
const WEIGHT_FLOOR: f64 = 1e-13;

/// Minimum-norm point of `conv(points)` by Wolfe's method.
///
/// # Panics
/// If `points` is empty or the points disagree in dimension.
pub fn min_norm_point(points: &[DVector<f64>]) -> MinNormPoint {
    assert!(!points.is_empty(), "min_norm_point needs at least one point");
    let dim = points[0].len();
    assert!(points.iter().all(|p| p.len() == dim));

    let scale = points
        .iter()
        .map(|p| p.norm_squared())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let first = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .unwrap();
    let mut active = vec![first];
    let mut weights = vec![1.0];
    let mut x = points[first].clone();

    let max_major = 100 + 20 * points.len();
    for _ in 0..max_major {
        let xx = x.norm_squared();
        let (j, xpj) = (0..points.len())
            .map(|k| (k, x.dot(&points[k])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xpj >= xx - OPTIMALITY * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        weights.push(0.0);

        // Minor cycle: move toward the affine minimizer of the active set,
        // dropping points whose weight hits zero.
        loop {
            let Some(v) = affine_minimizer(points, &active) else {
                // Affinely dependent active set; drop the newest point.
                active.pop();
                weights.pop();
                break;
            };
            if v.iter().all(|&vi| vi > WEIGHT_FLOOR) {
                weights = v;
                x = combine(points, &active, &weights);
                break;
            }
            let mut theta = f64::INFINITY;
            let mut blocking = 0;
            for (i, (&wi, &vi)) in weights.iter().zip(&v).enumerate() {
                if vi <= WEIGHT_FLOOR {
                    let t = if wi - vi > 0.0 { wi / (wi - vi) } else { 0.0 };
                    if t < theta {
                        theta = t;
                        blocking = i;
                    }
                }
            }
            let theta = theta.min(1.0);
            for (wi, vi) in weights.iter_mut().zip(&v) {
                *wi = theta * vi + (1.0 - theta) * *wi;
            }
            weights[blocking] = 0.0;
            let mut i = 0;
            while i < active.len() {
                if weights[i] <= WEIGHT_FLOOR {
                    active.swap_remove(i);
                    weights.swap_remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            x = combine(points, &active, &weights);
            if active.len() == 1 {
                break;
            }
        }
    }

    MinNormPoint {
        point: x,
        weights: active.into_iter().zip(weights).collect(),
    }
}

fn combine(points: &[DVector<f64>], active: &[usize], weights: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(points[0].len());
    for (&i, &w) in active.iter().zip(weights) {
        x.axpy(w, &points[i], 1.0);
    }
    x
}

/// Weights `v` (summing to one) minimizing `‖Σ v_i p_i‖` over the affine hull
/// of the active points, solved as least squares around the first point.
fn affine_minimizer(points: &[DVector<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let base = &points[active[0]];
    let k = active.len() - 1;
    if k == 0 {
        return Some(vec![1.0]);
    }
    let dim = base.len();
    let mut d = DMatrix::zeros(dim, k);
    for (col, &i) in active[1..].iter().enumerate() {
        d.set_column(col, &(&points[i] - base));
    }
    let svd = d.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax.max(1e-300) {
        return None;
    }
    let mut c = svd.solve(&(-base), 0.0).ok()?;
    // The minimizer can be a tiny difference of unit-size points; refine so
    // that it is orthogonal to the affine hull to working precision.
    for _ in 0..2 {
        let x = base + &d * &c;
        c -= svd.solve(&x, 0.0).ok()?;
    }
    let mut v = Vec::with_capacity(k + 1);
    v.push(1.0 - c.sum());
    v.extend(c.iter().copied());
    Some(v)
}

/// Solve the maximin program for the rows `g_j`.
pub fn maximin(rows: &[DVector<f64>]) -> Maximin {
    let mnp = min_norm_point(rows);
    let norm = mnp.point.norm();
    if norm <= 1e-300 {
        return Maximin {
            value: 0.0,
            direction: None,
        };
    }
    let y = mnp.point / norm;
    let value = rows
        .iter()
        .map(|g| g.dot(&y))
        .fold(f64::INFINITY, f64::min);
    if value > 0.0 {
        Maximin {
            value,
            direction: Some(y),
        }
    } else {
        Maximin {
            value: 0.0,
            direction: None,
        }
    }
}

/// Three-dimensional convenience wrapper returning a point on the sphere.
pub fn maximin_sphere(rows: &[Vector3<f64>]) -> (f64, Option<UnitVector>) {
    let rows: Vec<DVector<f64>> = rows
        .iter()
        .map(|r| DVector::from_column_slice(r.as_slice()))
        .collect();
    let sol = maximin(&rows);
    let dir = sol
        .direction
        .and_then(|y| UnitVector::new(y[0], y[1], y[2]));
    (sol.value, dir)
}

//! Separating great circles and belts.
//!
//! The poles of the circles in a nice class `N_k` form a single convex cell of
//! the arrangement of the vertex dual circles (up to the antipodal map): the
//! sign of `<q, p_j>` is constant along the chain, except for one flip between
//! `p_{k-1}` and `p_k` when `k >= 1`. The largest inscribed circle of that
//! cell, of diameter `w`, gives a belt of width `w` around the dual of its
//! center that contains no vertex and meets no edge other than `e_k`.

use std::f64::consts::TAU;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::chain::SphericalChain;
use crate::error::{Error, Result};
use crate::geom::{arc_distance_to_circle, ConvexSphericalPolygon, GreatCircle, UnitVector};
use crate::maximin::maximin_sphere;
use crate::measure::crossing_count_by_pole;
use crate::tolerance::EPS_BELT;

/// Slack for vertex and edge clearance checks in [`certify_belt`].
const CLEARANCE_TOL: f64 = 1e-12;

/// The region within `width / 2` of a great circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belt {
    pub median: GreatCircle,
    pub width: f64,
    /// The one edge allowed to pass through the belt.
    pub crossing_edge: Option<usize>,
}

impl Belt {
    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }

    /// Strictly inside the belt.
    pub fn contains(&self, x: &UnitVector) -> bool {
        self.median.signed_distance(x).abs() < self.half_width()
    }
}

/// A separating circle and its belt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    /// `k >= 1` if the median crosses `e_k`, `0` if it avoids the chain.
    pub edge_index: usize,
    pub belt: Belt,
    /// Vertex index ranges `p[0..k]` and `p[k..=n]`.
    pub subchains: [Range<usize>; 2],
    /// Center of the inscribed circle of the nice cell. For `k >= 1` the
    /// first subchain lies on its positive side and the second on its
    /// negative side; for `k = 0` the whole chain is on the positive side.
    pub pole_witness: UnitVector,
    /// Exact measure of the chosen class.
    pub class_measure: f64,
}

/// Width guaranteed for the best belt: `(2pi - alpha) / (n + 2)`.
pub fn belt_width_bound(n: usize, alpha: f64) -> f64 {
    (TAU - alpha) / (n as f64 + 2.0)
}

fn cell_normals(chain: &SphericalChain, k: usize) -> Vec<UnitVector> {
    chain
        .vertices()
        .iter()
        .enumerate()
        .map(|(j, p)| if k >= 1 && j >= k { -*p } else { *p })
        .collect()
}

/// The cell of poles of `N_k` on which `<q, p_0>` is positive.
pub fn nice_cell(chain: &SphericalChain, k: usize) -> Result<ConvexSphericalPolygon> {
    if k > chain.n() {
        return Err(Error::InvalidInput(format!(
            "class {k} out of range for {} edges",
            chain.n()
        )));
    }
    ConvexSphericalPolygon::from_halfspaces(&cell_normals(chain, k))
}

/// Exact measures of `N_0 ..= N_n`, computed as cell areas.
pub fn class_measures(chain: &SphericalChain) -> Vec<f64> {
    (0..=chain.n())
        .map(|k| nice_cell(chain, k).map(|c| c.area()).unwrap_or(0.0))
        .collect()
}

/// The cell of the class of `seed_pole` that contains it.
pub fn dual_nice_region(
    chain: &SphericalChain,
    k: usize,
    seed_pole: &UnitVector,
) -> Result<ConvexSphericalPolygon> {
    let cc = crossing_count_by_pole(seed_pole, chain.vertices());
    if cc.degenerate || cc.nice_class != Some(k) {
        return Err(Error::InvalidInput(format!(
            "seed pole is not in the interior of class N_{k} (crosses {} edges)",
            cc.count
        )));
    }
    let cell = nice_cell(chain, k)?;
    if cell.contains(seed_pole, 0.0) {
        Ok(cell)
    } else {
        let flipped: Vec<UnitVector> = cell_normals(chain, k).into_iter().map(|n| -n).collect();
        ConvexSphericalPolygon::from_halfspaces(&flipped)
    }
}

/// A failed belt check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BeltViolation {
    /// Vertex strictly inside the belt.
    Vertex { index: usize, distance: f64 },
    /// Edge other than the crossing edge entering the belt.
    Edge { index: usize, distance: f64 },
    /// The declared crossing edge does not cross the median.
    MissingCrossing { index: usize },
}

/// Check every vertex and edge against the belt.
pub fn certify_belt(chain: &SphericalChain, belt: &Belt) -> Vec<BeltViolation> {
    let pole = belt.median.pole();
    let ell = belt.half_width();
    let mut out = Vec::new();
    for (j, p) in chain.vertices().iter().enumerate() {
        let d = belt.median.signed_distance(p).abs();
        if d < ell - CLEARANCE_TOL || (ell == 0.0 && d == 0.0) {
            out.push(BeltViolation::Vertex {
                index: j,
                distance: d,
            });
        }
    }
    for i in 1..=chain.n() {
        let Ok(e) = chain.edge(i) else { continue };
        let d = arc_distance_to_circle(&pole, &e);
        if Some(i) == belt.crossing_edge {
            if d > 0.0 {
                out.push(BeltViolation::MissingCrossing { index: i });
            }
        } else if d < ell - CLEARANCE_TOL || d == 0.0 {
            out.push(BeltViolation::Edge {
                index: i,
                distance: d,
            });
        }
    }
    out
}

fn belt_for_class(chain: &SphericalChain, k: usize) -> Option<(Belt, UnitVector)> {
    let rows: Vec<_> = cell_normals(chain, k).iter().map(|n| *n.as_vector()).collect();
    let (t, center) = maximin_sphere(&rows);
    let center = center?;
    let belt = Belt {
        median: GreatCircle::from_pole(center),
        width: 2.0 * t.min(1.0).asin(),
        crossing_edge: (k >= 1).then_some(k),
    };
    Some((belt, center))
}

/// Find an edge and a belt crossing only that edge, of width at least
/// [`belt_width_bound`] up to `EPS_BELT`.
///
/// Classes are tried in order of decreasing exact measure (lowest index on
/// ties); a hemispherical chain tries `N_0` first.
pub fn find_separation(chain: &SphericalChain) -> Result<SeparationResult> {
    let n = chain.n();
    let alpha = chain.total_length();
    let bound = belt_width_bound(n, alpha);
    let measures = class_measures(chain);
    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&a, &b| measures[b].total_cmp(&measures[a]).then(a.cmp(&b)));
    if chain.is_hemispherical() {
        order.retain(|&k| k != 0);
        order.insert(0, 0);
    }

    let mut best_width = 0.0_f64;
    for k in order {
        if measures[k] <= 0.0 {
            continue;
        }
        let Some((belt, center)) = belt_for_class(chain, k) else {
            continue;
        };
        best_width = best_width.max(belt.width);
        if belt.width < bound - EPS_BELT {
            log::debug!("class N_{k}: belt width {} below bound {bound}", belt.width);
            continue;
        }
        let violations = certify_belt(chain, &belt);
        if !violations.is_empty() {
            return Err(Error::invariant(format!(
                "belt for class N_{k} failed certification: {violations:?} on chain {:?}",
                chain.vertices()
            )));
        }
        return Ok(SeparationResult {
            edge_index: k,
            belt,
            subchains: [0..k, k..n + 1],
            pole_witness: center,
            class_measure: measures[k],
        });
    }
    Err(Error::invariant(format!(
        "no nice class admits a belt of width {bound} (best {best_width}) on chain {:?}",
        chain.vertices()
    )))
}

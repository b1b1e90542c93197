#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use sphfold::geom::Arc;
use sphfold::UnitVector;

prop_compose! {
    pub fn unit_vector()(z in -1.0f64..1.0, lon in 0.0..TAU) -> UnitVector {
        let r = (1.0 - z * z).sqrt();
        UnitVector::new(r * lon.cos(), r * lon.sin(), z).unwrap()
    }
}

prop_compose! {
    /// Arc from `a` of length `len` in a random direction.
    pub fn short_arc()(a in unit_vector(), d in unit_vector(), len in 0.01..PI - 0.01) -> Option<Arc> {
        let axis = UnitVector::from_vector(a.cross(&d))?;
        Arc::new(a, a.rotated(&axis, len)).ok()
    }
}

/// Geodesic walk with the given lengths and deflections (0 = straight on,
/// pi = fold back).
pub fn walk(start: UnitVector, heading: UnitVector, lengths: &[f64], deflections: &[f64]) -> Option<Vec<UnitVector>> {
    let mut p = start;
    let mut axis = UnitVector::from_vector(start.cross(&heading))?;
    let mut out = vec![p];
    for (k, &len) in lengths.iter().enumerate() {
        if k > 0 {
            axis = axis.rotated(&p, deflections[k - 1]);
        }
        p = p.rotated(&axis, len);
        out.push(p);
    }
    Some(out)
}

/// Closest approach of `e2` to `e1`, from 10^4 samples along `e1` with each
/// sign change of the signed distance to `e2`'s circle refined by bisection.
fn sampled_approach(e1: &Arc, e2: &Arc) -> f64 {
    const SAMPLES: usize = 10_000;
    let n = e2.normal();
    let side = |t: f64| e1.point_at(t).as_vector().dot(&n);
    let mut best = f64::INFINITY;
    let mut prev = side(0.0);
    for k in 0..=SAMPLES {
        let t = k as f64 / SAMPLES as f64;
        best = best.min(e2.distance_to(&e1.point_at(t)));
        let s = side(t);
        if k > 0 && (s > 0.0) != (prev > 0.0) {
            let (mut lo, mut hi) = ((k - 1) as f64 / SAMPLES as f64, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (side(mid) > 0.0) == (prev > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            best = best.min(e2.distance_to(&e1.point_at(0.5 * (lo + hi))));
        }
        prev = s;
    }
    best
}

/// Distance between two arcs by dense sampling, symmetric.
pub fn dense_arc_distance(e1: &Arc, e2: &Arc) -> f64 {
    sampled_approach(e1, e2).min(sampled_approach(e2, e1))
}

use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::circle::GreatCircle;
use super::polygon::vertex_angle;
use super::vector::{slerp, spherical_distance, UnitVector};
use crate::error::{Error, Result};
use crate::tolerance::EPS_GEOM;

/// A short great-circle arc (length strictly below pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    a: UnitVector,
    b: UnitVector,
}

impl Arc {
    /// Short arc from `a` to `b`. Rejects coincident and antipodal endpoints,
    /// whose geodesic is not unique.
    pub fn new(a: UnitVector, b: UnitVector) -> Result<Self> {
        if a.cross(&b).norm() < 1e-14 {
            return Err(Error::Degenerate(format!(
                "arc endpoints {a:?} and {b:?} are coincident or antipodal"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> UnitVector {
        self.a
    }

    pub fn b(&self) -> UnitVector {
        self.b
    }

    pub fn length(&self) -> f64 {
        spherical_distance(&self.a, &self.b)
    }

    /// Unit normal `a × b / ‖a × b‖` of the supporting plane.
    pub fn normal(&self) -> Vector3<f64> {
        self.a.cross(&self.b).normalize()
    }

    pub fn supporting_circle(&self) -> GreatCircle {
        GreatCircle::from_pole(UnitVector::renormalized(self.normal()))
    }

    /// Point at fraction `s ∈ [0, 1]` of the way from `a` to `b`.
    pub fn point_at(&self, s: f64) -> UnitVector {
        slerp(&self.a, &self.b, s)
    }

    pub fn midpoint(&self) -> UnitVector {
        self.point_at(0.5)
    }

    /// Whether a point already known to lie on the supporting circle falls
    /// within the closed arc, up to `tol` in sine of the overshoot angle.
    fn spans(&self, x: &UnitVector, tol: f64) -> bool {
        let n = self.normal();
        self.a.cross(x).dot(&n) >= -tol && x.cross(&self.b).dot(&n) >= -tol
    }

    /// Angular distance from `x` to the closest point of the closed arc.
    pub fn distance_to(&self, x: &UnitVector) -> f64 {
        let n = self.normal();
        let off = x.as_vector().dot(&n);
        let proj = x.as_vector() - n * off;
        if proj.norm() > 1e-15 {
            let foot = UnitVector::renormalized(proj);
            if self.spans(&foot, 0.0) {
                return off.abs().clamp(0.0, 1.0).asin();
            }
        }
        x.distance(&self.a).min(x.distance(&self.b))
    }
}

/// Outcome of testing a great circle against a short arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleArcCrossing {
    /// The endpoints lie strictly on opposite sides.
    Transversal,
    /// Both endpoints strictly on one side.
    Disjoint,
    /// An endpoint lies within `EPS_GEOM` of the circle.
    Degenerate,
}

impl CircleArcCrossing {
    pub fn crosses(self) -> bool {
        self == CircleArcCrossing::Transversal
    }
}

/// Does the great circle `c` cross the open arc `e`?
pub fn circle_crosses_arc(c: &GreatCircle, e: &Arc) -> CircleArcCrossing {
    crossing_by_pole(&c.pole(), e)
}

pub(crate) fn crossing_by_pole(pole: &UnitVector, e: &Arc) -> CircleArcCrossing {
    let sa = pole.dot(&e.a);
    let sb = pole.dot(&e.b);
    if sa.abs() < EPS_GEOM || sb.abs() < EPS_GEOM {
        CircleArcCrossing::Degenerate
    } else if (sa > 0.0) != (sb > 0.0) {
        CircleArcCrossing::Transversal
    } else {
        CircleArcCrossing::Disjoint
    }
}

/// How two closed short arcs meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcContact {
    Disjoint,
    /// The arcs meet at exactly one point that is an endpoint of both.
    SharedEndpoint(UnitVector),
    /// The arcs meet at a single point that is not a common endpoint.
    Crossing(UnitVector),
    /// The arcs lie on one great circle and share a sub-arc of positive length.
    Overlap,
}

impl ArcContact {
    pub fn touches(&self) -> bool {
        !matches!(self, ArcContact::Disjoint)
    }
}

/// True iff the closed arcs share at least one point.
pub fn arcs_intersect(e1: &Arc, e2: &Arc) -> bool {
    arc_contact(e1, e2).touches()
}

const COPLANAR: f64 = 1e-12;

/// Classify the contact between two closed short arcs.
pub fn arc_contact(e1: &Arc, e2: &Arc) -> ArcContact {
    if let Some(contact) = contact_at_shared_endpoint(e1, e2) {
        return contact;
    }
    let n1 = e1.normal();
    let n2 = e2.normal();
    let line = n1.cross(&n2);
    if line.norm() < COPLANAR {
        return collinear_contact(e1, e2, &n1);
    }
    let x = UnitVector::renormalized(line);
    for cand in [x, -x] {
        if e1.spans(&cand, EPS_GEOM) && e2.spans(&cand, EPS_GEOM) {
            return classify_point(e1, e2, cand);
        }
    }
    ArcContact::Disjoint
}

/// Two short arcs from a common endpoint meet only there, unless they leave
/// it in the same direction. Deciding this from the angle at the shared point
/// stays accurate when the arcs are nearly collinear, where intersecting the
/// supporting circles is ill-conditioned.
fn contact_at_shared_endpoint(e1: &Arc, e2: &Arc) -> Option<ArcContact> {
    let same = |p: &UnitVector, q: &UnitVector| p.distance(q) < 1e-12;
    let (s, o1, o2) = if same(&e1.a, &e2.a) {
        (e1.a, e1.b, e2.b)
    } else if same(&e1.a, &e2.b) {
        (e1.a, e1.b, e2.a)
    } else if same(&e1.b, &e2.a) {
        (e1.b, e1.a, e2.b)
    } else if same(&e1.b, &e2.b) {
        (e1.b, e1.a, e2.a)
    } else {
        return None;
    };
    if same(&o1, &o2) || vertex_angle(&o1, &s, &o2) <= EPS_GEOM {
        Some(ArcContact::Overlap)
    } else {
        Some(ArcContact::SharedEndpoint(s))
    }
}

fn classify_point(e1: &Arc, e2: &Arc, x: UnitVector) -> ArcContact {
    let near = |p: &UnitVector| p.distance(&x) < 1e-9;
    let shared = (near(&e1.a) || near(&e1.b)) && (near(&e2.a) || near(&e2.b));
    if shared {
        ArcContact::SharedEndpoint(x)
    } else {
        ArcContact::Crossing(x)
    }
}

/// Arcs on a common great circle: compare angular parameter intervals.
fn collinear_contact(e1: &Arc, e2: &Arc, n1: &Vector3<f64>) -> ArcContact {
    let u = e1.a.as_vector();
    let w = n1.cross(u);
    let theta = |p: &UnitVector| {
        let t = p.as_vector().dot(&w).atan2(p.as_vector().dot(u));
        if t < 0.0 {
            t + TAU
        } else {
            t
        }
    };
    let len1 = e1.length();
    let len2 = e2.length();
    let same_orientation = e2.normal().dot(n1) > 0.0;
    let start2 = if same_orientation {
        theta(&e2.a)
    } else {
        theta(&e2.b)
    };

    // Best overlap of [0, len1] with [start2 + k*2pi, start2 + len2 + k*2pi].
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0.0;
    for shift in [-TAU, 0.0, TAU] {
        let lo = start2 + shift;
        let hi = lo + len2;
        let overlap = hi.min(len1) - lo.max(0.0);
        if overlap > best {
            best = overlap;
            best_at = lo.max(0.0);
        }
    }
    let tol = 1e-9;
    if best > tol {
        ArcContact::Overlap
    } else if best >= -tol {
        let x = UnitVector::renormalized(u * best_at.cos() + w * best_at.sin());
        classify_point(e1, e2, x)
    } else {
        ArcContact::Disjoint
    }
}

/// Signed angular distance from `x` to the great circle with pole `pole`.
pub fn signed_distance_to_pole_circle(pole: &UnitVector, x: &UnitVector) -> f64 {
    pole.dot(x).clamp(-1.0, 1.0).asin()
}

/// Smallest |signed distance| from the closed arc to the circle with `pole`,
/// or zero when the arc crosses it.
pub fn arc_distance_to_circle(pole: &UnitVector, e: &Arc) -> f64 {
    let sa = pole.dot(&e.a);
    let sb = pole.dot(&e.b);
    if (sa > 0.0) != (sb > 0.0) || sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    // For a short arc with both ends on one side, the normalized convex
    // combination never gets closer to the circle than the nearer endpoint.
    sa.abs().min(sb.abs()).min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn eq(lon0: f64, lon1: f64) -> Arc {
        Arc::new(
            UnitVector::from_lat_lon(0.0, lon0),
            UnitVector::from_lat_lon(0.0, lon1),
        )
        .unwrap()
    }

    #[test]
    fn meridian_crosses_equatorial_arc() {
        let c = GreatCircle::meridian(FRAC_PI_4);
        assert_eq!(
            circle_crosses_arc(&c, &eq(0.0, FRAC_PI_2)),
            CircleArcCrossing::Transversal
        );
    }

    #[test]
    fn equator_misses_northern_arc() {
        let arc = Arc::new(
            UnitVector::from_lat_lon(0.3, 0.0),
            UnitVector::from_lat_lon(0.5, 1.0),
        )
        .unwrap();
        assert_eq!(
            circle_crosses_arc(&GreatCircle::equator(), &arc),
            CircleArcCrossing::Disjoint
        );
    }

    #[test]
    fn circle_through_endpoint_is_degenerate() {
        let c = GreatCircle::meridian(0.0);
        assert_eq!(
            circle_crosses_arc(&c, &eq(0.0, FRAC_PI_2)),
            CircleArcCrossing::Degenerate
        );
    }

    #[test]
    fn equator_and_meridian_cross_at_lon_45() {
        let m = Arc::new(
            UnitVector::from_lat_lon(-FRAC_PI_4, FRAC_PI_4),
            UnitVector::from_lat_lon(FRAC_PI_4, FRAC_PI_4),
        )
        .unwrap();
        match arc_contact(&eq(0.0, FRAC_PI_2), &m) {
            ArcContact::Crossing(x) => {
                assert!(x.latitude().abs() < 1e-12);
                assert!((x.longitude() - FRAC_PI_4).abs() < 1e-12);
            }
            other => panic!("expected crossing, got {other:?}"),
        }
    }

    #[test]
    fn arcs_in_disjoint_octants() {
        let a = Arc::new(
            UnitVector::new(1.0, 0.2, 0.2).unwrap(),
            UnitVector::new(0.8, 0.5, 0.3).unwrap(),
        )
        .unwrap();
        let b = Arc::new(
            UnitVector::new(-1.0, -0.2, -0.2).unwrap(),
            UnitVector::new(-0.8, -0.5, -0.3).unwrap(),
        )
        .unwrap();
        assert!(!arcs_intersect(&a, &b));
    }

    #[test]
    fn overlapping_equatorial_arcs() {
        assert_eq!(arc_contact(&eq(0.0, FRAC_PI_2), &eq(FRAC_PI_4, 3.0 * FRAC_PI_4)), ArcContact::Overlap);
        // reversed orientation overlaps too
        assert_eq!(arc_contact(&eq(0.0, FRAC_PI_2), &eq(3.0 * FRAC_PI_4, FRAC_PI_4)), ArcContact::Overlap);
    }

    #[test]
    fn collinear_adjacent_arcs_share_endpoint() {
        let c = arc_contact(&eq(0.0, 1.0), &eq(1.0, 2.0));
        assert!(matches!(c, ArcContact::SharedEndpoint(_)), "{c:?}");
        // doubling back over the shared vertex overlaps
        assert_eq!(arc_contact(&eq(0.0, 1.0), &eq(1.0, 0.5)), ArcContact::Overlap);
        // disjoint on the same circle
        assert_eq!(arc_contact(&eq(0.0, 1.0), &eq(1.5, 2.5)), ArcContact::Disjoint);
        // wrap-around across longitude pi
        assert_eq!(arc_contact(&eq(3.0, 3.5), &eq(-2.9, -2.5)), ArcContact::Overlap);
    }

    #[test]
    fn adjacent_bent_arcs_share_endpoint() {
        let p = UnitVector::from_lat_lon(0.0, 0.0);
        let a = Arc::new(UnitVector::from_lat_lon(0.0, -1.0), p).unwrap();
        let b = Arc::new(p, UnitVector::from_lat_lon(1.0, 0.0)).unwrap();
        assert!(matches!(arc_contact(&a, &b), ArcContact::SharedEndpoint(_)));
    }

    #[test]
    fn t_junction_is_a_crossing() {
        let a = eq(-0.5, 0.5);
        let b = Arc::new(UnitVector::from_lat_lon(0.0, 0.0), UnitVector::from_lat_lon(1.0, 0.0)).unwrap();
        assert!(matches!(arc_contact(&a, &b), ArcContact::Crossing(_)));
    }

    #[test]
    fn distance_to_arc() {
        let e = eq(0.0, 1.0);
        assert!((e.distance_to(&UnitVector::from_lat_lon(0.2, 0.5)) - 0.2).abs() < 1e-14);
        assert!((e.distance_to(&UnitVector::from_lat_lon(0.0, 1.3)) - 0.3).abs() < 1e-14);
        assert!((e.distance_to(&UnitVector::z_axis()) - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_arcs() {
        let x = UnitVector::x_axis();
        assert!(Arc::new(x, x).is_err());
        assert!(Arc::new(x, -x).is_err());
    }
}

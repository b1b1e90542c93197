//! Spherical geometry primitives: points, great circles, short arcs, lunes,
//! convex spherical polygons and point/circle polar duality.
//!
//! All operations are pure functions of immutable values.

mod arc;
mod circle;
mod polygon;
mod vector;

pub use arc::{
    arc_contact, arc_distance_to_circle, arcs_intersect, circle_crosses_arc,
    signed_distance_to_pole_circle, Arc, ArcContact, CircleArcCrossing,
};
pub use circle::{dual_circle, dual_pole, lune_area, GreatCircle, Lune};
pub use polygon::{max_inscribed_circle, vertex_angle, ConvexSphericalPolygon, InscribedCircle};
pub use vector::{slerp, spherical_distance, UnitVector};

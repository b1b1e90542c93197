use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::arc::Arc;
use super::vector::UnitVector;
use crate::error::{Error, Result};

/// A great circle, identified with its pair of antipodal poles.
///
/// The stored pole is the representative whose `(z, y, x)` tuple is
/// lexicographically larger, which makes the circle-to-pole map a function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreatCircle {
    pole: UnitVector,
}

fn canonical(p: UnitVector) -> UnitVector {
    let a = (p.z(), p.y(), p.x());
    let b = (-p.z(), -p.y(), -p.x());
    if a >= b {
        p
    } else {
        -p
    }
}

impl GreatCircle {
    pub fn from_pole(pole: UnitVector) -> Self {
        Self {
            pole: canonical(pole),
        }
    }

    /// The circle through two distinct, non-antipodal points.
    pub fn through(a: &UnitVector, b: &UnitVector) -> Option<Self> {
        let n = a.cross(b);
        if n.norm() <= 1e-15 {
            return None;
        }
        UnitVector::from_vector(n).map(Self::from_pole)
    }

    /// The equator `z = 0`.
    pub fn equator() -> Self {
        Self::from_pole(UnitVector::z_axis())
    }

    /// Meridian at longitude `lon` (radians).
    pub fn meridian(lon: f64) -> Self {
        Self::from_pole(UnitVector::from_lat_lon(0.0, lon + PI / 2.0))
    }

    /// The canonical pole.
    pub fn pole(&self) -> UnitVector {
        self.pole
    }

    /// Signed angular distance of `p` from the circle, positive on the side of
    /// the canonical pole.
    pub fn signed_distance(&self, p: &UnitVector) -> f64 {
        self.pole.dot(p).clamp(-1.0, 1.0).asin()
    }

    /// True when both poles agree up to antipode within `tol`.
    pub fn approx_eq(&self, other: &GreatCircle, tol: f64) -> bool {
        self.pole.cross(&other.pole).norm() <= tol
    }
}

/// Polar duality: a great circle goes to its (canonical) pole.
pub fn dual_pole(c: &GreatCircle) -> UnitVector {
    c.pole()
}

/// Polar duality: a point goes to the great circle it is a pole of.
pub fn dual_circle(p: &UnitVector) -> GreatCircle {
    GreatCircle::from_pole(*p)
}

/// Area of a lune spanning `span` radians on its orthogonal great circle.
pub fn lune_area(span: f64) -> Result<f64> {
    if !(span > 0.0 && span < PI) {
        return Err(Error::InvalidInput(format!(
            "lune span {span} outside (0, pi)"
        )));
    }
    Ok(2.0 * span)
}

/// A spherical digon bounded by two great circles.
///
/// Stored as two inward normals, so the open lune is
/// `{q : <q, n0> > 0, <q, n1> > 0}`; its antipodal copy is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lune {
    normals: [UnitVector; 2],
    span: f64,
}

impl Lune {
    /// Lune bounded by two half-spaces with the given inward normals.
    pub fn from_normals(n0: UnitVector, n1: UnitVector) -> Result<Self> {
        // The interior angle is pi minus the angle between inward normals.
        let span = PI - n0.distance(&n1);
        if !(span > 0.0 && span < PI) {
            return Err(Error::Degenerate(format!("lune span {span} outside (0, pi)")));
        }
        Ok(Self {
            normals: [n0, n1],
            span,
        })
    }

    /// The dual lune of a short arc: poles of the great circles that cross it.
    ///
    /// Returns the copy where `<q, a> > 0 > <q, b>`.
    pub fn dual_of_arc(arc: &Arc) -> Result<Self> {
        Self::from_normals(arc.a(), -arc.b())
    }

    pub fn normals(&self) -> [UnitVector; 2] {
        self.normals
    }

    pub fn boundary_circles(&self) -> [GreatCircle; 2] {
        [
            GreatCircle::from_pole(self.normals[0]),
            GreatCircle::from_pole(self.normals[1]),
        ]
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn area(&self) -> f64 {
        2.0 * self.span
    }

    /// Membership in the open lune or its antipodal copy.
    pub fn contains_either(&self, q: &UnitVector) -> bool {
        let s0 = self.normals[0].dot(q);
        let s1 = self.normals[1].dot(q);
        (s0 > 0.0 && s1 > 0.0) || (s0 < 0.0 && s1 < 0.0)
    }
}

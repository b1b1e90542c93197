use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::vector::UnitVector;
use crate::error::{Error, Result};
use crate::maximin::maximin_sphere;

const TIGHT: f64 = 1e-10;

/// A spherically convex polygon, kept in both representations: the inward
/// unit normals of its edges and its cyclically ordered vertices.
///
/// Lunes (two antipodal vertices) are accepted as the one unbounded-looking
/// case that still has a proper interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexSphericalPolygon {
    normals: Vec<UnitVector>,
    vertices: Vec<UnitVector>,
}

/// Largest circle inside a convex polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InscribedCircle {
    pub center: UnitVector,
    /// Angular diameter in radians.
    pub diameter: f64,
}

/// Interior angle at `v` between the geodesics to `a` and `b`, in [0, pi].
pub fn vertex_angle(a: &UnitVector, v: &UnitVector, b: &UnitVector) -> f64 {
    let u = v.cross(a);
    let w = v.cross(b);
    u.cross(&w).norm().atan2(u.dot(&w))
}

impl ConvexSphericalPolygon {
    /// Intersection of the closed hemispheres `{x : <x, n> >= 0}`.
    ///
    /// Redundant normals are discarded. Fails when the intersection has empty
    /// interior or is not bounded by at least two distinct great circles.
    pub fn from_halfspaces(normals: &[UnitVector]) -> Result<Self> {
        if normals.len() < 2 {
            return Err(Error::Degenerate("need at least two half-spaces".into()));
        }
        let rows: Vec<Vector3<f64>> = normals.iter().map(|n| *n.as_vector()).collect();
        let (depth, center) = maximin_sphere(&rows);
        let center = center
            .filter(|_| depth > 1e-13)
            .ok_or_else(|| Error::Degenerate("half-space intersection has empty interior".into()))?;

        let mut distinct: Vec<UnitVector> = Vec::new();
        for n in normals {
            if !distinct.iter().any(|m| m.distance(n) < 1e-12) {
                distinct.push(*n);
            }
        }

        let mut verts: Vec<UnitVector> = Vec::new();
        for i in 0..distinct.len() {
            for j in i + 1..distinct.len() {
                let Some(x) = UnitVector::from_vector(distinct[i].cross(&distinct[j])) else {
                    continue;
                };
                if distinct[i].cross(&distinct[j]).norm() < 1e-12 {
                    continue;
                }
                for cand in [x, -x] {
                    let feasible = distinct.iter().all(|n| n.dot(&cand) >= -TIGHT);
                    if feasible && !verts.iter().any(|v| v.distance(&cand) < 1e-9) {
                        verts.push(cand);
                    }
                }
            }
        }

        let facets: Vec<UnitVector> = distinct
            .into_iter()
            .filter(|n| verts.iter().filter(|v| n.dot(v).abs() <= TIGHT).count() >= 2)
            .collect();
        if facets.len() < 2 || verts.len() < 2 {
            return Err(Error::Degenerate(
                "half-space intersection is not a bounded polygon".into(),
            ));
        }
        let vertices = order_around(&center, verts);
        Ok(Self {
            normals: facets,
            vertices,
        })
    }

    /// Polygon from cyclically ordered vertices (either orientation).
    pub fn from_vertices(vertices: &[UnitVector]) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::Degenerate("a polygon needs at least three vertices".into()));
        }
        let mut normals = Vec::with_capacity(m);
        for i in 0..m {
            let (a, b) = (vertices[i], vertices[(i + 1) % m]);
            let n = UnitVector::from_vector(a.cross(&b))
                .filter(|_| a.cross(&b).norm() > 1e-14)
                .ok_or_else(|| Error::Degenerate(format!("edge {i} has coincident endpoints")))?;
            normals.push(n);
        }
        let orientation = {
            let v = vertices[2 % m];
            if normals[0].dot(&v) >= 0.0 {
                1.0
            } else {
                -1.0
            }
        };
        for (i, n) in normals.iter_mut().enumerate() {
            if orientation < 0.0 {
                *n = -*n;
            }
            for (j, v) in vertices.iter().enumerate() {
                if j != i && j != (i + 1) % m && n.dot(v) < -TIGHT {
                    return Err(Error::Degenerate(format!(
                        "vertex {j} lies outside the supporting circle of edge {i}: not convex"
                    )));
                }
            }
        }
        let rows: Vec<Vector3<f64>> = vertices.iter().map(|v| *v.as_vector()).collect();
        if maximin_sphere(&rows).0 <= 0.0 {
            return Err(Error::Degenerate(
                "vertices are not contained in an open hemisphere".into(),
            ));
        }
        Self::from_halfspaces(&normals)
    }

    /// Inward unit normals of the edges.
    pub fn normals(&self) -> &[UnitVector] {
        &self.normals
    }

    /// Vertices in counter-clockwise order seen from outside the sphere.
    pub fn vertices(&self) -> &[UnitVector] {
        &self.vertices
    }

    pub fn is_lune(&self) -> bool {
        self.vertices.len() == 2
    }

    /// Closed-set membership with tolerance `tol` on the dot products.
    pub fn contains(&self, q: &UnitVector, tol: f64) -> bool {
        self.normals.iter().all(|n| n.dot(q) >= -tol)
    }

    /// Area by the spherical excess formula.
    pub fn area(&self) -> f64 {
        if self.is_lune() {
            let span = PI - self.normals[0].distance(&self.normals[1]);
            return 2.0 * span;
        }
        let m = self.vertices.len();
        let angle_sum: f64 = (0..m)
            .map(|i| {
                vertex_angle(
                    &self.vertices[(i + m - 1) % m],
                    &self.vertices[i],
                    &self.vertices[(i + 1) % m],
                )
            })
            .sum();
        angle_sum - (m as f64 - 2.0) * PI
    }

    /// Spherical Chebyshev center: the point maximizing the smallest distance
    /// to the edge circles, together with twice that distance.
    pub fn max_inscribed_circle(&self) -> Result<InscribedCircle> {
        max_inscribed_circle(self)
    }
}

/// The largest circle contained in `k`.
pub fn max_inscribed_circle(k: &ConvexSphericalPolygon) -> Result<InscribedCircle> {
    let rows: Vec<Vector3<f64>> = k.normals.iter().map(|n| *n.as_vector()).collect();
    let (value, center) = maximin_sphere(&rows);
    match center {
        Some(center) if value > 0.0 => Ok(InscribedCircle {
            center,
            diameter: 2.0 * value.min(1.0).asin(),
        }),
        _ => Err(Error::Degenerate("polygon has empty interior".into())),
    }
}

fn order_around(center: &UnitVector, mut verts: Vec<UnitVector>) -> Vec<UnitVector> {
    let c = center.as_vector();
    let seed = if c.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (seed - c * c.dot(&seed)).normalize();
    let e2 = c.cross(&e1);
    verts.sort_by(|a, b| {
        let ta = a.as_vector().dot(&e2).atan2(a.as_vector().dot(&e1));
        let tb = b.as_vector().dot(&e2).atan2(b.as_vector().dot(&e1));
        ta.total_cmp(&tb)
    });
    verts
}

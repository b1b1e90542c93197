//! Spherical open chains: the configuration space being unfolded.
//!
//! Edges are numbered from 1 (`e_i` joins `p_{i-1}` and `p_i`); joints are the
//! inner vertices `p_1 ..= p_{n-1}`.

mod random;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{arc_contact, vertex_angle, Arc, ArcContact, UnitVector};
use crate::maximin::maximin_sphere;
use crate::tolerance::{EPS_FLAT, EPS_GEOM, EPS_HEMI, EPS_LENGTH};

pub use random::{random_chain, random_placement};

/// Length class of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthClass {
    /// Total length below pi.
    Short,
    /// Total length in [pi, 2pi).
    Medium,
}

/// Arc lengths of a chain, independent of any placement on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicChain {
    arc_lengths: Vec<f64>,
}

impl IntrinsicChain {
    pub fn new(arc_lengths: Vec<f64>) -> Result<Self> {
        if arc_lengths.is_empty() {
            return Err(Error::InvalidInput("a chain needs at least one edge".into()));
        }
        for (i, &len) in arc_lengths.iter().enumerate() {
            if !(len > 0.0 && len < PI) {
                return Err(Error::ArcLength {
                    index: i + 1,
                    length: len,
                });
            }
        }
        let total: f64 = arc_lengths.iter().sum();
        if total >= TAU {
            return Err(Error::ChainTooLong { total });
        }
        Ok(Self { arc_lengths })
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc_lengths
    }

    /// Number of edges.
    pub fn n(&self) -> usize {
        self.arc_lengths.len()
    }

    pub fn total(&self) -> f64 {
        self.arc_lengths.iter().sum()
    }

    pub fn length_class(&self) -> LengthClass {
        if self.total() < PI {
            LengthClass::Short
        } else {
            LengthClass::Medium
        }
    }
}

/// Build the spherical chain of a single-vertex origami from the sector
/// angles between consecutive creases (and the paper boundary).
///
/// Only a fold vertex on the paper boundary yields an open chain; interior
/// vertices give closed chains, which are out of scope.
pub fn origami_to_chain(sector_angles: &[f64], vertex_on_boundary: bool) -> Result<IntrinsicChain> {
    if !vertex_on_boundary {
        return Err(Error::ClosedChainUnsupported);
    }
    for (i, &a) in sector_angles.iter().enumerate() {
        if a >= PI {
            return Err(Error::SectorTooLarge { index: i, angle: a });
        }
    }
    IntrinsicChain::new(sector_angles.to_vec())
}

/// A placement of an intrinsic chain on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalChain {
    vertices: Vec<UnitVector>,
    intrinsic: IntrinsicChain,
}

/// Qualitative state of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainClass {
    Flat,
    Hemispherical,
    SphereSpanning,
}

/// Joint angles and their sum, the progress measure of the unfolding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressMeasure {
    /// `betas[i - 1]` is the angle at joint `p_i`, in [0, pi].
    pub betas: Vec<f64>,
    pub delta_sum: f64,
    /// Joints where consecutive edges fold back onto each other.
    pub degenerate: Vec<usize>,
}

impl SphericalChain {
    /// Configuration with prescribed arc lengths; vertex distances must match
    /// within `EPS_LENGTH`.
    pub fn new(vertices: Vec<UnitVector>, intrinsic: IntrinsicChain) -> Result<Self> {
        if vertices.len() != intrinsic.n() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} vertices for {} edges",
                vertices.len(),
                intrinsic.n()
            )));
        }
        for (i, &len) in intrinsic.arc_lengths().iter().enumerate() {
            let d = vertices[i].distance(&vertices[i + 1]);
            if (d - len).abs() > EPS_LENGTH {
                return Err(Error::LengthMismatch {
                    edge: i + 1,
                    expected: len,
                    actual: d,
                });
            }
        }
        Ok(Self {
            vertices,
            intrinsic,
        })
    }

    /// Configuration whose arc lengths are read off the vertex positions.
    pub fn from_vertices(vertices: Vec<UnitVector>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a chain needs at least two vertices".into()));
        }
        let lengths = vertices.windows(2).map(|w| w[0].distance(&w[1])).collect();
        let intrinsic = IntrinsicChain::new(lengths)?;
        Ok(Self {
            vertices,
            intrinsic,
        })
    }

    /// Assemble without checking lengths.
    pub(crate) fn from_parts(vertices: Vec<UnitVector>, intrinsic: IntrinsicChain) -> Self {
        Self {
            vertices,
            intrinsic,
        }
    }

    /// Same intrinsic chain, new vertex positions (no length check).
    pub(crate) fn with_vertices(&self, vertices: Vec<UnitVector>) -> Self {
        debug_assert_eq!(vertices.len(), self.vertices.len());
        Self {
            vertices,
            intrinsic: self.intrinsic.clone(),
        }
    }

    pub fn vertices(&self) -> &[UnitVector] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> UnitVector {
        self.vertices[i]
    }

    pub fn intrinsic(&self) -> &IntrinsicChain {
        &self.intrinsic
    }

    pub fn n(&self) -> usize {
        self.intrinsic.n()
    }

    pub fn total_length(&self) -> f64 {
        self.intrinsic.total()
    }

    /// Edge `e_i` for `1 <= i <= n`.
    pub fn edge(&self, i: usize) -> Result<Arc> {
        Arc::new(self.vertices[i - 1], self.vertices[i])
    }

    /// Largest deviation between vertex distances and intrinsic lengths.
    pub fn length_residual(&self) -> f64 {
        self.intrinsic
            .arc_lengths()
            .iter()
            .enumerate()
            .map(|(i, len)| (self.vertices[i].distance(&self.vertices[i + 1]) - len).abs())
            .fold(0.0, f64::max)
    }

    /// Signed turning angle at joint `i` (1-based), in (-pi, pi]: the
    /// right-handed rotation about `p_i` taking the plane of `e_i` to that of
    /// `e_{i+1}`. Its magnitude is the joint angle.
    pub fn joint_turn(&self, i: usize) -> f64 {
        joint_turn(&self.vertices[i - 1], &self.vertices[i], &self.vertices[i + 1])
    }

    /// Joint angle `beta_i` at `p_i`.
    pub fn beta(&self, i: usize) -> f64 {
        vertex_angle(&self.vertices[i - 1], &self.vertices[i], &self.vertices[i + 1])
    }

    /// `max_w min_i <w, p_i>` over the unit ball with its maximizer.
    pub fn hemisphere_margin(&self) -> (f64, Option<UnitVector>) {
        hemisphere_margin(&self.vertices)
    }

    pub fn is_hemispherical(&self) -> bool {
        self.hemisphere_margin().0 > EPS_HEMI
    }

    /// Check the embedding: fails with the first intersecting edge pair.
    pub fn validate(&self) -> Result<()> {
        match first_intersection(self) {
            Some((first, second)) => Err(Error::SelfIntersecting { first, second }),
            None => Ok(()),
        }
    }

    /// Sum of `pi - beta_i` over joints `lo..=hi` (1-based, empty if lo > hi).
    pub fn deficit(&self, lo: usize, hi: usize) -> f64 {
        (lo..=hi).map(|i| PI - self.beta(i)).sum()
    }
}

pub(crate) fn joint_turn(prev: &UnitVector, at: &UnitVector, next: &UnitVector) -> f64 {
    let u = at.cross(prev);
    let w = at.cross(next);
    at.as_vector().dot(&u.cross(&w)).atan2(u.dot(&w))
}

pub(crate) fn hemisphere_margin(points: &[UnitVector]) -> (f64, Option<UnitVector>) {
    let rows: Vec<_> = points.iter().map(|p| *p.as_vector()).collect();
    maximin_sphere(&rows)
}

/// Joint angles of the chain.
pub fn betas(chain: &SphericalChain) -> ProgressMeasure {
    let n = chain.n();
    let mut betas = Vec::with_capacity(n.saturating_sub(1));
    let mut degenerate = Vec::new();
    for i in 1..n {
        let b = chain.beta(i);
        if b < EPS_GEOM {
            degenerate.push(i);
            betas.push(0.0);
        } else {
            betas.push(b);
        }
    }
    let delta_sum = betas.iter().sum();
    ProgressMeasure {
        betas,
        delta_sum,
        degenerate,
    }
}

/// Flat if every joint is straight within `EPS_FLAT`; otherwise hemispherical
/// when the hemisphere margin exceeds `EPS_HEMI`, else sphere-spanning.
pub fn classify(chain: &SphericalChain) -> ChainClass {
    if (1..chain.n()).all(|i| chain.beta(i) >= PI - EPS_FLAT) {
        ChainClass::Flat
    } else if chain.is_hemispherical() {
        ChainClass::Hemispherical
    } else {
        ChainClass::SphereSpanning
    }
}

/// True iff two non-adjacent edges meet, or two adjacent edges meet anywhere
/// besides their shared vertex.
pub fn self_intersects(chain: &SphericalChain) -> bool {
    first_intersection(chain).is_some()
}

/// First offending edge pair `(i, j)`, 1-based with `i < j`.
pub fn first_intersection(chain: &SphericalChain) -> Option<(usize, usize)> {
    first_intersection_of(chain.vertices())
}

pub(crate) fn first_intersection_of(vertices: &[UnitVector]) -> Option<(usize, usize)> {
    let n = vertices.len() - 1;
    let arcs: Vec<Option<Arc>> = (0..n)
        .map(|i| Arc::new(vertices[i], vertices[i + 1]).ok())
        .collect();
    for i in 0..n {
        let Some(ei) = arcs[i] else {
            return Some((i + 1, i + 1));
        };
        for (j, ej) in arcs.iter().enumerate().skip(i + 1) {
            let Some(ej) = ej else { continue };
            let contact = arc_contact(&ei, ej);
            let bad = if j == i + 1 {
                !matches!(contact, ArcContact::SharedEndpoint(_))
            } else {
                contact.touches()
            };
            if bad {
                return Some((i + 1, j + 1));
            }
        }
    }
    None
}

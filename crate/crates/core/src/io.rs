//! Chain and trajectory documents (JSON).
//!
//! A chain document comes in one of two forms:
//!
//! ```json
//! {"schema_version": 1, "chain": {"vertices": [[1, 0, 0], [0, 1, 0]], "arc_lengths": [1.5707963267948966]}}
//! {"schema_version": 1, "origami": {"sector_angles": [90, 90, 90], "vertex_on_boundary": true, "unit": "degrees"}, "seed": 7}
//! ```
//!
//! Angles are stored in radians once parsed. Floats are written in the
//! shortest form that reads back to the same bits.

use std::f64::consts::PI;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chain::{origami_to_chain, random_placement, IntrinsicChain, SphericalChain};
use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::planner::{PhaseRecord, Snapshot, Trajectory, VerificationReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

impl AngleUnit {
    fn to_radians(self, a: f64) -> f64 {
        match self {
            AngleUnit::Radians => a,
            AngleUnit::Degrees => a * PI / 180.0,
        }
    }
}

/// How the chain is given.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainForm {
    /// Explicit placement.
    Chain {
        vertices: Vec<[f64; 3]>,
        arc_lengths: Vec<f64>,
    },
    /// Sector angles of a single-vertex origami, in radians.
    Origami {
        sector_angles: Vec<f64>,
        vertex_on_boundary: bool,
    },
}

/// A parsed, validated chain document.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDocument {
    pub schema_version: u32,
    pub form: ChainForm,
    /// Seeds the placement of origami-form chains.
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChainDocument {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain: Option<RawChainForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origami: Option<RawOrigamiForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChainForm {
    vertices: Vec<[f64; 3]>,
    arc_lengths: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrigamiForm {
    sector_angles: Vec<f64>,
    vertex_on_boundary: bool,
    #[serde(default)]
    unit: AngleUnit,
}

fn doc_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        path: path.into(),
        message: message.into(),
    }
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        doc_error(path, format!("{inner}"))
    })
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(doc_error(
            "schema_version",
            format!("unsupported version {v}, expected {SCHEMA_VERSION}"),
        ));
    }
    Ok(())
}

/// Parse and validate a chain document.
///
/// Schema problems come back as [`Error::Document`] with the offending field
/// path. Numeric domain problems keep their own variant: an arc or sector of
/// length `>= pi`, a total `>= 2*pi`, or a vertex spacing that does not match
/// its arc length.
pub fn parse_chain(text: &str) -> Result<ChainDocument> {
    let raw: RawChainDocument = from_json(text)?;
    check_version(raw.schema_version)?;
    let form = match (raw.chain, raw.origami) {
        (Some(c), None) => ChainForm::Chain {
            vertices: c.vertices,
            arc_lengths: c.arc_lengths,
        },
        (None, Some(o)) => ChainForm::Origami {
            sector_angles: o.sector_angles.iter().map(|&a| o.unit.to_radians(a)).collect(),
            vertex_on_boundary: o.vertex_on_boundary,
        },
        (Some(_), Some(_)) => return Err(doc_error(".", "give either `chain` or `origami`, not both")),
        (None, None) => return Err(doc_error(".", "missing `chain` or `origami`")),
    };
    let doc = ChainDocument {
        schema_version: raw.schema_version,
        form,
        seed: raw.seed,
    };
    doc.intrinsic()?;
    if let ChainForm::Chain { .. } = doc.form {
        doc.placed(0)?;
    }
    Ok(doc)
}

impl ChainDocument {
    pub fn from_chain(chain: &SphericalChain, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            form: ChainForm::Chain {
                vertices: chain.vertices().iter().map(|v| v.to_array()).collect(),
                arc_lengths: chain.intrinsic().arc_lengths().to_vec(),
            },
            seed,
        }
    }

    pub fn intrinsic(&self) -> Result<IntrinsicChain> {
        match &self.form {
            ChainForm::Chain { arc_lengths, .. } => IntrinsicChain::new(arc_lengths.clone()),
            ChainForm::Origami {
                sector_angles,
                vertex_on_boundary,
            } => origami_to_chain(sector_angles, *vertex_on_boundary),
        }
    }

    /// The configuration described by the document. Origami-form chains are
    /// placed by a random walk seeded with the document seed, or
    /// `fallback_seed` if it has none.
    pub fn placed(&self, fallback_seed: u64) -> Result<SphericalChain> {
        let intrinsic = self.intrinsic()?;
        match &self.form {
            ChainForm::Chain { vertices, arc_lengths } => {
                if vertices.len() != arc_lengths.len() + 1 {
                    return Err(doc_error(
                        "chain.vertices",
                        format!(
                            "{} vertices for {} arc lengths (need one more vertex than edges)",
                            vertices.len(),
                            arc_lengths.len()
                        ),
                    ));
                }
                let points = vertices
                    .iter()
                    .enumerate()
                    .map(|(i, &[x, y, z])| {
                        UnitVector::from_stored(x, y, z)
                            .ok_or_else(|| doc_error(format!("chain.vertices[{i}]"), "zero or non-finite vector"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SphericalChain::new(points, intrinsic)
            }
            ChainForm::Origami { .. } => random_placement(&intrinsic, self.seed.unwrap_or(fallback_seed)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.raw()).expect("chain documents serialize")
    }

    fn raw(&self) -> RawChainDocument {
        let (chain, origami) = match &self.form {
            ChainForm::Chain { vertices, arc_lengths } => (
                Some(RawChainForm {
                    vertices: vertices.clone(),
                    arc_lengths: arc_lengths.clone(),
                }),
                None,
            ),
            ChainForm::Origami {
                sector_angles,
                vertex_on_boundary,
            } => (
                None,
                Some(RawOrigamiForm {
                    sector_angles: sector_angles.clone(),
                    vertex_on_boundary: *vertex_on_boundary,
                    unit: AngleUnit::Radians,
                }),
            ),
        };
        RawChainDocument {
            schema_version: self.schema_version,
            chain,
            origami,
            seed: self.seed,
        }
    }
}

impl Serialize for ChainDocument {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.raw().serialize(s)
    }
}

/// One snapshot with its vertices flattened to `[x0, y0, z0, x1, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRecord {
    pub time: f64,
    pub coordinates: Vec<f64>,
}

/// A flattening run written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDocument {
    pub schema_version: u32,
    /// The input, as given.
    #[serde(serialize_with = "serialize_instance", deserialize_with = "deserialize_instance")]
    pub instance: ChainDocument,
    pub arc_lengths: Vec<f64>,
    pub snapshots: Vec<SnapshotRecord>,
    pub phases: Vec<PhaseRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

fn serialize_instance<S: serde::Serializer>(doc: &ChainDocument, s: S) -> std::result::Result<S::Ok, S::Error> {
    doc.serialize(s)
}

fn deserialize_instance<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ChainDocument, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    parse_chain(&value.to_string()).map_err(serde::de::Error::custom)
}

/// `(time, vertex_index, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateRow {
    pub time: f64,
    pub vertex_index: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TrajectoryDocument {
    pub fn new(instance: ChainDocument, trajectory: &Trajectory, verification: Option<VerificationReport>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            instance,
            arc_lengths: trajectory.intrinsic.arc_lengths().to_vec(),
            snapshots: trajectory
                .snapshots
                .iter()
                .map(|s| SnapshotRecord {
                    time: s.time,
                    coordinates: s.vertices.iter().flat_map(|v| v.to_array()).collect(),
                })
                .collect(),
            phases: trajectory.phases.clone(),
            verification,
        }
    }

    /// Rebuild the trajectory, checking coordinate counts and unit norms.
    pub fn trajectory(&self) -> Result<Trajectory> {
        let intrinsic = IntrinsicChain::new(self.arc_lengths.clone())?;
        let expected = 3 * (intrinsic.n() + 1);
        let snapshots = self
            .snapshots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.coordinates.len() != expected {
                    return Err(doc_error(
                        format!("snapshots[{i}].coordinates"),
                        format!("{} values, expected {expected}", s.coordinates.len()),
                    ));
                }
                let vertices = s
                    .coordinates
                    .chunks_exact(3)
                    .enumerate()
                    .map(|(j, c)| {
                        UnitVector::from_stored(c[0], c[1], c[2]).ok_or_else(|| {
                            doc_error(format!("snapshots[{i}].coordinates[{}]", 3 * j), "not a unit vector")
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Snapshot { time: s.time, vertices })
            })
            .collect::<Result<Vec<_>>>()?;
        if snapshots.is_empty() {
            return Err(doc_error("snapshots", "no snapshots"));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if p.snapshot_range.iter().any(|&k| k >= snapshots.len()) || p.snapshot_range[0] > p.snapshot_range[1] {
                return Err(doc_error(
                    format!("phases[{i}].snapshot_range"),
                    format!("{:?} does not fit {} snapshots", p.snapshot_range, snapshots.len()),
                ));
            }
        }
        Ok(Trajectory {
            intrinsic,
            snapshots,
            phases: self.phases.clone(),
        })
    }

    pub fn rows(&self) -> Vec<CoordinateRow> {
        self.snapshots
            .iter()
            .flat_map(|s| {
                s.coordinates.chunks_exact(3).enumerate().map(move |(j, c)| CoordinateRow {
                    time: s.time,
                    vertex_index: j,
                    x: c[0],
                    y: c[1],
                    z: c[2],
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory documents serialize")
    }
}

pub fn parse_trajectory(text: &str) -> Result<TrajectoryDocument> {
    let doc: TrajectoryDocument = from_json(text)?;
    check_version(doc.schema_version)?;
    doc.trajectory()?;
    Ok(doc)
}

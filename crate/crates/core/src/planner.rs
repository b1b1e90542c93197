//! The straightening loop.
//!
//! Repeatedly: stop if the chain is flat; if it fits in an open hemisphere,
//! expand the whole chain pinned at `e_1` until it straightens or stops
//! fitting; otherwise separate it with a belt, split at the crossed edge and
//! expand one side until it straightens or reaches the median.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::chain::{betas, classify, first_intersection_of, joint_turn, ChainClass, IntrinsicChain, SphericalChain};
use crate::error::{Error, Result};
use crate::expander::{
    build_from_turns, integrate_phase, IntegratorParams, PhaseEvent, PinnedSubchain, Side,
};
use crate::geom::UnitVector;
use crate::separation::{find_separation, Belt, SeparationResult};
use crate::tolerance::{Tolerances, EPS_EVENT};

/// Phase type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseKind {
    WholeHemisphere,
    SubchainExpansion,
}

/// Bookkeeping for one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub kind: PhaseKind,
    pub belt: Option<Belt>,
    /// Separating edge for subchain phases.
    pub edge_index: Option<usize>,
    pub side: Option<Side>,
    /// Flatness deficits of the head and tail sides when the phase started.
    pub side_deficits: Option<[f64; 2]>,
    /// Increase of the angle sum over the phase.
    pub delta: f64,
    /// Vertex that moved farthest and how far it moved.
    pub displaced_vertex: usize,
    pub displacement: f64,
    pub event: PhaseEvent,
    /// Full-chain vertices of the expanded subchain.
    pub subchain_vertices: Vec<usize>,
    /// Indices of the first and last snapshot of the phase.
    pub snapshot_range: [usize; 2],
    pub rejected_steps: usize,
}

/// A configuration at a point in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub vertices: Vec<UnitVector>,
}

/// Output of [`flatten`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub intrinsic: IntrinsicChain,
    /// Starts with the input configuration.
    pub snapshots: Vec<Snapshot>,
    pub phases: Vec<PhaseRecord>,
}

impl Trajectory {
    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn chain_at(&self, i: usize) -> SphericalChain {
        SphericalChain::from_parts(self.snapshots[i].vertices.clone(), self.intrinsic.clone())
    }

    pub fn final_chain(&self) -> SphericalChain {
        self.chain_at(self.snapshots.len() - 1)
    }

    /// Keep every `stride`-th snapshot plus the first and last of each phase.
    pub fn downsampled(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let mut keep = vec![false; self.snapshots.len()];
        for (i, k) in keep.iter_mut().enumerate() {
            *k = i % stride == 0;
        }
        for p in &self.phases {
            keep[p.snapshot_range[0]] = true;
            keep[p.snapshot_range[1]] = true;
        }
        if let Some(k) = keep.last_mut() {
            *k = true;
        }
        let mut new_index = vec![0; self.snapshots.len()];
        let mut snapshots = Vec::new();
        for (i, s) in self.snapshots.iter().enumerate() {
            if keep[i] {
                snapshots.push(s.clone());
            }
            new_index[i] = snapshots.len() - 1;
        }
        let phases = self
            .phases
            .iter()
            .map(|p| PhaseRecord {
                snapshot_range: p.snapshot_range.map(|i| new_index[i]),
                ..p.clone()
            })
            .collect();
        Trajectory {
            intrinsic: self.intrinsic.clone(),
            snapshots,
            phases,
        }
    }
}

/// `ceil(2 pi alpha (n + 2)(n - 1) / (2 pi - alpha))`.
pub fn phase_bound(n: usize, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < TAU) {
        return Err(Error::ChainTooLong { total: alpha });
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let n = n as f64;
    Ok((TAU * alpha * (n + 2.0) * (n - 1.0) / (TAU - alpha)).ceil() as u64)
}

/// Flatness deficits `[head, tail]` of the two sides of a separation.
pub fn side_deficits(sep: &SeparationResult, chain: &SphericalChain) -> [f64; 2] {
    let k = sep.edge_index;
    let n = chain.n();
    [
        chain.deficit(1, k.saturating_sub(1)),
        if k >= 1 { chain.deficit(k, n - 1) } else { 0.0 },
    ]
}

/// The side with the larger deficit; ties go to the side holding `p_0`.
pub fn choose_moving_side(sep: &SeparationResult, chain: &SphericalChain) -> Side {
    let [head, tail] = side_deficits(sep, chain);
    if tail > head {
        Side::Tail
    } else {
        Side::Head
    }
}

/// Knobs for [`flatten_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlannerParams {
    pub integrator: IntegratorParams,
}

/// Straighten a chain with the default parameters.
pub fn flatten(chain: &SphericalChain) -> Result<Trajectory> {
    flatten_with(chain, &PlannerParams::default())
}

/// Straighten a chain, recording every accepted step.
pub fn flatten_with(chain: &SphericalChain, params: &PlannerParams) -> Result<Trajectory> {
    chain.validate()?;
    let n = chain.n();
    let alpha = chain.total_length();
    let bound = phase_bound(n, alpha)?;

    let mut current = chain.clone();
    let mut snapshots = vec![Snapshot {
        time: 0.0,
        vertices: chain.vertices().to_vec(),
    }];
    let mut phases: Vec<PhaseRecord> = Vec::new();

    let mut left_hemisphere = false;
    loop {
        let class = match classify(&current) {
            ChainClass::Hemispherical if left_hemisphere => ChainClass::SphereSpanning,
            c => c,
        };
        let (sub, kind, sep, deficits, side) = match class {
            ChainClass::Flat => break,
            ChainClass::Hemispherical => (
                PinnedSubchain::whole(&current),
                PhaseKind::WholeHemisphere,
                None,
                None,
                None,
            ),
            ChainClass::SphereSpanning => {
                let sep = find_separation(&current)?;
                if sep.edge_index == 0 {
                    return Err(Error::invariant(format!(
                        "separating circle avoids a chain that is not hemispherical: {:?}",
                        current.vertices()
                    )));
                }
                let deficits = side_deficits(&sep, &current);
                let mut side = choose_moving_side(&sep, &current);
                let mut sub = PinnedSubchain::side(&current, &sep, side)?;
                if sub.is_straight() {
                    side = match side {
                        Side::Head => Side::Tail,
                        Side::Tail => Side::Head,
                    };
                    sub = PinnedSubchain::side(&current, &sep, side)?;
                }
                (sub, PhaseKind::SubchainExpansion, Some(sep), Some(deficits), Some(side))
            }
        };
        if phases.len() as u64 >= bound {
            return Err(Error::invariant(format!(
                "phase bound {bound} exceeded on chain {:?}",
                chain.vertices()
            )));
        }

        let subchain_vertices: Vec<usize> = sub.indices().iter().flatten().copied().collect();
        let moving: Vec<usize> = sub.moving().filter_map(|m| sub.indices()[m]).collect();
        let start = current.vertices().to_vec();
        let delta_start = betas(&current).delta_sum;
        let outcome = integrate_phase(sub, &params.integrator)?;
        left_hemisphere = outcome.event == PhaseEvent::LeavesHemisphere;

        let t0 = snapshots.last().map_or(0.0, |s| s.time);
        let first = snapshots.len() - 1;
        let mut vertices = start.clone();
        for (t, pts) in outcome.snapshots.iter().skip(1) {
            for (p, idx) in pts.iter().zip(outcome.subchain.indices()) {
                if let Some(j) = idx {
                    vertices[*j] = *p;
                }
            }
            snapshots.push(Snapshot {
                time: t0 + t,
                vertices: vertices.clone(),
            });
        }
        current = current.with_vertices(vertices.clone());
        let delta = betas(&current).delta_sum - delta_start;
        let (displaced_vertex, displacement) = moving
            .iter()
            .map(|&j| (j, start[j].distance(&vertices[j])))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });

        log::debug!(
            "phase {}: {:?} {:?} delta {delta:.3e} after {} steps",
            phases.len() + 1,
            kind,
            outcome.event,
            outcome.snapshots.len() - 1
        );
        phases.push(PhaseRecord {
            kind,
            belt: sep.as_ref().map(|s| s.belt),
            edge_index: sep.as_ref().map(|s| s.edge_index),
            side,
            side_deficits: deficits,
            delta,
            displaced_vertex,
            displacement,
            event: outcome.event,
            subchain_vertices,
            snapshot_range: [first, snapshots.len() - 1],
            rejected_steps: outcome.rejected_steps,
        });
    }

    Ok(Trajectory {
        intrinsic: chain.intrinsic().clone(),
        snapshots,
        phases,
    })
}

/// Findings of [`verify_trajectory`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub snapshot_count: usize,
    /// `(snapshot, edge, error)`.
    pub length_violations: Vec<(usize, usize, f64)>,
    /// `(snapshot, edge, edge)`.
    pub intersections: Vec<(usize, usize, usize)>,
    /// Crossings in the reconstructed midpoint of widely spaced snapshots,
    /// reported against the later snapshot.
    pub midpoint_intersections: Vec<(usize, usize, usize)>,
    /// `(snapshot, joint, drop)`.
    pub angle_decreases: Vec<(usize, usize, f64)>,
    /// `(snapshot, drop)`.
    pub delta_decreases: Vec<(usize, f64)>,
    /// `(phase, message)`.
    pub progress_violations: Vec<(usize, String)>,
    pub final_flat: bool,
    pub final_delta: f64,
    pub final_delta_error: f64,
    pub phase_count: usize,
    pub phase_bound: u64,
    /// `(distance, expected)` for chains longer than pi.
    pub endpoint_distance: Option<(f64, f64)>,
    pub endpoint_ok: bool,
    pub malformed: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.malformed.is_empty()
            && self.length_violations.is_empty()
            && self.intersections.is_empty()
            && self.midpoint_intersections.is_empty()
            && self.angle_decreases.is_empty()
            && self.delta_decreases.is_empty()
            && self.progress_violations.is_empty()
            && self.final_flat
            && self.phase_count as u64 <= self.phase_bound
            && self.endpoint_ok
    }

    /// One line per failed check.
    pub fn failures(&self) -> Vec<String> {
        let mut out = self.malformed.clone();
        if !self.length_violations.is_empty() {
            out.push(format!("edge length violations: {:?}", first(&self.length_violations)));
        }
        if !self.intersections.is_empty() {
            out.push(format!("self-intersections: {:?}", first(&self.intersections)));
        }
        if !self.midpoint_intersections.is_empty() {
            out.push(format!(
                "self-intersections between snapshots: {:?}",
                first(&self.midpoint_intersections)
            ));
        }
        if !self.angle_decreases.is_empty() {
            out.push(format!("joint angles decreased: {:?}", first(&self.angle_decreases)));
        }
        if !self.delta_decreases.is_empty() {
            out.push(format!("angle sum decreased: {:?}", first(&self.delta_decreases)));
        }
        for (p, m) in &self.progress_violations {
            out.push(format!("phase {p}: {m}"));
        }
        if !self.final_flat {
            out.push(format!("final configuration not flat (angle sum error {:e})", self.final_delta_error));
        }
        if self.phase_count as u64 > self.phase_bound {
            out.push(format!("{} phases exceed the bound {}", self.phase_count, self.phase_bound));
        }
        if !self.endpoint_ok {
            out.push(format!("endpoint distance {:?} off", self.endpoint_distance));
        }
        out
    }
}

fn first<T: Clone>(v: &[T]) -> Vec<T> {
    v.iter().take(5).cloned().collect()
}

/// Snapshot gap above which the motion in between is also checked.
const MIDPOINT_GAP: f64 = 1e-2;

/// Re-check a trajectory from scratch.
pub fn verify_trajectory(traj: &Trajectory, tol: &Tolerances) -> VerificationReport {
    let lengths = traj.intrinsic.arc_lengths();
    let n = lengths.len();
    let alpha = traj.intrinsic.total();
    let mut r = VerificationReport {
        snapshot_count: traj.snapshots.len(),
        phase_count: traj.phases.len(),
        phase_bound: phase_bound(n, alpha).unwrap_or(0),
        endpoint_ok: true,
        ..Default::default()
    };
    if traj.snapshots.is_empty() {
        r.malformed.push("trajectory has no snapshots".into());
        return r;
    }
    for (s, snap) in traj.snapshots.iter().enumerate() {
        if snap.vertices.len() != n + 1 {
            r.malformed.push(format!(
                "snapshot {s} has {} vertices, expected {}",
                snap.vertices.len(),
                n + 1
            ));
        }
    }
    if !r.malformed.is_empty() {
        return r;
    }

    let mut prev: Option<(Vec<f64>, f64)> = None;
    for (s, snap) in traj.snapshots.iter().enumerate() {
        let v = &snap.vertices;
        for (e, len) in lengths.iter().enumerate() {
            let err = (v[e].distance(&v[e + 1]) - len).abs();
            if err > tol.length {
                r.length_violations.push((s, e + 1, err));
            }
        }
        if let Some((i, j)) = first_intersection_of(v) {
            r.intersections.push((s, i, j));
        }
        let bs: Vec<f64> = (1..n)
            .map(|i| crate::geom::vertex_angle(&v[i - 1], &v[i], &v[i + 1]))
            .collect();
        let delta: f64 = bs.iter().sum();
        if let Some((pb, pd)) = &prev {
            for (i, (b0, b1)) in pb.iter().zip(&bs).enumerate() {
                if b0 - b1 > tol.monotone {
                    r.angle_decreases.push((s, i + 1, b0 - b1));
                }
            }
            if pd - delta > tol.monotone {
                r.delta_decreases.push((s, pd - delta));
            }
        }
        if s > 0 && snap.time - traj.snapshots[s - 1].time > MIDPOINT_GAP {
            if let Some(mid) = midpoint(&traj.snapshots[s - 1].vertices, v, lengths) {
                if let Some((i, j)) = first_intersection_of(&mid) {
                    r.midpoint_intersections.push((s, i, j));
                }
            }
        }
        prev = Some((bs, delta));
    }

    for (p, rec) in traj.phases.iter().enumerate() {
        if rec.delta < -tol.monotone {
            r.progress_violations.push((p + 1, format!("angle sum dropped by {}", -rec.delta)));
        }
        if let (PhaseKind::SubchainExpansion, PhaseEvent::HitsMedianEquator, Some(belt)) =
            (rec.kind, rec.event, rec.belt)
        {
            let half = belt.half_width();
            if rec.displacement < half - EPS_EVENT - tol.monotone {
                r.progress_violations.push((
                    p + 1,
                    format!("displacement {} below half belt width {half}", rec.displacement),
                ));
            }
            let need = belt.width / (2.0 * alpha) - 1e-6;
            if rec.delta < need {
                r.progress_violations.push((
                    p + 1,
                    format!("angle sum gain {} below {need}", rec.delta),
                ));
            }
        }
    }

    let last = traj.final_chain();
    let m = betas(&last);
    r.final_delta = m.delta_sum;
    r.final_delta_error = ((n as f64 - 1.0) * PI - m.delta_sum).abs();
    r.final_flat = classify(&last) == ChainClass::Flat;
    if alpha > PI {
        let d = last.vertex(0).distance(&last.vertex(n));
        let expected = TAU - alpha;
        r.endpoint_ok = (d - expected).abs() <= tol.endpoint;
        r.endpoint_distance = Some((d, expected));
    }
    r
}

/// Configuration halfway between two snapshots of one phase, following the
/// joint-angle interpolation the integrator uses. `None` when no edge stayed
/// fixed between them.
fn midpoint(a: &[UnitVector], b: &[UnitVector], lengths: &[f64]) -> Option<Vec<UnitVector>> {
    let n = lengths.len();
    let fixed = (1..=n).find(|&e| a[e - 1].distance(&b[e - 1]) < 1e-12 && a[e].distance(&b[e]) < 1e-12)?;
    let mid_turns = |pa: &[UnitVector], pb: &[UnitVector]| -> Vec<f64> {
        (1..pa.len() - 1)
            .map(|i| {
                let ta = joint_turn(&pa[i - 1], &pa[i], &pa[i + 1]);
                let tb = joint_turn(&pb[i - 1], &pb[i], &pb[i + 1]);
                let mut d = tb - ta;
                if d > PI {
                    d -= TAU;
                } else if d < -PI {
                    d += TAU;
                }
                ta + 0.5 * d
            })
            .collect()
    };
    // Forward from e_fixed.
    let fa: Vec<UnitVector> = a[fixed - 1..].to_vec();
    let fb: Vec<UnitVector> = b[fixed - 1..].to_vec();
    let forward = build_from_turns(fa[0], fa[1], &lengths[fixed - 1..], &mid_turns(&fa, &fb));
    // Backward from the same edge, reversed.
    let ra: Vec<UnitVector> = a[..=fixed].iter().rev().copied().collect();
    let rb: Vec<UnitVector> = b[..=fixed].iter().rev().copied().collect();
    let rev_lengths: Vec<f64> = lengths[..fixed].iter().rev().copied().collect();
    let backward = build_from_turns(ra[0], ra[1], &rev_lengths, &mid_turns(&ra, &rb));
    let mut out: Vec<UnitVector> = backward.into_iter().rev().collect();
    out.extend_from_slice(&forward[2..]);
    Some(out)
}

//! Expansive motions of a pinned chain confined to a hemisphere.
//!
//! A velocity is parametrized by joint rates `theta_i`: joint `i` rotates every
//! point after it about `p_i`, so `v_m = sum_{i<m} theta_i (p_i x p_m)`. Edge
//! lengths are preserved by construction and the pinned edge (points 0 and 1)
//! never moves. For a pair `a < b` only the joints strictly between them
//! change the distance:
//!
//! ```text
//!     d/dt dist(p_a, p_b) = sum_{a<i<b} theta_i det(p_i, p_a, p_b) / sin dist(p_a, p_b)
//! ```
//!
//! Each step maximizes the smallest such rate over velocities with
//! `sum ‖v_m‖^2 <= 1`, a maximin program solved after whitening the joint
//! coordinates by the QR factor of the velocity Jacobian.
//!
//! Exactly straight joints are locked. Pairs separated only by locked joints
//! are rigid and carry no constraint.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::chain::{hemisphere_margin, joint_turn, SphericalChain};
use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::maximin::maximin;
use crate::separation::SeparationResult;
use crate::tolerance::{EPS_BELT, EPS_EVENT, EPS_FLAT, EPS_HEMI, EPS_STRAIGHT};

/// Turns this close to `pi` are read as exactly straight.
const STRAIGHT_ROUNDING: f64 = 1e-12;

/// Which half of a separated chain moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `p_0 ..= p_{k-1}`.
    Head,
    /// `p_k ..= p_n`.
    Tail,
}

/// The region a phase must stay in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    /// No event besides straightening.
    Free,
    /// Stop when a moving point reaches the great circle with this pole; the
    /// subchain lies on its positive side.
    Median { pole: UnitVector },
    /// Stop when the chain is no longer contained in an open hemisphere.
    Hemisphere,
}

/// An ordered chain whose first two points are pinned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedSubchain {
    points: Vec<UnitVector>,
    /// `lengths[m]` joins `points[m]` and `points[m + 1]`.
    lengths: Vec<f64>,
    /// Index of each point in the full chain; `None` for a clipped edge end.
    indices: Vec<Option<usize>>,
    /// Signed turn at each joint; `turns[i - 1]` belongs to `points[i]`.
    turns: Vec<f64>,
    bound: Bound,
}

impl PinnedSubchain {
    /// Chain given by its points, pinned at the first edge.
    pub fn new(points: Vec<UnitVector>, indices: Vec<Option<usize>>, bound: Bound) -> Result<Self> {
        if points.len() < 2 || indices.len() != points.len() {
            return Err(Error::InvalidInput(
                "a pinned subchain needs at least two points and one index per point".into(),
            ));
        }
        let lengths = points.windows(2).map(|w| w[0].distance(&w[1])).collect();
        let turns = (1..points.len() - 1)
            .map(|i| {
                let t = joint_turn(&points[i - 1], &points[i], &points[i + 1]);
                // Joints straightened by an earlier phase come back off by rounding.
                if PI - t.abs() <= STRAIGHT_ROUNDING { PI.copysign(t) } else { t }
            })
            .collect();
        Ok(Self {
            points,
            lengths,
            indices,
            turns,
            bound,
        })
    }

    /// The whole chain pinned at `e_1`, bounded by hemisphere containment.
    pub fn whole(chain: &SphericalChain) -> Self {
        let mut s = Self::new(
            chain.vertices().to_vec(),
            (0..=chain.n()).map(Some).collect(),
            Bound::Hemisphere,
        )
        .expect("chains have at least one edge");
        s.lengths = chain.intrinsic().arc_lengths().to_vec();
        s
    }

    /// One side of a separation, starting at the point where the median
    /// crosses `e_k`. The clipped part of `e_k` is pinned.
    pub fn side(chain: &SphericalChain, sep: &SeparationResult, side: Side) -> Result<Self> {
        let k = sep.edge_index;
        if k == 0 {
            return Err(Error::InvalidInput(
                "the separating circle avoids the chain; there is no edge to split".into(),
            ));
        }
        let q = sep.pole_witness;
        let (a, b) = (chain.vertex(k - 1), chain.vertex(k));
        let (sa, sb) = (q.dot(&a), q.dot(&b));
        let x = UnitVector::from_vector(a.as_vector() * sb.abs() + b.as_vector() * sa.abs())
            .ok_or_else(|| Error::invariant("separating edge has antipodal endpoints"))?;
        let lens = chain.intrinsic().arc_lengths();
        let (order, pole): (Vec<usize>, UnitVector) = match side {
            Side::Head => ((0..k).rev().collect(), q),
            Side::Tail => ((k..=chain.n()).collect(), -q),
        };
        let mut points = vec![x];
        let mut indices = vec![None];
        for &j in &order {
            points.push(chain.vertex(j));
            indices.push(Some(j));
        }
        let mut s = Self::new(points, indices, Bound::Median { pole })?;
        for m in 1..s.lengths.len() {
            let (i, j) = (order[m - 1], order[m]);
            s.lengths[m] = lens[i.min(j)];
        }
        Ok(s)
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn indices(&self) -> &[Option<usize>] {
        &self.indices
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    pub fn turns(&self) -> &[f64] {
        &self.turns
    }

    /// Number of joints (points strictly inside the subchain).
    pub fn joint_count(&self) -> usize {
        self.turns.len()
    }

    /// Angle at joint `i` (1-based point index).
    pub fn beta(&self, i: usize) -> f64 {
        self.turns[i - 1].abs()
    }

    /// Only exactly straight joints are locked; nearly straight ones keep
    /// moving until a clipped step lands them on `pi`.
    pub fn is_locked(&self, i: usize) -> bool {
        self.beta(i) >= PI
    }

    pub fn is_straight(&self) -> bool {
        (1..=self.joint_count()).all(|i| self.is_locked(i))
    }

    /// `sum (pi - beta_i)` over the joints.
    pub fn deficit(&self) -> f64 {
        self.turns.iter().map(|t| PI - t.abs()).sum()
    }

    /// Points that can move (everything past the pinned edge).
    pub fn moving(&self) -> std::ops::Range<usize> {
        2..self.points.len()
    }

    fn unlocked(&self) -> Vec<usize> {
        (1..=self.joint_count()).filter(|&i| !self.is_locked(i)).collect()
    }

    /// Nonadjacent pairs `(a, b)` with some unlocked joint between them.
    fn monitored_pairs(&self) -> Vec<(usize, usize)> {
        let unlocked: Vec<bool> = (0..self.points.len())
            .map(|i| i >= 1 && i <= self.joint_count() && !self.is_locked(i))
            .collect();
        let mut out = Vec::new();
        for a in 0..self.points.len() {
            for b in a + 2..self.points.len() {
                if (a + 1..b).any(|i| unlocked[i]) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Rebuild the points from the pinned edge with new joint turns.
    fn with_turns(&self, turns: Vec<f64>) -> Self {
        let points = build_from_turns(self.points[0], self.points[1], &self.lengths, &turns);
        Self {
            points,
            lengths: self.lengths.clone(),
            indices: self.indices.clone(),
            turns,
            bound: self.bound,
        }
    }

    /// Write the subchain back into a full configuration.
    pub fn write_into(&self, vertices: &mut [UnitVector]) {
        for (p, idx) in self.points.iter().zip(&self.indices) {
            if let Some(j) = idx {
                vertices[*j] = *p;
            }
        }
    }

    /// Smallest signed height of a moving point over the bounding median.
    fn median_height(&self) -> Option<f64> {
        match self.bound {
            Bound::Median { pole } => Some(
                self.moving()
                    .map(|m| pole.dot(&self.points[m]))
                    .fold(f64::INFINITY, f64::min),
            ),
            _ => None,
        }
    }
}

/// Lay out a chain from its first edge, edge lengths and signed joint turns.
pub(crate) fn build_from_turns(
    p0: UnitVector,
    p1: UnitVector,
    lengths: &[f64],
    turns: &[f64],
) -> Vec<UnitVector> {
    let mut points = Vec::with_capacity(lengths.len() + 1);
    points.push(p0);
    points.push(p1);
    let mut p = *p1.as_vector();
    // Unit tangent at the current point, pointing back along the last edge.
    let mut back = (p0.as_vector() - p * p.dot(p0.as_vector())).normalize();
    for (m, &psi) in turns.iter().enumerate() {
        let fwd = back * psi.cos() + p.cross(&back) * psi.sin();
        let (s, c) = lengths[m + 1].sin_cos();
        let next = (p * c + fwd * s).normalize();
        back = (p * s - fwd * c).normalize();
        p = next;
        points.push(UnitVector::renormalized(p));
    }
    points
}

/// A velocity assignment to the points of a subchain.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub velocities: Vec<Vector3<f64>>,
    /// Rotation rate at each joint, `joint_rates[i - 1]` for `points[i]`.
    pub joint_rates: Vec<f64>,
    /// Smallest distance growth rate over the monitored pairs.
    pub slack: f64,
}

impl VelocityField {
    /// `d/dt dist(p_a, p_b)` under this field.
    pub fn pair_rate(&self, points: &[UnitVector], a: usize, b: usize) -> f64 {
        let (pa, pb) = (points[a].as_vector(), points[b].as_vector());
        let dot = -(self.velocities[a].dot(pb) + pa.dot(&self.velocities[b]));
        dot / pa.cross(pb).norm()
    }

    /// `d/dt <p_m, p_{m+1}>` for every edge.
    pub fn bar_rates(&self, points: &[UnitVector]) -> Vec<f64> {
        (0..points.len() - 1)
            .map(|m| {
                self.velocities[m].dot(points[m + 1].as_vector())
                    + points[m].as_vector().dot(&self.velocities[m + 1])
            })
            .collect()
    }
}

/// Result of the velocity program.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    Field(VelocityField),
    /// Every joint is straight; nothing can expand.
    Straightened,
}

fn det(a: &UnitVector, b: &UnitVector, c: &UnitVector) -> f64 {
    a.as_vector().dot(&b.cross(c))
}

/// Maximally expansive unit-speed velocity of the subchain.
pub fn expansive_velocity(sub: &PinnedSubchain) -> Result<Velocity> {
    let unlocked = sub.unlocked();
    if unlocked.is_empty() {
        return Ok(Velocity::Straightened);
    }
    let pts = &sub.points;
    let cols = unlocked.len();
    let moving = sub.moving();

    let mut jac = DMatrix::zeros(3 * moving.len(), cols);
    for (r, m) in moving.clone().enumerate() {
        for (c, &i) in unlocked.iter().enumerate() {
            if i < m {
                let v = pts[i].cross(&pts[m]);
                jac.fixed_view_mut::<3, 1>(3 * r, c).copy_from(&v);
            }
        }
    }
    let r_factor = jac.qr().r();
    let rt = r_factor.transpose();

    let pairs = sub.monitored_pairs();
    let mut rows = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let sin_d = pts[a].cross(&pts[b]).norm();
        let g = DVector::from_iterator(
            cols,
            unlocked
                .iter()
                .map(|&i| if a < i && i < b { det(&pts[i], &pts[a], &pts[b]) / sin_d } else { 0.0 }),
        );
        let w = rt
            .solve_lower_triangular(&g)
            .ok_or_else(|| Error::invariant("singular velocity Jacobian"))?;
        rows.push(w);
    }

    // Unit rows: a pair across a nearly straight joint has a tiny but
    // genuine rate, and should not pull the margin below EPS_STRAIGHT.
    let unit_rows: Vec<DVector<f64>> = rows
        .iter()
        .map(|w| {
            let norm = w.norm();
            if norm > 0.0 { w / norm } else { w.clone() }
        })
        .collect();
    let sol = maximin(&unit_rows);
    let direction = match sol.direction {
        Some(y) if sol.value > EPS_STRAIGHT => y,
        _ => {
            return Err(Error::invariant(format!(
                "no expansive motion (slack {}) for a subchain with unlocked joints {unlocked:?}: {:?}",
                sol.value, pts
            )))
        }
    };
    let theta = r_factor
        .solve_upper_triangular(&direction)
        .ok_or_else(|| Error::invariant("singular velocity Jacobian"))?;

    let mut joint_rates = vec![0.0; sub.joint_count()];
    for (c, &i) in unlocked.iter().enumerate() {
        joint_rates[i - 1] = theta[c];
    }
    let mut velocities = vec![Vector3::zeros(); pts.len()];
    for m in moving {
        for (c, &i) in unlocked.iter().enumerate() {
            if i < m {
                velocities[m] += pts[i].cross(&pts[m]) * theta[c];
            }
        }
    }
    let slack = rows.iter().map(|w| w.dot(&direction)).fold(f64::INFINITY, f64::min);
    Ok(Velocity::Field(VelocityField {
        velocities,
        joint_rates,
        slack,
    }))
}

/// Step-size control and safety limits for [`integrate_phase`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorParams {
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Largest accepted drop of a monitored pair distance in one step.
    pub pair_slack: f64,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self {
            h_init: 1e-2,
            h_min: 1e-8,
            max_steps: 1_000_000,
            pair_slack: 1e-12,
        }
    }
}

/// Why a phase stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseEvent {
    Straightened,
    HitsMedianEquator,
    LeavesHemisphere,
}

/// Output of one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOutcome {
    pub subchain: PinnedSubchain,
    /// `(elapsed time, points)` after every accepted step, starting at 0.
    pub snapshots: Vec<(f64, Vec<UnitVector>)>,
    pub event: PhaseEvent,
    pub rejected_steps: usize,
}

impl PhaseOutcome {
    pub fn duration(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.0)
    }
}

fn pair_distances(sub: &PinnedSubchain, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(a, b)| sub.points[a].distance(&sub.points[b]))
        .collect()
}

fn advance(sub: &PinnedSubchain, rates: &[f64], h: f64, clip: Option<usize>) -> PinnedSubchain {
    let mut turns: Vec<f64> = sub
        .turns
        .iter()
        .zip(rates)
        .map(|(t, r)| (t + r * h).clamp(-PI, PI))
        .collect();
    if let Some(i) = clip {
        turns[i - 1] = PI.copysign(sub.turns[i - 1]);
    }
    sub.with_turns(turns)
}

enum Check {
    Inside,
    Event,
    Beyond,
}

fn check_bound(sub: &PinnedSubchain) -> Check {
    match sub.bound {
        Bound::Free => Check::Inside,
        Bound::Median { .. } => {
            let h = sub.median_height().unwrap_or(f64::INFINITY);
            if h > EPS_EVENT {
                Check::Inside
            } else if h >= 0.0 {
                Check::Event
            } else {
                Check::Beyond
            }
        }
        Bound::Hemisphere => {
            if hemisphere_margin(&sub.points).0 > EPS_HEMI {
                Check::Inside
            } else {
                Check::Beyond
            }
        }
    }
}

/// Run the expansive motion until the subchain straightens or leaves its
/// bounding region. Boundary events are located by bisection on the step.
pub fn integrate_phase(sub: PinnedSubchain, params: &IntegratorParams) -> Result<PhaseOutcome> {
    let mut state = sub;
    let mut time = 0.0;
    let mut h = params.h_init;
    let mut snapshots = vec![(0.0, state.points.clone())];
    let mut rejected = 0;

    if let Check::Event | Check::Beyond = check_bound(&state) {
        let event = match state.bound {
            Bound::Hemisphere => PhaseEvent::LeavesHemisphere,
            _ => PhaseEvent::HitsMedianEquator,
        };
        return Ok(PhaseOutcome {
            subchain: state,
            snapshots,
            event,
            rejected_steps: 0,
        });
    }

    for _ in 0..params.max_steps {
        let velocity = match expansive_velocity(&state) {
            // The program degenerates as the chain reaches the boundary.
            Err(_) if matches!(state.bound, Bound::Hemisphere) && near_boundary(&state) => {
                return Ok(PhaseOutcome {
                    subchain: state,
                    snapshots,
                    event: PhaseEvent::LeavesHemisphere,
                    rejected_steps: rejected,
                })
            }
            v => v?,
        };
        let field = match velocity {
            Velocity::Straightened => {
                return Ok(PhaseOutcome {
                    subchain: state,
                    snapshots,
                    event: PhaseEvent::Straightened,
                    rejected_steps: rejected,
                })
            }
            Velocity::Field(f) => f,
        };
        let rates = &field.joint_rates;

        // First joint to reach straight along this direction.
        let mut clip_at = (f64::INFINITY, 0);
        for (i, (&t, &r)) in state.turns.iter().zip(rates).enumerate() {
            if r != 0.0 && r.signum() == t.signum() {
                let hc = (PI - t.abs()) / r.abs();
                if hc < clip_at.0 {
                    clip_at = (hc, i + 1);
                }
            }
        }

        let pairs = state.monitored_pairs();
        let before = pair_distances(&state, &pairs);
        let expands = |cand: &PinnedSubchain| {
            pair_distances(cand, &pairs)
                .iter()
                .zip(&before)
                .all(|(d1, d0)| *d1 >= d0 - params.pair_slack)
        };

        let (step, clip) = if clip_at.0 <= h {
            (clip_at.0, Some(clip_at.1))
        } else {
            (h, None)
        };
        let cand = advance(&state, rates, step, clip);
        if !expands(&cand) {
            rejected += 1;
            h = 0.5 * step.min(h);
            if h < params.h_min {
                // A vertex closing on the antipode of another stalls the step
                // just short of the boundary event.
                if near_boundary(&state) {
                    return Ok(PhaseOutcome {
                        event: boundary_event(&state),
                        subchain: state,
                        snapshots,
                        rejected_steps: rejected,
                    });
                }
                return Err(Error::invariant(format!(
                    "step size underflow (h = {h:e}, slack {}) at {:?}",
                    field.slack, state.points
                )));
            }
            continue;
        }

        let (accepted, used, event) = match check_bound(&cand) {
            Check::Inside => (cand, step, None),
            Check::Event => (cand, step, Some(boundary_event(&state))),
            Check::Beyond => {
                let (c, s) = bisect_event(&state, rates, step);
                (c, s, Some(boundary_event(&state)))
            }
        };
        time += used;
        state = accepted;
        snapshots.push((time, state.points.clone()));
        if let Some(event) = event {
            return Ok(PhaseOutcome {
                subchain: state,
                snapshots,
                event,
                rejected_steps: rejected,
            });
        }
        if clip.is_none() {
            h = (2.0 * h).min(params.h_init);
        }
    }
    Err(Error::invariant(format!(
        "phase did not finish within {} steps",
        params.max_steps
    )))
}

/// Close enough to the bounding circle to end the phase there. The expansive
/// margin shrinks with the hemisphere margin, so that band is wider.
fn near_boundary(sub: &PinnedSubchain) -> bool {
    match sub.bound {
        Bound::Free => false,
        Bound::Median { .. } => sub.median_height().is_some_and(|h| h <= EPS_FLAT),
        Bound::Hemisphere => hemisphere_margin(&sub.points).0 <= EPS_BELT,
    }
}

fn boundary_event(sub: &PinnedSubchain) -> PhaseEvent {
    match sub.bound {
        Bound::Hemisphere => PhaseEvent::LeavesHemisphere,
        _ => PhaseEvent::HitsMedianEquator,
    }
}

/// Shrink a step that crossed the boundary until it lands on it.
fn bisect_event(state: &PinnedSubchain, rates: &[f64], step: f64) -> (PinnedSubchain, f64) {
    let (mut lo, mut hi) = (0.0, step);
    let mut best = advance(state, rates, hi, None);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let cand = advance(state, rates, mid, None);
        match check_bound(&cand) {
            Check::Inside => lo = mid,
            Check::Event => return (cand, mid),
            Check::Beyond => {
                hi = mid;
                best = cand;
            }
        }
        if matches!(state.bound, Bound::Hemisphere) && hi - lo <= 1e-12 * step {
            break;
        }
    }
    (best, hi)
}

/// Diagnostics for a stored motion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    /// `(snapshot, edge, error)`.
    pub length_errors: Vec<(usize, usize, f64)>,
    /// `(snapshot, a, b, drop)` for pair distances that shrank.
    pub contracting_pairs: Vec<(usize, usize, usize, f64)>,
    /// `(snapshot, joint, drop)` for joint angles that shrank.
    pub closing_joints: Vec<(usize, usize, f64)>,
}

impl TraceReport {
    pub fn passed(&self) -> bool {
        self.length_errors.is_empty()
            && self.contracting_pairs.is_empty()
            && self.closing_joints.is_empty()
    }
}

/// Check a sequence of configurations of one chain for length preservation,
/// growth of every nonadjacent distance and growth of every joint angle.
pub fn check_expansive_trace(
    lengths: &[f64],
    snapshots: &[Vec<UnitVector>],
    length_tol: f64,
    monotone_tol: f64,
) -> TraceReport {
    let mut report = TraceReport::default();
    for (s, pts) in snapshots.iter().enumerate() {
        for (e, len) in lengths.iter().enumerate() {
            let err = (pts[e].distance(&pts[e + 1]) - len).abs();
            if err > length_tol {
                report.length_errors.push((s, e + 1, err));
            }
        }
    }
    for (s, w) in snapshots.windows(2).enumerate() {
        let (p, q) = (&w[0], &w[1]);
        for a in 0..p.len() {
            for b in a + 2..p.len() {
                let drop = p[a].distance(&p[b]) - q[a].distance(&q[b]);
                if drop > monotone_tol {
                    report.contracting_pairs.push((s + 1, a, b, drop));
                }
            }
        }
        for i in 1..p.len() - 1 {
            let b0 = crate::geom::vertex_angle(&p[i - 1], &p[i], &p[i + 1]);
            let b1 = crate::geom::vertex_angle(&q[i - 1], &q[i], &q[i + 1]);
            if b0 - b1 > monotone_tol {
                report.closing_joints.push((s + 1, i, b0 - b1));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::random_chain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_edge() -> PinnedSubchain {
        PinnedSubchain::new(
            vec![
                UnitVector::from_lat_lon(0.0, 0.0),
                UnitVector::from_lat_lon(0.0, 0.8),
                UnitVector::from_lat_lon(0.5, 0.4),
            ],
            vec![Some(0), Some(1), Some(2)],
            Bound::Free,
        )
        .unwrap()
    }

    #[test]
    fn build_from_turns_reproduces_chain() {
        let c = random_chain(7, 5.0, 3).unwrap();
        let s = PinnedSubchain::whole(&c);
        let rebuilt = build_from_turns(s.points[0], s.points[1], &s.lengths, &s.turns);
        for (a, b) in rebuilt.iter().zip(c.vertices()) {
            assert!(a.distance(b) < 1e-12);
        }
    }

    #[test]
    fn two_edge_velocity_opens_the_joint() {
        let s = two_edge();
        let Velocity::Field(f) = expansive_velocity(&s).unwrap() else {
            panic!("bent chain reported straight");
        };
        assert_eq!(f.joint_rates[0].signum(), s.turns[0].signum());
        assert!(f.pair_rate(&s.points, 0, 2) > 0.0);
        // One degree of freedom at unit speed: |theta| sin(L2) = 1.
        assert!((f.joint_rates[0].abs() * s.lengths[1].sin() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn straight_subchain_is_straightened() {
        let pts: Vec<_> = [0.0, 0.7, 1.5, 2.0]
            .iter()
            .map(|&l| UnitVector::from_lat_lon(0.0, l))
            .collect();
        let s = PinnedSubchain::new(pts, vec![None; 4], Bound::Free).unwrap();
        assert_eq!(expansive_velocity(&s).unwrap(), Velocity::Straightened);
    }

    #[test]
    fn field_preserves_bars_and_expands() {
        for seed in 0..50 {
            let c = random_chain(2 + seed as usize % 8, 2.5, seed).unwrap();
            let s = PinnedSubchain::whole(&c);
            let Velocity::Field(f) = expansive_velocity(&s).unwrap() else {
                panic!()
            };
            for r in f.bar_rates(&s.points) {
                assert!(r.abs() <= 1e-10);
            }
            assert_eq!(f.velocities[0], Vector3::zeros());
            assert_eq!(f.velocities[1], Vector3::zeros());
            for (m, v) in f.velocities.iter().enumerate() {
                assert!(v.dot(s.points[m].as_vector()).abs() <= 1e-12);
            }
            let speed: f64 = f.velocities.iter().map(|v| v.norm_squared()).sum();
            assert!(speed <= 1.0 + 1e-9);
            for &(a, b) in &s.monitored_pairs() {
                assert!(f.pair_rate(&s.points, a, b) >= f.slack - 1e-9);
            }
        }
    }

    #[test]
    fn pair_rates_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..20 {
            let c = random_chain(5, 3.0 + rng.random_range(0.0..2.0), seed).unwrap();
            let s = PinnedSubchain::whole(&c);
            let Velocity::Field(f) = expansive_velocity(&s).unwrap() else {
                panic!()
            };
            for h in [1e-3, 1e-4] {
                let moved = advance(&s, &f.joint_rates, h, None);
                for &(a, b) in &s.monitored_pairs() {
                    let fd = (moved.points[a].distance(&moved.points[b])
                        - s.points[a].distance(&s.points[b]))
                        / h;
                    let analytic = f.pair_rate(&s.points, a, b);
                    assert!((fd - analytic).abs() < 50.0 * h, "h {h}: {fd} vs {analytic}");
                }
            }
        }
    }

    #[test]
    fn two_edge_phase_matches_closed_form() {
        let s = two_edge();
        let psi0 = s.turns[0];
        let (p1, p2) = (s.points[1], s.points[2]);
        let out = integrate_phase(s, &IntegratorParams::default()).unwrap();
        assert_eq!(out.event, PhaseEvent::Straightened);
        let last = out.subchain.beta(1);
        assert!((PI - last).abs() < EPS_FLAT);
        let mut prev = 0.0;
        for (_, pts) in &out.snapshots {
            let psi = joint_turn(&pts[0], &pts[1], &pts[2]);
            let beta = psi.abs();
            assert!(beta >= prev);
            prev = beta;
            let expect = p2.rotated(&p1, psi - psi0);
            assert!(pts[2].distance(&expect) < 1e-6);
        }
    }

    #[test]
    fn whole_phase_stops_on_hemisphere_or_straight() {
        for seed in 0..20 {
            let c = random_chain(5, 4.0, seed).unwrap();
            if !c.is_hemispherical() {
                continue;
            }
            let out = integrate_phase(PinnedSubchain::whole(&c), &IntegratorParams::default()).unwrap();
            let pts = &out.subchain.points;
            match out.event {
                PhaseEvent::LeavesHemisphere => assert!(hemisphere_margin(pts).0 <= EPS_HEMI),
                PhaseEvent::Straightened => assert!(out.subchain.is_straight()),
                PhaseEvent::HitsMedianEquator => panic!("no median in whole mode"),
            }
            let lens = c.intrinsic().arc_lengths();
            let snaps: Vec<_> = out.snapshots.iter().map(|s| s.1.clone()).collect();
            let report = check_expansive_trace(lens, &snaps, 1e-9, 1e-9);
            assert!(report.passed(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn contracting_trace_is_flagged() {
        let s = two_edge();
        let mut closed = s.turns.clone();
        closed[0] *= 0.5;
        let worse = s.with_turns(closed);
        let report = check_expansive_trace(&s.lengths, &[s.points.clone(), worse.points.clone()], 1e-9, 1e-7);
        assert!(!report.contracting_pairs.is_empty());
        assert!(!report.closing_joints.is_empty());
    }
}

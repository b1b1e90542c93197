//! Straightening spherical open chains, the configuration space of a
//! single-vertex rigid origami whose fold vertex lies on the paper boundary.
//!
//! A chain of total length below `2*pi` can always be unfolded to a flat
//! configuration (all vertices on one great circle) without self-intersection.
//! [`flatten`] computes such a motion as a sequence of expansive phases and
//! [`verify_trajectory`] re-checks one independently.

pub mod chain;
pub mod error;
pub mod expander;
pub mod geom;
pub mod io;
pub mod maximin;
pub mod measure;
pub mod planner;
pub mod separation;
pub mod tolerance;

pub use chain::{
    betas, classify, first_intersection, origami_to_chain, random_chain, random_placement,
    self_intersects,
    ChainClass, IntrinsicChain, LengthClass, ProgressMeasure, SphericalChain,
};
pub use error::{Error, Result};
pub use expander::{
    check_expansive_trace, expansive_velocity, integrate_phase, Bound, IntegratorParams,
    PhaseEvent, PhaseOutcome, PinnedSubchain, Side, TraceReport, Velocity, VelocityField,
};
pub use geom::{GreatCircle, UnitVector};
pub use io::{parse_chain, parse_trajectory, ChainDocument, ChainForm, TrajectoryDocument};
pub use measure::{
    crossing_count, estimate_class_measures, largest_class, verify_measure_inequality,
    CrossingClassReport, CrossingCount, InequalityCheck,
};
pub use planner::{
    choose_moving_side, flatten, flatten_with, phase_bound, verify_trajectory, PhaseKind,
    PhaseRecord, PlannerParams, Snapshot, Trajectory, VerificationReport,
};
pub use separation::{
    belt_width_bound, certify_belt, class_measures, dual_nice_region, find_separation, Belt,
    BeltViolation, SeparationResult,
};
pub use tolerance::{ToleranceProfile, Tolerances};

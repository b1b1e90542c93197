//! Numerical tolerances shared across modules.

use serde::{Deserialize, Serialize};

/// Threshold for sign and degeneracy predicates on dot products.
pub const EPS_GEOM: f64 = 1e-10;
/// A joint counts as straight when its angle is within this of pi.
pub const EPS_FLAT: f64 = 1e-7;
/// Minimum hemisphere margin for a configuration to count as hemispherical.
pub const EPS_HEMI: f64 = 1e-9;
/// Slack on certified belt widths.
pub const EPS_BELT: f64 = 1e-6;
/// Optimal expansion slack below which no strict expansion exists.
pub const EPS_STRAIGHT: f64 = 1e-8;
/// Event localization tolerance (radians).
pub const EPS_EVENT: f64 = 1e-9;
/// Length preservation promised for every configuration the library builds.
pub const EPS_LENGTH: f64 = 1e-9;

/// Tolerances used when certifying a trajectory after the fact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed |dist(p_{i-1}, p_i) - alpha_i|.
    pub length: f64,
    /// Allowed decrease of a monotone quantity between snapshots.
    pub monotone: f64,
    /// Allowed deviation of a joint from pi in the final configuration.
    pub flat: f64,
    /// Allowed deviation of the final endpoint distance from 2*pi - alpha.
    pub endpoint: f64,
}

impl Tolerances {
    pub const fn strict() -> Self {
        Self {
            length: EPS_LENGTH,
            monotone: 1e-9,
            flat: EPS_FLAT,
            endpoint: 1e-7,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            length: 1e-7,
            monotone: 1e-7,
            flat: EPS_FLAT,
            endpoint: 1e-6,
        }
    }
}

/// Named tolerance profile selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    Strict,
    #[default]
    Default,
}

impl ToleranceProfile {
    pub fn tolerances(self) -> Tolerances {
        match self {
            ToleranceProfile::Strict => Tolerances::strict(),
            ToleranceProfile::Default => Tolerances::default(),
        }
    }
}

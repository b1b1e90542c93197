//! Measure on the space of great circles and the nice classes `N_0 ..= N_n`.
//!
//! A great circle is identified with its pair of antipodal poles, so the
//! measure of a set of circles is half the area of its pole set and the whole
//! space has measure 2pi. Estimates sample poles uniformly on the sphere.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::SphericalChain;
use crate::error::{Error, Result};
use crate::geom::{GreatCircle, UnitVector};
use crate::tolerance::EPS_GEOM;

/// Minimum sample count accepted by [`estimate_class_measures`].
pub const MIN_SAMPLES: usize = 1000;
const CHUNK: usize = 4096;
const MAX_RESAMPLES: usize = 1000;

/// How a great circle meets a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingCount {
    pub count: usize,
    /// `Some(0)` if nothing is crossed, `Some(i)` if only `e_i` is.
    pub nice_class: Option<usize>,
    /// The circle passes within `EPS_GEOM` of a vertex; counts are unreliable.
    pub degenerate: bool,
}

/// Classify a circle by the edges it crosses.
pub fn crossing_count(c: &GreatCircle, chain: &SphericalChain) -> CrossingCount {
    crossing_count_by_pole(&c.pole(), chain.vertices())
}

/// Short arcs are crossed exactly when their endpoints lie strictly on
/// opposite sides of the circle.
pub(crate) fn crossing_count_by_pole(pole: &UnitVector, vertices: &[UnitVector]) -> CrossingCount {
    let mut degenerate = false;
    let mut count = 0;
    let mut last = 0;
    let mut prev = pole.dot(&vertices[0]);
    degenerate |= prev.abs() <= EPS_GEOM;
    for (i, v) in vertices.iter().enumerate().skip(1) {
        let s = pole.dot(v);
        degenerate |= s.abs() <= EPS_GEOM;
        if (s > 0.0) != (prev > 0.0) {
            count += 1;
            last = i;
        }
        prev = s;
    }
    let nice_class = match count {
        0 => Some(0),
        1 => Some(last),
        _ => None,
    };
    CrossingCount {
        count,
        nice_class,
        degenerate,
    }
}

/// Monte Carlo estimates of the nice-class measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingClassReport {
    /// `mu_estimates[i]` estimates the measure of `N_i`.
    pub mu_estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub sample_count: usize,
    /// Measure of circles crossing two or more edges.
    pub non_nice: f64,
    pub non_nice_error: f64,
    /// Integral of the crossing count over all circles; equals twice the chain
    /// length.
    pub crossing_integral: f64,
    pub crossing_integral_error: f64,
    /// Estimate of `sum_{i>=1} mu(N_i) + 2 mu(N_0)` and its standard error.
    pub nice_weighted: f64,
    pub nice_weighted_error: f64,
    /// Samples redrawn because the circle passed through a vertex.
    pub resampled: usize,
}

impl CrossingClassReport {
    /// Sum of all class estimates plus the non-nice remainder.
    pub fn total(&self) -> f64 {
        self.mu_estimates.iter().sum::<f64>() + self.non_nice
    }

    /// Standard error of the sum of the nice-class estimates.
    pub fn nice_total_error(&self) -> f64 {
        let nice: f64 = self.mu_estimates.iter().sum();
        bernoulli_error(nice / TAU, self.sample_count)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    classes: Vec<u64>,
    non_nice: u64,
    crossings: u64,
    crossings_sq: u64,
    resampled: u64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            classes: vec![0; n + 1],
            ..Self::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.classes.iter_mut().zip(other.classes) {
            *a += b;
        }
        self.non_nice += other.non_nice;
        self.crossings += other.crossings;
        self.crossings_sq += other.crossings_sq;
        self.resampled += other.resampled;
        self
    }
}

fn bernoulli_error(p: f64, samples: usize) -> f64 {
    TAU * (p * (1.0 - p) / samples as f64).max(0.0).sqrt()
}

/// 2pi times the standard error of the mean of a sampled quantity.
fn mean_error(sum: f64, sum_sq: f64, samples: usize) -> f64 {
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    TAU * (var / n).sqrt()
}

/// Estimate the measure of every nice class from `samples` uniform poles.
///
/// Chunks of samples are drawn on independent streams of a seeded ChaCha8
/// generator and tallied with integer counters, so the report depends only on
/// the seed and not on the thread count.
pub fn estimate_class_measures(
    chain: &SphericalChain,
    samples: usize,
    seed: u64,
) -> Result<CrossingClassReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    let n = chain.n();
    let vertices = chain.vertices();
    let chunks = samples.div_ceil(CHUNK);
    let tallies: Vec<Result<Tally>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let size = CHUNK.min(samples - chunk * CHUNK);
            let mut t = Tally::new(n);
            for _ in 0..size {
                let mut tries = 0;
                let cc = loop {
                    let cc = crossing_count_by_pole(&UnitVector::random(&mut rng), vertices);
                    if !cc.degenerate {
                        break cc;
                    }
                    tries += 1;
                    if tries >= MAX_RESAMPLES {
                        return Err(Error::SamplingFailed {
                            attempts: tries,
                            reason: "every sampled circle passed through a vertex".into(),
                        });
                    }
                };
                t.resampled += tries as u64;
                match cc.nice_class {
                    Some(k) => t.classes[k] += 1,
                    None => t.non_nice += 1,
                }
                t.crossings += cc.count as u64;
                t.crossings_sq += (cc.count * cc.count) as u64;
            }
            Ok(t)
        })
        .collect();
    let mut tally = Tally::new(n);
    for t in tallies {
        tally = tally.merge(t?);
    }

    let frac = |c: u64| c as f64 / samples as f64;
    let mu_estimates = tally.classes.iter().map(|&c| TAU * frac(c)).collect();
    let standard_errors = tally
        .classes
        .iter()
        .map(|&c| bernoulli_error(frac(c), samples))
        .collect();

    // X = 2 on N_0, 1 on N_i, 0 elsewhere.
    let n0 = tally.classes[0] as f64;
    let ni: f64 = tally.classes[1..].iter().map(|&c| c as f64).sum();
    let x_sum = 2.0 * n0 + ni;
    let x_sq = 4.0 * n0 + ni;

    Ok(CrossingClassReport {
        mu_estimates,
        standard_errors,
        sample_count: samples,
        non_nice: TAU * frac(tally.non_nice),
        non_nice_error: bernoulli_error(frac(tally.non_nice), samples),
        crossing_integral: TAU * tally.crossings as f64 / samples as f64,
        crossing_integral_error: mean_error(
            tally.crossings as f64,
            tally.crossings_sq as f64,
            samples,
        ),
        nice_weighted: TAU * x_sum / samples as f64,
        nice_weighted_error: mean_error(x_sum, x_sq, samples),
        resampled: tally.resampled as usize,
    })
}

/// Outcome of checking `sum_{i>=1} mu(N_i) + 2 mu(N_0) >= 2(2pi - alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub lhs: f64,
    pub bound: f64,
    /// `lhs - bound`; may be slightly negative when `holds` is true.
    pub margin: f64,
    pub sigma: f64,
}

/// Lower bound `2(2pi - alpha)` on the weighted nice measure.
pub fn nice_measure_bound(alpha: f64) -> f64 {
    2.0 * (TAU - alpha)
}

/// Check the weighted nice-measure inequality within three standard errors.
pub fn verify_measure_inequality(report: &CrossingClassReport, alpha: f64) -> InequalityCheck {
    let bound = nice_measure_bound(alpha);
    let lhs = report.nice_weighted;
    let sigma = report.nice_weighted_error;
    InequalityCheck {
        holds: lhs >= bound - 3.0 * sigma,
        lhs,
        bound,
        margin: lhs - bound,
        sigma,
    }
}

/// Guaranteed measure `(4pi - 2 alpha) / (n + 2)` of the largest nice class.
pub fn largest_class_threshold(n: usize, alpha: f64) -> f64 {
    (2.0 * TAU - 2.0 * alpha) / (n as f64 + 2.0)
}

/// Index and estimate of the largest class, lowest index on ties.
///
/// Fails with an invariant error if even the largest class falls more than
/// three standard errors short of the guaranteed threshold.
pub fn largest_class(report: &CrossingClassReport, n: usize, alpha: f64) -> Result<(usize, f64)> {
    let (k, mu) = classes_by_measure(report)[0];
    let threshold = largest_class_threshold(n, alpha);
    let sigma = report.standard_errors[k];
    if mu < threshold - 3.0 * sigma {
        return Err(Error::invariant(format!(
            "largest nice class N_{k} has measure {mu} below threshold {threshold} (sigma {sigma})"
        )));
    }
    Ok((k, mu))
}

/// Class indices sorted by decreasing estimate, ties by increasing index.
pub fn classes_by_measure(report: &CrossingClassReport) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = report.mu_estimates.iter().copied().enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order
}

/// Exact measure of the circles crossing a single short arc.
pub fn arc_crossing_measure(length: f64) -> f64 {
    debug_assert!(length > 0.0 && length < PI);
    2.0 * length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::random_chain;
    use std::f64::consts::FRAC_PI_2;

    fn equatorial(lons: &[f64]) -> SphericalChain {
        SphericalChain::from_vertices(lons.iter().map(|&l| UnitVector::from_lat_lon(0.0, l)).collect())
            .unwrap()
    }

    #[test]
    fn equator_misses_northern_chain() {
        let c = SphericalChain::from_vertices(vec![
            UnitVector::from_lat_lon(0.3, 0.0),
            UnitVector::from_lat_lon(0.5, 1.0),
            UnitVector::from_lat_lon(0.2, 2.0),
        ])
        .unwrap();
        let cc = crossing_count(&GreatCircle::equator(), &c);
        assert_eq!((cc.count, cc.nice_class, cc.degenerate), (0, Some(0), false));
    }

    #[test]
    fn meridian_crosses_single_arc() {
        let c = equatorial(&[0.0, FRAC_PI_2]);
        let cc = crossing_count(&GreatCircle::meridian(PI / 4.0), &c);
        assert_eq!((cc.count, cc.nice_class), (1, Some(1)));
    }

    #[test]
    fn circle_crossing_fan_twice() {
        // A fan bulging north of the equator; the circle at latitude-free tilt
        // through the equator cuts e1 and e3.
        let c = SphericalChain::from_vertices(vec![
            UnitVector::from_lat_lon(-0.3, 0.0),
            UnitVector::from_lat_lon(0.4, 0.5),
            UnitVector::from_lat_lon(0.4, 1.0),
            UnitVector::from_lat_lon(-0.3, 1.5),
        ])
        .unwrap();
        let cc = crossing_count(&GreatCircle::equator(), &c);
        assert_eq!((cc.count, cc.nice_class), (2, None));
        for (i, expect) in [(1, true), (2, false), (3, true)] {
            assert_eq!(
                crate::geom::circle_crosses_arc(&GreatCircle::equator(), &c.edge(i).unwrap()).crosses(),
                expect
            );
        }
    }

    #[test]
    fn vertex_on_circle_is_degenerate() {
        let c = equatorial(&[0.0, 1.0]);
        assert!(crossing_count(&GreatCircle::meridian(0.0), &c).degenerate);
    }

    #[test]
    fn quarter_arc_measure_is_pi() {
        let c = equatorial(&[0.0, FRAC_PI_2]);
        let r = estimate_class_measures(&c, 100_000, 1).unwrap();
        let sigma = r.standard_errors[1];
        assert!((r.mu_estimates[1] - PI).abs() <= 3.0 * sigma, "{r:?}");
        assert!((r.crossing_integral - PI).abs() <= 3.0 * r.crossing_integral_error);
    }

    #[test]
    fn three_quarter_equator_has_no_avoiding_circles() {
        let c = equatorial(&[0.0, FRAC_PI_2, PI, 1.5 * PI]);
        let r = estimate_class_measures(&c, 50_000, 2).unwrap();
        assert_eq!(r.mu_estimates[0], 0.0);
        let check = verify_measure_inequality(&r, 1.5 * PI);
        assert!((check.bound - PI).abs() < 1e-15);
        assert!(check.holds);
    }

    #[test]
    fn report_is_independent_of_threads() {
        let c = random_chain(4, 4.5, 11).unwrap();
        let a = estimate_class_measures(&c, 30_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_class_measures(&c, 30_000, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn partition_sums_to_full_measure() {
        let c = random_chain(5, 5.0, 3).unwrap();
        let r = estimate_class_measures(&c, 20_000, 9).unwrap();
        assert!((r.total() - TAU).abs() < 1e-12);
    }

    #[test]
    fn rejects_too_few_samples() {
        let c = equatorial(&[0.0, 1.0]);
        assert!(estimate_class_measures(&c, 999, 0).is_err());
    }

    #[test]
    fn thresholds() {
        assert!((largest_class_threshold(3, 1.5 * PI) - PI / 5.0).abs() < 1e-15);
        assert_eq!(nice_measure_bound(TAU), 0.0);
    }

    fn synthetic(mu: Vec<f64>) -> CrossingClassReport {
        let k = mu.len();
        CrossingClassReport {
            standard_errors: vec![0.01; k],
            mu_estimates: mu,
            sample_count: 10_000,
            non_nice: 0.0,
            non_nice_error: 0.0,
            crossing_integral: 0.0,
            crossing_integral_error: 0.0,
            nice_weighted: 0.0,
            nice_weighted_error: 0.0,
            resampled: 0,
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let r = synthetic(vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(largest_class(&r, 3, 1.5 * PI).unwrap().0, 1);
    }

    #[test]
    fn small_largest_class_is_an_invariant_breach() {
        let r = synthetic(vec![0.0, 0.1, 0.1, 0.1]);
        let err = largest_class(&r, 3, 1.5 * PI).unwrap_err();
        assert!(!err.is_domain_rejection());
    }

    #[test]
    fn short_chain_may_prefer_avoiding_circles() {
        let c = random_chain(3, 1.0, 4).unwrap();
        let r = estimate_class_measures(&c, 20_000, 4).unwrap();
        let (k, mu) = largest_class(&r, 3, 1.0).unwrap();
        assert_eq!(k, 0);
        assert!(mu >= largest_class_threshold(3, 1.0));
    }
}

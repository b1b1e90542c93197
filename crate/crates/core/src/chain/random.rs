use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{first_intersection_of, IntrinsicChain, SphericalChain};
use crate::error::{Error, Result};
use crate::geom::UnitVector;

const MAX_ATTEMPTS: usize = 100_000;

/// Random embedded configuration with `n` edges of total length `total`.
///
/// Edge lengths are drawn uniformly and rescaled to `total`; the placement is
/// a random geodesic walk with uniform turning angles, rejected and redrawn
/// until it does not self-intersect. Deterministic per `seed`.
pub fn random_chain(n: usize, total: f64, seed: u64) -> Result<SphericalChain> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if !(total > 0.0 && total < TAU) {
        return Err(Error::InvalidInput(format!("total length {total} outside (0, 2pi)")));
    }
    if total / n as f64 >= PI {
        return Err(Error::InvalidInput(format!(
            "{n} edges cannot share length {total} with every edge below pi"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut length_rejects = 0usize;
    let mut crossing_rejects = 0usize;
    for _ in 0..MAX_ATTEMPTS {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.25..1.0)).collect();
        let scale = total / raw.iter().sum::<f64>();
        let lengths: Vec<f64> = raw.iter().map(|r| r * scale).collect();
        if lengths.iter().any(|&l| l >= PI - 1e-3) {
            length_rejects += 1;
            continue;
        }
        let vertices = random_walk(&mut rng, &lengths);
        if first_intersection_of(&vertices).is_some() {
            crossing_rejects += 1;
            continue;
        }
        let intrinsic = IntrinsicChain::new(lengths)?;
        return SphericalChain::new(vertices, intrinsic);
    }
    Err(Error::SamplingFailed {
        attempts: MAX_ATTEMPTS,
        reason: format!(
            "n={n}, total={total}, seed={seed}: {length_rejects} length draws exceeded pi, \
             {crossing_rejects} walks self-intersected"
        ),
    })
}

/// Random embedding of a given intrinsic chain: a seeded geodesic walk,
/// redrawn until it does not self-intersect.
pub fn random_placement(intrinsic: &IntrinsicChain, seed: u64) -> Result<SphericalChain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let vertices = random_walk(&mut rng, intrinsic.arc_lengths());
        if first_intersection_of(&vertices).is_none() {
            return SphericalChain::new(vertices, intrinsic.clone());
        }
    }
    Err(Error::SamplingFailed {
        attempts: MAX_ATTEMPTS,
        reason: format!("every walk with lengths {:?} self-intersected (seed={seed})", intrinsic.arc_lengths()),
    })
}

/// Random walk from a uniform start point, stepping along geodesics.
pub(crate) fn random_walk<R: Rng>(rng: &mut R, lengths: &[f64]) -> Vec<UnitVector> {
    let start = UnitVector::random(rng);
    let mut p = *start.as_vector();
    let mut t = random_tangent(rng, &p);
    let mut out = Vec::with_capacity(lengths.len() + 1);
    out.push(start);
    for (k, &len) in lengths.iter().enumerate() {
        if k > 0 {
            let turn = rng.random_range(-(PI - 1e-3)..(PI - 1e-3));
            t = (t * turn.cos() + p.cross(&t) * turn.sin()).normalize();
        }
        let (s, c) = len.sin_cos();
        let next = (p * c + t * s).normalize();
        t = (t * c - p * s).normalize();
        p = next;
        out.push(UnitVector::renormalized(p));
    }
    out
}

fn random_tangent<R: Rng>(rng: &mut R, p: &Vector3<f64>) -> Vector3<f64> {
    loop {
        let r = *UnitVector::random(rng).as_vector();
        let t = r - p * p.dot(&r);
        if t.norm() > 1e-3 {
            return t.normalize();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{classify, self_intersects, ChainClass, LengthClass};

    fn check(c: &SphericalChain, n: usize, total: f64) {
        assert_eq!(c.n(), n);
        assert!((c.total_length() - total).abs() < 1e-12);
        assert!(c.length_residual() <= 1e-9);
        assert!(!self_intersects(c));
        assert!(c.intrinsic().arc_lengths().iter().all(|&l| l > 0.0 && l < PI));
    }

    #[test]
    fn medium_three_edges() {
        let c = random_chain(3, 1.5 * PI, 1).unwrap();
        check(&c, 3, 1.5 * PI);
        assert_eq!(c.intrinsic().length_class(), LengthClass::Medium);
    }

    #[test]
    fn short_two_edges() {
        let c = random_chain(2, PI / 2.0, 7).unwrap();
        check(&c, 2, PI / 2.0);
        assert_eq!(c.intrinsic().length_class(), LengthClass::Short);
    }

    #[test]
    fn five_edges_near_two_pi() {
        let c = random_chain(5, 1.9 * PI, 3).unwrap();
        check(&c, 5, 1.9 * PI);
        assert_ne!(classify(&c), ChainClass::Flat);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_chain(6, 4.0, 99).unwrap(), random_chain(6, 4.0, 99).unwrap());
        assert_ne!(random_chain(6, 4.0, 99).unwrap(), random_chain(6, 4.0, 100).unwrap());
    }

    #[test]
    fn rejects_impossible_requests() {
        assert!(random_chain(2, 2.0 * PI, 1).is_err());
        assert!(random_chain(1, 3.5, 1).is_err());
        assert!(random_chain(0, 1.0, 1).is_err());
    }

    #[test]
    fn short_chains_are_hemispherical() {
        for seed in 0..1000 {
            let n = 2 + (seed as usize % 7);
            let total = 0.2 + (seed as f64 * 0.37) % (PI - 0.3);
            let c = random_chain(n, total, seed).unwrap();
            assert!(c.is_hemispherical(), "seed {seed}");
            assert_eq!(classify(&c), ChainClass::Hemispherical);
        }
    }
}

mod common;

use std::f64::consts::{PI, TAU};

use common::{dense_arc_distance, unit_vector, walk};
use proptest::prelude::*;
use sphfold::geom::Arc;
use sphfold::{betas, classify, random_chain, self_intersects, ChainClass, SphericalChain, UnitVector};
use sphfold::tolerance::EPS_FLAT;

prop_compose! {
    fn walk_chain()(
        start in unit_vector(),
        heading in unit_vector(),
        lengths in prop::collection::vec(0.1..1.6f64, 2..=7),
        deflections in prop::collection::vec(-(PI - 0.05)..(PI - 0.05), 6),
    ) -> Option<SphericalChain> {
        if lengths.iter().sum::<f64>() >= TAU - 1e-3 {
            return None;
        }
        SphericalChain::from_vertices(walk(start, heading, &lengths, &deflections)?).ok()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn self_intersects_matches_dense_sampling(chain in walk_chain()) {
        let chain = match chain { Some(c) => c, None => return Ok(()) };
        let v = chain.vertices();
        let arcs: Vec<Arc> = v.windows(2).map(|w| Arc::new(w[0], w[1]).unwrap()).collect();
        let mut nearest = f64::INFINITY;
        for i in 0..arcs.len() {
            for j in i + 2..arcs.len() {
                nearest = nearest.min(dense_arc_distance(&arcs[i], &arcs[j]));
            }
        }
        prop_assume!(!(1e-9..=1e-6).contains(&nearest));
        prop_assert_eq!(self_intersects(&chain), nearest < 1e-9, "nearest {}", nearest);
    }

    #[test]
    fn flat_chains_have_full_angle_sum(
        lon0 in 0.0..TAU,
        lengths in prop::collection::vec(0.05..1.5f64, 1..=8),
        tilt in unit_vector(),
    ) {
        let total: f64 = lengths.iter().sum();
        prop_assume!(total < TAU - 1e-3);
        let axis = tilt;
        let mut lon = lon0;
        let mut pts = vec![UnitVector::from_lat_lon(0.0, lon)];
        for l in &lengths {
            lon += l;
            pts.push(UnitVector::from_lat_lon(0.0, lon));
        }
        let pts: Vec<UnitVector> = pts.iter().map(|p| p.rotated(&axis, 0.7)).collect();
        let chain = SphericalChain::from_vertices(pts).unwrap();
        prop_assert_eq!(classify(&chain), ChainClass::Flat);
        let n = chain.n();
        let delta = betas(&chain).delta_sum;
        prop_assert!((delta - (n - 1) as f64 * PI).abs() <= n as f64 * EPS_FLAT);
    }

    #[test]
    fn classify_flat_implies_full_angle_sum(chain in walk_chain()) {
        let chain = match chain { Some(c) => c, None => return Ok(()) };
        if classify(&chain) == ChainClass::Flat {
            let n = chain.n();
            prop_assert!((betas(&chain).delta_sum - (n - 1) as f64 * PI).abs() <= n as f64 * EPS_FLAT);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn short_chains_are_hemispherical(n in 1usize..=10, frac in 0.01..0.999f64, seed in any::<u64>()) {
        let chain = random_chain(n, frac * PI, seed).unwrap();
        prop_assert_ne!(classify(&chain), ChainClass::SphereSpanning);
        prop_assert!(chain.hemisphere_margin().0 > 0.0);
    }

    #[test]
    fn sampled_chains_are_embedded_with_exact_lengths(n in 1usize..=10, frac in 0.01..0.98f64, seed in any::<u64>()) {
        let total = frac * TAU;
        prop_assume!(total / (n as f64) < PI - 0.01);
        let chain = random_chain(n, total, seed).unwrap();
        prop_assert!(!self_intersects(&chain));
        prop_assert!(chain.length_residual() <= 1e-9);
        prop_assert!((chain.total_length() - total).abs() <= 1e-12);
    }
}

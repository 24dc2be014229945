//! Randomized invariants across the probability core, the forward solver,
//! and the inverse recovery.

use proptest::collection::vec;
use proptest::prelude::*;

use ratelens::blahut::{baa_solve, BaaConfig};
use ratelens::ibaa::roundtrip_validate;
use ratelens::probcore::{
    conditional_y_given_x, entropy, marginal_y, mutual_information, Alphabet, DistortionMatrix,
    JointDist, Pmf,
};

fn pmf(n: usize) -> impl Strategy<Value = Pmf> {
    vec(1e-3..1.0f64, n).prop_map(move |w| Pmf::from_weights(Alphabet::indexed(n), &w).unwrap())
}

fn distortion(nx: usize, ny: usize) -> impl Strategy<Value = DistortionMatrix> {
    vec(0.0..10.0f64, nx * ny).prop_map(move |v| {
        DistortionMatrix::new(Alphabet::indexed(nx), Alphabet::indexed(ny), v).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn entropy_bounded_by_log_support(p in pmf(6)) {
        let h = entropy(&p);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (6f64).log2() + 1e-12);
    }

    #[test]
    fn mutual_information_within_entropy_bounds(
        weights in vec(1e-4..1.0f64, 12),
    ) {
        let j = JointDist::new(
            Alphabet::indexed(3),
            Alphabet::indexed(4),
            weights.iter().map(|w| w / weights.iter().sum::<f64>()).collect(),
        ).unwrap();
        let mi = mutual_information(&j);
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= entropy(&j.marginal_x()) + 1e-9);
        prop_assert!(mi <= entropy(&marginal_y(&j)) + 1e-9);
    }

    #[test]
    fn baa_result_is_consistent(
        p in pmf(5),
        d in distortion(5, 4),
        lambda in 0.0..6.0f64,
    ) {
        let r = baa_solve(&p, &d, &BaaConfig::with_lambda(lambda)).unwrap();
        prop_assert!(r.rate_bits >= -1e-12);
        prop_assert!(r.expected_distortion.is_finite());
        // rate equals the mutual information of the induced joint
        let j = JointDist::from_source_and_strategy(&p, &r.strategy).unwrap();
        prop_assert!((mutual_information(&j) - r.rate_bits).abs() < 1e-9);
        // the output marginal is the strategy's own marginal
        let p_y = marginal_y(&j);
        for (a, b) in p_y.probs().iter().zip(r.output_dist.probs()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        // and conditioning the joint recovers the strategy on live rows
        let back = conditional_y_given_x(&j).unwrap();
        for x in 0..5 {
            for y in 0..4 {
                prop_assert!((back.get(x, y) - r.strategy.get(x, y)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rate_monotone_in_lambda(
        p in pmf(4),
        d in distortion(4, 3),
        lo in 0.1..2.0f64,
        step in 0.1..2.0f64,
    ) {
        let r1 = baa_solve(&p, &d, &BaaConfig::with_lambda(lo)).unwrap();
        let r2 = baa_solve(&p, &d, &BaaConfig::with_lambda(lo + step)).unwrap();
        prop_assert!(r2.expected_distortion <= r1.expected_distortion + 1e-8);
        prop_assert!(r2.rate_bits >= r1.rate_bits - 1e-8);
    }

    #[test]
    fn inverse_recovery_roundtrip(
        p in pmf(5),
        d in distortion(5, 4),
        lambda0 in 0.2..4.0f64,
    ) {
        let report = roundtrip_validate(&p, &d, lambda0, 1e-12, 200_000).unwrap();
        prop_assert!(report.baa_converged);
        prop_assert!(
            report.max_abs_error <= 1e-6,
            "roundtrip error {} at lambda0 {}",
            report.max_abs_error,
            lambda0
        );
    }
}

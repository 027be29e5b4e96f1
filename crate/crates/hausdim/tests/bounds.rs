//! Cross-checks between the closed-form bound families.

use hausdim::bounds::{
    cf_derivative_bound, cf_profile, general_profile_1d, partial_derivative_bounds,
    perturbed_constants, perturbed_profile, profile_2d, tail_constant, Axis, EpsilonSeries,
};
use hausdim::DigitSetKind;

#[test]
fn derivative_bounds_follow_the_rising_product_recurrence() {
    for s in [0.3, 0.53, 0.9, 1.7] {
        for gamma in [1.0, 2.0, 10.0] {
            let mut expected = 2.0 * s / gamma;
            for order in 1u32..=4 {
                let got = cf_derivative_bound(s, gamma, order).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-14 * expected,
                    "order {order}: {got} vs {expected}"
                );
                expected *= (2.0 * s + order as f64) / gamma;
            }
        }
    }
}

#[test]
fn interval_profile_sits_inside_the_raw_derivative_bounds() {
    for s in [0.3, 0.53, 0.9] {
        for gamma in [1.0, 3.0] {
            let profile = cf_profile(s, gamma).unwrap();
            let d1 = cf_derivative_bound(s, gamma, 1).unwrap();
            let d2 = cf_derivative_bound(s, gamma, 2).unwrap();
            assert_eq!(profile.d1_abs, d1);
            assert_eq!(profile.d2_upper, d2);
            assert_eq!(profile.d2_lower, 0.0);
            assert!(profile.convexity_certified);
            assert_eq!(profile.log_slope, d1);
        }
    }
}

#[test]
fn perturbed_profile_agrees_with_the_general_construction() {
    for lambda in [0.05, 0.25, 0.5, 0.75, 1.0] {
        for s in [0.5, 0.65, 0.8] {
            let consts = perturbed_constants(lambda).unwrap();
            let eps = EpsilonSeries::from_ratio(consts.kappa).unwrap();
            let general = general_profile_1d(consts.c1, consts.c2, consts.m0, &eps, s);
            let special = perturbed_profile(s, lambda).unwrap();
            assert!(
                (general.d1_abs - special.d1_abs).abs() <= 1e-12 * general.d1_abs,
                "lambda {lambda}, s {s}: d1 mismatch"
            );
            assert!(
                (general.d2_upper - special.d2_upper).abs() <= 1e-12 * general.d2_upper,
                "lambda {lambda}, s {s}: d2 mismatch"
            );
            // The family-specific route certifies convexity and may lift
            // the lower second-derivative bound to zero; it must never
            // fall below the general one.
            assert!(special.d2_lower >= general.d2_lower);
            assert!(special.d2_lower <= special.d2_upper);
        }
    }
}

#[test]
fn epsilon_series_matches_the_geometric_closed_forms() {
    for kappa in [0.0, 0.1, 1.0 / 3.0, 0.9] {
        let eps = EpsilonSeries::from_ratio(kappa).unwrap();
        assert!((eps.sum_eps - 1.0 / (1.0 - kappa)).abs() <= 1e-14 * eps.sum_eps);
        assert!((eps.sum_eps_sq - 1.0 / (1.0 - kappa * kappa)).abs() <= 1e-14 * eps.sum_eps_sq);
    }
    assert!(EpsilonSeries::from_ratio(1.0).is_err());
    assert!(EpsilonSeries::from_ratio(-0.2).is_err());
}

#[test]
fn planar_axis_bounds_have_consistent_signs_and_envelopes() {
    for s in [1.1, 1.5, 1.86] {
        for gamma in [1.0, 2.0] {
            for axis in [Axis::X, Axis::Y] {
                for order in 1u32..=4 {
                    let (lo, hi) = partial_derivative_bounds(s, gamma, axis, order).unwrap();
                    assert!(lo <= hi, "axis {axis:?} order {order}: {lo} > {hi}");
                    let envelope = cf_derivative_bound(s, gamma, order).unwrap();
                    assert!(
                        lo.abs() <= envelope * (1.0 + 1e-14)
                            && hi.abs() <= envelope * (1.0 + 1e-14),
                        "axis {axis:?} order {order}: ({lo}, {hi}) outside envelope {envelope}"
                    );
                }
            }
            let profile = profile_2d(s, gamma).unwrap();
            assert!(profile.dxx_lower <= 0.0 && profile.dxx_upper >= 0.0);
            assert!(profile.dyy_lower <= 0.0 && profile.dyy_upper >= 0.0);
            assert!(profile.log_slope > 0.0);
        }
    }
}

#[test]
fn tail_constant_decreases_in_the_radius_and_moves_smoothly_in_s() {
    for kind in [DigitSetKind::I1, DigitSetKind::I2] {
        let mut last = f64::INFINITY;
        for radius in [3.0, 10.0, 50.0, 100.0, 200.0, 400.0] {
            let c = tail_constant(&kind, 1.7, radius).unwrap();
            assert!(c > 0.0);
            assert!(c < last, "tail constant must shrink as the radius grows");
            last = c;
        }
        let base = tail_constant(&kind, 1.7, 100.0).unwrap();
        let nudged = tail_constant(&kind, 1.7 + 1e-9, 100.0).unwrap();
        assert!(
            (nudged - base).abs() <= 1e-6 * base,
            "tail constant jumped under a 1e-9 exponent nudge"
        );
    }
}

#[test]
fn tail_constant_rejects_unsupported_inputs() {
    assert!(tail_constant(&DigitSetKind::I1, 1.0, 100.0).is_err());
    assert!(tail_constant(&DigitSetKind::I1, 1.7, 2.5).is_err());
    assert!(tail_constant(&DigitSetKind::I3, 1.7, 100.0).is_err());
    assert!(tail_constant(&DigitSetKind::Explicit(vec![(1, 0)]), 1.7, 100.0).is_err());
}

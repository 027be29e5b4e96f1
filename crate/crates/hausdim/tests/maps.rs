//! Map family properties checked on dense grids and random inputs.

use hausdim::{ContractionMap1D, DigitSetKind, DigitSetSpec, IfsProblem, MoebiusMap2D};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| i as f64 / n as f64)
}

#[test]
fn interval_maps_keep_the_unit_interval_invariant() {
    let families: Vec<Vec<ContractionMap1D>> = vec![
        [1u32, 2]
            .iter()
            .map(|&m| ContractionMap1D::moebius(m).unwrap())
            .collect(),
        [3u32, 7, 50]
            .iter()
            .map(|&m| ContractionMap1D::moebius(m).unwrap())
            .collect(),
        vec![
            ContractionMap1D::perturbed(1, 0.0).unwrap(),
            ContractionMap1D::perturbed(2, 0.0).unwrap(),
        ],
        vec![
            ContractionMap1D::perturbed(1, 1.0).unwrap(),
            ContractionMap1D::perturbed(2, 1.0).unwrap(),
        ],
        vec![
            ContractionMap1D::perturbed(1, 0.37).unwrap(),
            ContractionMap1D::perturbed(2, 0.37).unwrap(),
        ],
    ];
    for maps in &families {
        for map in maps {
            for x in grid(1000) {
                let y = map.eval(x).unwrap();
                assert!(
                    (0.0..=1.0).contains(&y),
                    "image {y} of {x} left the unit interval"
                );
                let d = map.derivative_magnitude(x).unwrap();
                // The digit-1 map attains magnitude 1 exactly at the left
                // endpoint; contraction is strict everywhere else.
                assert!(d > 0.0 && d <= 1.0, "derivative magnitude {d} out of range");
                if x > 1e-12 {
                    assert!(d < 1.0, "derivative magnitude {d} not contracting at {x}");
                }
            }
        }
    }
}

#[test]
fn two_fold_compositions_contract_quadratically() {
    // Composing any two digit maps scales lengths by at most
    // (1 + gamma^2)^(-2), the square of the one-step bound at the
    // farthest admissible point.
    for digits in [vec![1u32, 2], vec![2, 3], vec![1, 2, 3, 4, 5]] {
        let gamma = *digits.iter().min().unwrap() as f64;
        let bound = (1.0 + gamma * gamma).powi(-2);
        let maps: Vec<_> = digits
            .iter()
            .map(|&m| ContractionMap1D::moebius(m).unwrap())
            .collect();
        for inner in &maps {
            for outer in &maps {
                for x in grid(400) {
                    let mid = inner.eval(x).unwrap();
                    let d = outer.derivative_magnitude(mid).unwrap()
                        * inner.derivative_magnitude(x).unwrap();
                    assert!(
                        d <= bound * (1.0 + 1e-14),
                        "two-fold derivative {d} exceeds {bound}"
                    );
                }
            }
        }
    }
}

#[test]
fn weight_matches_derivative_power_for_moebius_digits() {
    for m in [1u32, 2, 5, 100] {
        let map = ContractionMap1D::moebius(m).unwrap();
        for x in grid(200) {
            for s in [0.1, 0.5, 0.97, 1.8] {
                let w = map.weight(x, s).unwrap();
                let d = map.derivative_magnitude(x).unwrap().powf(s);
                assert!(
                    (w - d).abs() <= 1e-13 * d,
                    "weight {w} vs derivative power {d}"
                );
            }
        }
    }
}

#[test]
fn half_disk_digit_maps_land_in_the_half_disk_after_folding() {
    let spec = DigitSetSpec::new(DigitSetKind::I1, 40.0).unwrap();
    let digits = spec.enumerate().unwrap();
    assert!(!digits.is_empty());
    let samples = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.5),
        Complex64::new(0.5, -0.5),
        Complex64::new(0.2, 0.4),
        Complex64::new(0.9, 0.1),
    ];
    for &(m, n) in &digits {
        let map = MoebiusMap2D::from_lattice(m, n).unwrap();
        for &z in &samples {
            let w = map.eval(z);
            let folded = if w.im < 0.0 { w.conj() } else { w };
            let centered = folded - Complex64::new(0.5, 0.0);
            assert!(
                centered.norm() <= 0.5 + 1e-12,
                "image {w} of {z} under digit ({m},{n}) left the half disk"
            );
            assert!(folded.im >= 0.0);
        }
    }
}

#[test]
fn infinite_digit_sets_grow_with_the_truncation_radius() {
    let small = DigitSetSpec::new(DigitSetKind::I1, 10.0)
        .unwrap()
        .enumerate()
        .unwrap();
    let large = DigitSetSpec::new(DigitSetKind::I1, 30.0)
        .unwrap()
        .enumerate()
        .unwrap();
    assert!(small.len() < large.len());
    for d in &small {
        assert!(large.contains(d), "digit {d:?} lost when the radius grew");
    }
    let i2 = DigitSetSpec::new(DigitSetKind::I2, 30.0)
        .unwrap()
        .enumerate()
        .unwrap();
    for &(_, n) in &i2 {
        assert!(n >= 0, "quarter-plane set contains a negative row");
    }
    assert!(i2.iter().all(|d| large.contains(d)));
}

#[test]
fn problem_constructors_expose_consistent_metadata() {
    let cf = IfsProblem::continued_fraction(&[2, 4, 6]).unwrap();
    assert_eq!(cf.dimension(), 1);
    assert_eq!(cf.gamma(), 2.0);

    let pert = IfsProblem::perturbed(0.5).unwrap();
    assert_eq!(pert.dimension(), 1);
    let (lo, hi) = pert.s_domain_hint();
    assert!(lo < hi);

    let spec = DigitSetSpec::new(DigitSetKind::I3, 3.0).unwrap();
    let complex = IfsProblem::complex_set(spec).unwrap();
    assert_eq!(complex.dimension(), 2);
    assert_eq!(complex.gamma(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weight_is_multiplicative_in_the_exponent(
        x in 0.0f64..=1.0,
        s1 in 0.01f64..1.5,
        s2 in 0.01f64..1.5,
        pick in 0usize..4,
    ) {
        let map = match pick {
            0 => ContractionMap1D::moebius(1).unwrap(),
            1 => ContractionMap1D::moebius(7).unwrap(),
            2 => ContractionMap1D::perturbed(1, 0.8).unwrap(),
            _ => ContractionMap1D::perturbed(2, 0.3).unwrap(),
        };
        let combined = map.weight(x, s1 + s2).unwrap();
        let split = map.weight(x, s1).unwrap() * map.weight(x, s2).unwrap();
        prop_assert!(
            (combined - split).abs() <= 1e-14 * combined.max(split),
            "weight({s1}+{s2}) = {combined} but product = {split}"
        );
    }

    #[test]
    fn half_disk_weight_is_the_derivative_jacobian_power(
        re in 0.0f64..=1.0,
        im in 0.0f64..=0.5,
        s in 0.5f64..2.5,
        m in 1i64..6,
        n in -5i64..6,
    ) {
        let z = Complex64::new(re, im);
        let map = MoebiusMap2D::from_lattice(m, n).unwrap();
        // |d theta / dz| = |z + b|^(-2), so the weight is |z + b|^(-2s).
        let w = map.weight(z, s);
        let direct = (z + map.digit()).norm().powf(-2.0 * s);
        prop_assert!((w - direct).abs() <= 1e-12 * direct.max(w));
    }
}

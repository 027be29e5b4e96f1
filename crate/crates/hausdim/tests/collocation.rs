//! Bracket matrix structure: ordering, row sums, convergence rate, and
//! the regularity cone of the dominant eigenvector.

use std::collections::HashMap;

use hausdim::bounds::{cf_profile, perturbed_profile};
use hausdim::collocation::{assemble_1d, assemble_2d};
use hausdim::mesh::{build_mesh_1d, build_mesh_2d, refine_domain_1d};
use hausdim::spectral::power_iterate;
use hausdim::{
    AssembleOptions, ContractionMap1D, DigitSetKind, DigitSetSpec, IfsProblem, SparseNonnegMatrix,
};

fn cf_problem(digits: &[u32]) -> IfsProblem {
    IfsProblem::continued_fraction(digits).unwrap()
}

fn cf_pair(digits: &[u32], h: f64, s: f64) -> (hausdim::BracketMatrices, hausdim::mesh::Mesh1D) {
    let problem = cf_problem(digits);
    let maps: Vec<_> = digits
        .iter()
        .map(|&m| ContractionMap1D::moebius(m).unwrap())
        .collect();
    let domain = refine_domain_1d(&maps, 2).unwrap();
    let mesh = build_mesh_1d(&domain, h).unwrap();
    let gamma = *digits.iter().min().unwrap() as f64;
    let profile = cf_profile(s, gamma).unwrap();
    let pair = assemble_1d(&problem, &mesh, s, &profile, &AssembleOptions::default()).unwrap();
    (pair, mesh)
}

fn assert_entrywise_ordered(a: &SparseNonnegMatrix, b: &SparseNonnegMatrix) {
    assert_eq!(a.n(), b.n());
    for row in 0..a.n() {
        let (cols_b, vals_b) = b.row_entries(row);
        let b_map: HashMap<u32, f64> = cols_b.iter().copied().zip(vals_b.iter().copied()).collect();
        let (cols_a, vals_a) = a.row_entries(row);
        for (&col, &val) in cols_a.iter().zip(vals_a.iter()) {
            assert!(val >= 0.0);
            let upper = b_map
                .get(&col)
                .unwrap_or_else(|| panic!("row {row} col {col} present in A but not in B"));
            assert!(
                val <= *upper * (1.0 + 1e-15),
                "row {row} col {col}: A = {val} exceeds B = {upper}"
            );
        }
    }
}

#[test]
fn bracket_matrices_are_entrywise_ordered_1d() {
    for s in [0.3, 0.531, 0.9] {
        let (pair, _) = cf_pair(&[1, 2], 2e-3, s);
        assert_entrywise_ordered(&pair.a, &pair.b);
    }
}

#[test]
fn bracket_matrices_are_entrywise_ordered_2d() {
    let spec = DigitSetSpec::new(DigitSetKind::I3, 3.0).unwrap();
    let problem = IfsProblem::complex_set(spec).unwrap();
    let mesh = build_mesh_2d(0.05, 1).unwrap();
    let profile = hausdim::bounds::profile_2d(1.5, 1.0).unwrap();
    let pair = assemble_2d(&problem, &mesh, 1.5, &profile, &AssembleOptions::default()).unwrap();
    assert_entrywise_ordered(&pair.a, &pair.b);
    assert!(pair.tail_used.is_none());
}

#[test]
fn row_sums_against_ones_sandwich_the_raw_weight_sums() {
    // Stencil weights sum to 1, so B applied to the constant vector
    // dominates the raw weight sums and A falls below them.
    let digits = [1u32, 2];
    let s = 0.531;
    let (pair, mesh) = cf_pair(&digits, 1e-3, s);
    let ones = vec![1.0; pair.a.n()];
    let upper = pair.b.apply(&ones).unwrap();
    let lower = pair.a.apply(&ones).unwrap();
    let maps: Vec<_> = digits
        .iter()
        .map(|&m| ContractionMap1D::moebius(m).unwrap())
        .collect();
    for (k, &x) in mesh.nodes().iter().enumerate() {
        let raw: f64 = maps.iter().map(|map| map.weight(x, s).unwrap()).sum();
        assert!(
            lower[k] <= raw * (1.0 + 1e-13),
            "node {k}: lower row sum {} above raw {raw}",
            lower[k]
        );
        assert!(
            upper[k] >= raw * (1.0 - 1e-13),
            "node {k}: upper row sum {} below raw {raw}",
            upper[k]
        );
    }
}

#[test]
fn certified_gap_shrinks_quadratically_with_the_mesh() {
    let s = 0.5313;
    let gap_at = |h: f64| {
        let (pair, _) = cf_pair(&[1, 2], h, s);
        let upper = power_iterate(&pair.b, 1e-13, 100_000, None).unwrap();
        let lower = power_iterate(&pair.a, 1e-13, 100_000, None).unwrap();
        upper.lambda_est - lower.lambda_est
    };
    let coarse = gap_at(1e-3);
    let fine = gap_at(5e-4);
    let ratio = coarse / fine;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "gap ratio {ratio} is not the quadratic rate"
    );
}

#[test]
fn finite_digit_sets_ignore_the_truncation_radius() {
    let pair_at = |radius: f64| {
        let spec = DigitSetSpec::new(DigitSetKind::I3, radius).unwrap();
        let problem = IfsProblem::complex_set(spec).unwrap();
        let mesh = build_mesh_2d(0.05, 1).unwrap();
        let profile = hausdim::bounds::profile_2d(1.5, 1.0).unwrap();
        assemble_2d(&problem, &mesh, 1.5, &profile, &AssembleOptions::default()).unwrap()
    };
    let small = pair_at(3.0);
    let large = pair_at(500.0);
    assert_eq!(small.a, large.a);
    assert_eq!(small.b, large.b);
}

#[test]
fn single_linear_map_has_closed_form_radius() {
    let problem = IfsProblem::Interval {
        maps: vec![ContractionMap1D::perturbed(1, 0.0).unwrap()],
        gamma: 1.0,
        domain: vec![(0.0, 1.0)],
        s_domain_hint: (0.1, 0.9),
    };
    let maps = [ContractionMap1D::perturbed(1, 0.0).unwrap()];
    let domain = refine_domain_1d(&maps, 1).unwrap();
    let mesh = build_mesh_1d(&domain, 1e-2).unwrap();
    for s in [0.45, 0.7, 1.1] {
        let profile = perturbed_profile(s, 0.0).unwrap();
        let pair = assemble_1d(&problem, &mesh, s, &profile, &AssembleOptions::default()).unwrap();
        let expected = 3.0f64.powf(-s);
        for m in [&pair.a, &pair.b] {
            let spec = power_iterate(m, 1e-13, 10_000, None).unwrap();
            assert!(
                (spec.lambda_est - expected).abs() <= 1e-13 * expected,
                "radius {} vs 3^(-{s}) = {expected}",
                spec.lambda_est
            );
        }
    }
}

#[test]
fn middle_thirds_pair_crosses_one_exactly_at_the_known_dimension() {
    let problem = IfsProblem::perturbed(0.0).unwrap();
    let maps = [
        ContractionMap1D::perturbed(1, 0.0).unwrap(),
        ContractionMap1D::perturbed(2, 0.0).unwrap(),
    ];
    let domain = refine_domain_1d(&maps, 2).unwrap();
    let mesh = build_mesh_1d(&domain, 1e-3).unwrap();
    let s = 2.0f64.ln() / 3.0f64.ln();
    let profile = perturbed_profile(s, 0.0).unwrap();
    let pair = assemble_1d(&problem, &mesh, s, &profile, &AssembleOptions::default()).unwrap();
    for m in [&pair.a, &pair.b] {
        let spec = power_iterate(m, 1e-13, 10_000, None).unwrap();
        assert!(
            (spec.lambda_est - 1.0).abs() <= 1e-12,
            "radius {} should be 1 at the exact dimension",
            spec.lambda_est
        );
    }
}

#[test]
fn perron_witness_lies_in_the_regularity_cone() {
    // The dominant eigenvector inherits the log-Lipschitz regularity of
    // the eigenfunction, so node values may vary at most like
    // exp(M |x - y|) with M one unit above the certified slope.
    let s = 0.5313;
    let (pair, mesh) = cf_pair(&[1, 2], 1e-3, s);
    let profile = cf_profile(s, 1.0).unwrap();
    let m = profile.log_slope + 1.0;
    let spec = power_iterate(&pair.b, 1e-13, 200_000, None).unwrap();
    assert!(spec.converged);
    let w = &spec.witness;
    let nodes = mesh.nodes();
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            let bound = (m * (nodes[i] - nodes[j]).abs()).exp();
            assert!(
                w[i] <= w[j] * bound * (1.0 + 1e-9),
                "witness ratio {} at distance {} beats exp bound {bound}",
                w[i] / w[j],
                (nodes[i] - nodes[j]).abs()
            );
        }
    }
}

mod common;

use common::*;
use hankel_lab::hankel::{build_matrix, operator_norm};
use hankel_lab::minimal::{classify, classify_homogeneous};
use hankel_lab::quadrature::{h1_norm_2hom, hp_norm};
use hankel_lab::{Complex64, MultiIndex, QuadratureSpec, Symbol};
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn entries_depend_only_on_index_sum(seed in any::<u64>(), dim in 1usize..=3) {
        let s = random_symbol(&mut rng(seed), dim, 4, 5, true);
        let h = build_matrix(&s);
        for (i, g) in h.row_basis.iter().enumerate() {
            for (j, b) in h.column_basis.iter().enumerate() {
                prop_assert_eq!(h.entries[(i, j)], s.coefficient(&(g + b)).conj() + 0.0);
            }
        }
    }

    #[test]
    fn block_and_full_classification_agree(seed in any::<u64>(), dim in 1usize..=3, m in 1u32..=4) {
        let s = random_homogeneous(&mut rng(seed), dim, m, false);
        let a = classify(&s, 1e-9).unwrap();
        let b = classify_homogeneous(&s, 1e-9).unwrap();
        prop_assert_eq!(a.status, b.status, "{}: gaps {} and {}", s, a.gap, b.gap);
        prop_assert!(a.gap >= -1e-9);
    }

    #[test]
    fn status_ignores_scaling_and_relabelling(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let s = random_symbol(&mut r, dim, 3, 4, true);
        let base = classify(&s, 1e-9).unwrap().status;
        let k = Complex64::new(r.random_range(0.5..2.0), r.random_range(-2.0..2.0));
        prop_assert_eq!(classify(&s.scale(k), 1e-9).unwrap().status, base);
        let perm: Vec<usize> = (0..dim).rev().collect();
        prop_assert_eq!(classify(&s.permute_variables(&perm).unwrap(), 1e-9).unwrap().status, base);
    }

    #[test]
    fn h2_norm_bounds_operator_norm(seed in any::<u64>(), dim in 1usize..=4) {
        let s = random_symbol(&mut rng(seed), dim, 3, 5, true);
        prop_assert!(s.h2_norm() <= operator_norm(&s).value + 1e-10);
    }
}

proptest! {
    #![proptest_config(config(20))]

    #[test]
    fn one_dimensional_reduction_matches_grid(seed in any::<u64>(), m in 1u32..=4) {
        let s = random_homogeneous(&mut rng(seed), 2, m, false);
        let reduced = h1_norm_2hom(&s, 1e-12).unwrap();
        let grid = hp_norm(&s, 1.0, &QuadratureSpec::tensor(256)).unwrap();
        let diff = (reduced.value - grid.value).abs();
        prop_assert!(
            diff <= reduced.error_bound + grid.error_bound,
            "{}: {} vs {} (bounds {:e}, {:e})", s, reduced.value, grid.value, reduced.error_bound, grid.error_bound
        );
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent(seed in any::<u64>()) {
        let s = random_symbol(&mut rng(seed), 2, 3, 4, true);
        let spec = QuadratureSpec::monte_carlo(seed, 20_000);
        let a = hp_norm(&s, 2.0, &spec).unwrap();
        let b = hp_norm(&s, 2.0, &spec).unwrap();
        prop_assert_eq!(a.value, b.value);
        // 3 standard errors; allow a generous multiple so the test is not flaky
        prop_assert!((a.value - s.h2_norm()).abs() <= 3.0 * a.error_bound + 1e-12);
    }
}

#[test]
fn permuting_variables_preserves_operator_norm() {
    let s = Symbol::from_real(3, &[(&[2, 1, 0], 1.0), (&[0, 1, 1], -0.5), (&[1, 0, 0], 0.25)]).unwrap();
    let p = s.permute_variables(&[2, 0, 1]).unwrap();
    assert!((operator_norm(&s).value - operator_norm(&p).value).abs() < 1e-12);
    assert_eq!(p.coefficient(&MultiIndex::new(vec![1, 0, 2])), Complex64::new(1.0, 0.0));
}

mod common;

use agler_core::agler::{closed_form_product, extremal_pair, sample_points, solve_constraints, Flavor};
use agler_core::analysis::commutator;
use agler_core::corpus::corpus;
use agler_core::linalg::{max_abs, singular_values};
use agler_core::poly2::Var;
use agler_core::shiftop::{
    agler_split, backshift_matrix, build_frame, commutator_kernel_defect, commutator_projection_defect,
    compress_shift, expected_frame_dim, shift_formula_defect, DEFAULT_DROP_TOL,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn compressed_shifts_are_contractions_with_backshift_adjoints(f in common::product_within(2, 2, 0.6)) {
        let theta = common::as_inner(&f);
        let frame = build_frame(&theta, 4, 4, 128, DEFAULT_DROP_TOL).unwrap();
        prop_assert_eq!(frame.dim(), expected_frame_dim(theta.degree(), (4, 4)));
        for var in [Var::Z1, Var::Z2] {
            let s = compress_shift(&frame, var).unwrap();
            prop_assert!(singular_values(&s.entries)[0] <= 1.0 + 1e-8);
            prop_assert!(max_abs(&(s.entries.adjoint() - backshift_matrix(&frame, var))) <= 1e-8);
            let cm = commutator(&s).entries;
            prop_assert!(cm.trace().norm() <= 1e-10);
            prop_assert!(max_abs(&(&cm - cm.adjoint())) <= 1e-12);
        }
    }

    #[test]
    fn shift_formula_matches_projection(f in common::product_within(2, 2, 0.6), seed in 0u64..1000) {
        let frame = build_frame(&common::as_inner(&f), 4, 4, 128, DEFAULT_DROP_TOL).unwrap();
        for var in [Var::Z1, Var::Z2] {
            prop_assert!(shift_formula_defect(&frame, var, 5, seed).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn commutator_projects_onto_the_z1_slice(f in common::product_within(2, 2, 0.6), seed in 0u64..1000) {
        let (pair, _) = closed_form_product(&f);
        let split = agler_split(&common::as_inner(&f), &pair, 5, 128).unwrap();
        prop_assert!(commutator_projection_defect(&split, 10, seed).unwrap() <= 1e-7);
    }

    #[test]
    fn commutator_on_maximal_kernels(f in common::product(1, 3), seed in 0u64..1000) {
        prop_assume!(f.phi.degree() == 1);
        let (pair, _) = closed_form_product(&f);
        let points = sample_points(seed, 10, 0.8);
        prop_assert!(commutator_kernel_defect(&common::as_inner(&f), &pair.k1, &points, 128).unwrap() <= 1e-6);
    }
}

#[test]
fn commutator_on_maximal_kernels_of_rational_functions() {
    for e in corpus() {
        if e.function.degree().0 != 1 {
            continue;
        }
        let sys = solve_constraints(&e.function.to_rational()).unwrap();
        let pair = extremal_pair(&sys, Flavor::Max1Min2).unwrap();
        let d = commutator_kernel_defect(&e.function, &pair.k1, &sample_points(5, 10, 0.8), 128).unwrap();
        assert!(d <= 1e-6, "{}: {d:e}", e.name);
    }
}

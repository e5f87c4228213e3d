mod common;

use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wcs_core::objective::{eval_h0, eval_h1, eval_h2, eval_piw, grad_h1, grad_h2, grad_piw};
use wcs_core::oracle::partial_permutation_objective;
use wcs_core::{enumerate_partial_permutations, selection_mask, Objective, RelaxationKind};

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=4)
        .prop_flat_map(|m| (Just(m), m..=5))
        .prop_flat_map(|(m, n)| (Just(m), Just(n), 1..=m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relaxations_agree_on_vertices((m, n, l) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(m, n, l, 1.0, &mut rng);
        let (ag, ah) = (inst.a_g().view(), inst.a_h().view());
        for p in enumerate_partial_permutations(m, n, l).unwrap() {
            let x = p.to_matrix();
            let truth = partial_permutation_objective(&inst, &p);
            let h0 = eval_h0(x.view(), ag, ah).unwrap();
            let h1 = eval_h1(x.view(), ag, ah).unwrap();
            let h2 = eval_h2(x.view(), ag, ah).unwrap();
            prop_assert!((h0 - truth).abs() <= 1e-9, "h0 {} vs {}", h0, truth);
            prop_assert!((h1 - truth).abs() <= 1e-9, "h1 {} vs {}", h1, truth);
            prop_assert!((h2 - truth).abs() <= 1e-9, "h2 {} vs {}", h2, truth);
            if l == m {
                let piw = eval_piw(x.view(), ag, ah, l).unwrap();
                prop_assert!((piw - truth).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences((m, n, l) in dims(), seed in any::<u64>(), zeta in -1.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(m, n, l, 0.7, &mut rng);
        let x = random_interior_point(m, n, l, &mut rng);
        let (ag, ah) = (inst.a_g().view(), inst.a_h().view());
        let h = 1e-5;

        let fd = numeric_gradient(|y| eval_h1(y.view(), ag, ah).unwrap(), &x, h);
        prop_assert!(relative_error(&grad_h1(x.view(), ag, ah).unwrap(), &fd) <= 1e-4);
        let fd = numeric_gradient(|y| eval_h2(y.view(), ag, ah).unwrap(), &x, h);
        prop_assert!(relative_error(&grad_h2(x.view(), ag, ah).unwrap(), &fd) <= 1e-4);
        if l == m {
            let fd = numeric_gradient(|y| eval_piw(y.view(), ag, ah, l).unwrap(), &x, h);
            prop_assert!(relative_error(&grad_piw(x.view(), ag, ah, l).unwrap(), &fd) <= 1e-4);
        }
        for kind in [RelaxationKind::H1, RelaxationKind::H2] {
            let obj = Objective::new(&inst, kind).unwrap();
            let fd = numeric_gradient(|y| obj.eval_f(y.view()), &x, h);
            prop_assert!(relative_error(&obj.grad_f(x.view()), &fd) <= 1e-4);
            let fd = numeric_gradient(|y| obj.eval_j(y.view(), zeta), &x, h);
            prop_assert!(relative_error(&obj.grad_j(x.view(), zeta), &fd) <= 1e-4);
        }
    }

    #[test]
    fn selection_mask_marks_matched_rows((m, n, l) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_partial_permutation(m, n, l, &mut rng);
        let u = selection_mask(p.to_matrix().view());
        for i in 0..m {
            for j in 0..m {
                let both = p.col_of(i).is_some() && p.col_of(j).is_some();
                prop_assert_eq!(u[[i, j]], if both { 1.0 } else { 0.0 });
            }
        }
        // Idempotent under the Hadamard product and symmetric.
        prop_assert_eq!(&u * &u, u.clone());
        prop_assert_eq!(u.t().to_owned(), u.clone());
        prop_assert_eq!(u.sum(), (l * l) as f64);
    }

    #[test]
    fn j_is_continuous_at_zero((m, n, l) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(m, n, l, 0.5, &mut rng);
        let x = random_interior_point(m, n, l, &mut rng);
        let obj = Objective::new(&inst, RelaxationKind::H1).unwrap();
        let f = obj.eval_f(x.view());
        for eps in [1e-8, -1e-8] {
            prop_assert!((obj.eval_j(x.view(), eps) - f).abs() <= 1e-6 * (1.0 + f.abs()));
        }
        prop_assert_eq!(obj.eval_j(x.view(), 0.0), f);
        let tr = x.mapv(|v| v * v).sum();
        prop_assert!((obj.eval_j(x.view(), 1.0) - tr).abs() <= 1e-12);
        prop_assert!((obj.eval_j(x.view(), -1.0) + tr).abs() <= 1e-12);
    }

    #[test]
    fn literal_gradient_differs_only_by_alpha((m, n, l) in dims(), seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(m, n, l, alpha, &mut rng);
        let x = random_interior_point(m, n, l, &mut rng);
        let consistent = Objective::new(&inst, RelaxationKind::H1).unwrap();
        let literal = Objective::new(&inst, RelaxationKind::H1).unwrap().with_literal_gradient(true);
        let s = consistent.grad_structural(x.view());
        let diff: Array2<f64> = literal.grad_f(x.view()) - consistent.grad_f(x.view());
        prop_assert!(relative_error(&diff, &(s * (1.0 - alpha))) <= 1e-12);
    }
}

mod common;

use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wcs_core::{
    discretize, enumerate_partial_permutations, solve_direction_exact, solve_direction_fast,
    solve_rectangular_assignment, RelaxedAssignment,
};

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=4)
        .prop_flat_map(|m| (Just(m), m..=5))
        .prop_flat_map(|(m, n)| (Just(m), Just(n), 1..=m))
}

fn random_scores(m: usize, n: usize, seed: u64, integer: bool) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((m, n), |_| {
        if integer {
            rng.random_range(-3..=3) as f64
        } else {
            rng.random::<f64>() * 10.0 - 5.0
        }
    })
}

fn enumerated_best(s: &Array2<f64>, l: usize) -> f64 {
    enumerate_partial_permutations(s.nrows(), s.ncols(), l)
        .unwrap()
        .map(|p| p.score(s.view()))
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exact_matches_enumeration((m, n, l) in dims(), seed in any::<u64>(), integer in any::<bool>()) {
        let s = random_scores(m, n, seed, integer);
        let p = solve_direction_exact(s.view(), l).unwrap();
        prop_assert_eq!(p.size(), l);
        prop_assert!((p.score(s.view()) - enumerated_best(&s, l)).abs() <= 1e-9);
    }

    #[test]
    fn fast_never_beats_exact((m, n, l) in dims(), seed in any::<u64>(), integer in any::<bool>()) {
        let s = random_scores(m, n, seed, integer);
        let exact = solve_direction_exact(s.view(), l).unwrap().score(s.view());
        let fast = solve_direction_fast(s.view(), l).unwrap();
        prop_assert_eq!(fast.size(), l);
        prop_assert!(fast.score(s.view()) <= exact + 1e-9);
        if l == m {
            prop_assert!((fast.score(s.view()) - exact).abs() <= 1e-9);
        }
    }

    #[test]
    fn rectangular_assignment_is_optimal((m, n, _l) in dims(), seed in any::<u64>()) {
        let s = random_scores(m, n, seed, false);
        let p = solve_rectangular_assignment(s.view()).unwrap();
        prop_assert_eq!(p.size(), m);
        prop_assert!((p.score(s.view()) - enumerated_best(&s, m)).abs() <= 1e-9);
    }

    #[test]
    fn affine_rescaling_keeps_the_optimum((m, n, l) in dims(), seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let s = random_scores(m, n, seed, false);
        let t = s.mapv(|v| a * v + b);
        let p = solve_direction_exact(s.view(), l).unwrap();
        let q = solve_direction_exact(t.view(), l).unwrap();
        prop_assert!((q.score(s.view()) - p.score(s.view())).abs() <= 1e-9);
    }

    #[test]
    fn discretize_recovers_vertices((m, n, l) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_partial_permutation(m, n, l, &mut rng);
        prop_assert_eq!(discretize(&RelaxedAssignment::from(&p)).unwrap(), p);
    }

    #[test]
    fn discretize_returns_a_vertex((m, n, l) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_interior_point(m, n, l, &mut rng);
        let p = discretize(&RelaxedAssignment::new(x.clone(), l).unwrap()).unwrap();
        prop_assert_eq!(p.size(), l);
        prop_assert!((p.score(x.view()) - enumerated_best(&x, l)).abs() <= 1e-9);
    }
}

#[test]
fn rejects_bad_inputs() {
    let s = Array2::<f64>::zeros((3, 2));
    assert!(solve_direction_exact(s.view(), 1).is_err());
    let s = Array2::<f64>::zeros((2, 3));
    assert!(solve_direction_exact(s.view(), 3).is_err());
    let mut s = Array2::<f64>::zeros((2, 3));
    s[[0, 1]] = f64::NAN;
    assert!(solve_direction_fast(s.view(), 1).is_err());
}

#![allow(dead_code)]

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use wcs_core::{CostMatrix, PartialPermutation, ProblemInstance, WeightedGraph};

/// Symmetric nonnegative weights with zero diagonal; each pair is an edge
/// with probability `density`.
pub fn random_weights<R: Rng>(n: usize, density: f64, rng: &mut R) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let w = rng.random::<f64>();
                a[[i, j]] = w;
                a[[j, i]] = w;
            }
        }
    }
    a
}

pub fn random_partial_permutation<R: Rng>(
    m: usize,
    n: usize,
    l: usize,
    rng: &mut R,
) -> PartialPermutation {
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let pairs: Vec<(usize, usize)> = rows[..l]
        .iter()
        .copied()
        .zip(cols[..l].iter().copied())
        .collect();
    PartialPermutation::from_pairs(m, n, l, &pairs).unwrap()
}

/// A strictly interior point of D: random mixture of vertices pulled toward
/// the barycenter.
pub fn random_interior_point<R: Rng>(m: usize, n: usize, l: usize, rng: &mut R) -> Array2<f64> {
    let k = 4;
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut x = Array2::from_elem((m, n), 0.2 * l as f64 / (m * n) as f64);
    for w in weights {
        x.scaled_add(
            0.8 * w / total,
            &random_partial_permutation(m, n, l, rng).to_matrix(),
        );
    }
    x
}

pub fn random_instance<R: Rng>(
    m: usize,
    n: usize,
    l: usize,
    alpha: f64,
    rng: &mut R,
) -> ProblemInstance {
    let g = WeightedGraph::unlabeled(random_weights(m, 0.7, rng)).unwrap();
    let h = WeightedGraph::unlabeled(random_weights(n, 0.7, rng)).unwrap();
    let c = CostMatrix::new(Array2::from_shape_fn((m, n), |_| rng.random::<f64>())).unwrap();
    ProblemInstance::new(g, h, c, l, alpha).unwrap()
}

/// Central differences of `f` at `x`, one coordinate at a time.
pub fn numeric_gradient(f: impl Fn(&Array2<f64>) -> f64, x: &Array2<f64>, h: f64) -> Array2<f64> {
    let mut g = Array2::zeros(x.dim());
    let mut xp = x.clone();
    for idx in ndarray::indices(x.dim()) {
        let orig = xp[idx];
        xp[idx] = orig + h;
        let up = f(&xp);
        xp[idx] = orig - h;
        let down = f(&xp);
        xp[idx] = orig;
        g[idx] = (up - down) / (2.0 * h);
    }
    g
}

/// `‖a − b‖ / max(‖b‖, 1)` in the Frobenius norm.
pub fn relative_error(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let diff = (a - b).mapv(|v| v * v).sum().sqrt();
    let scale = b.mapv(|v| v * v).sum().sqrt().max(1.0);
    diff / scale
}

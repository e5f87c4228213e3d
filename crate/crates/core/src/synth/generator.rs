use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WcsError};
use crate::types::{PartialPermutation, ProblemInstance, WeightedGraph};

/// How `⌈σ·#Edge / 2⌉` edge flips are split between additions and removals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationCount {
    /// That many edges are added and that many removed.
    #[default]
    Each,
    /// That many changes in total, half additions and half removals.
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub sigma: f64,
    pub density: f64,
    pub seed: u64,
    #[serde(default)]
    pub perturbation: PerturbationCount,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if self.m > self.n {
            return Err(WcsError::InvalidInstance(format!(
                "M must be <= N (got M={}, N={})",
                self.m, self.n
            )));
        }
        if self.l == 0 || self.l > self.m {
            return Err(WcsError::InvalidInstance(format!(
                "L must be in 1..=M (got L={}, M={})",
                self.l, self.m
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(WcsError::InvalidInstance(format!(
                "sigma = {} must be >= 0",
                self.sigma
            )));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(WcsError::InvalidInstance(format!(
                "density = {} outside (0, 1]",
                self.density
            )));
        }
        Ok(())
    }
}

fn distances(points: &Array2<f64>) -> Array2<f64> {
    let n = points.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else {
            let dx = points[[i, 0]] - points[[j, 0]];
            let dy = points[[i, 1]] - points[[j, 1]];
            (dx * dx + dy * dy).sqrt()
        }
    })
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn target_edges(density: f64, pairs: usize) -> usize {
    ((density * pairs as f64).round() as usize).min(pairs)
}

fn adjacency_from(dist: &Array2<f64>, edges: &[(usize, usize)]) -> Array2<f64> {
    let mut a = Array2::zeros(dist.dim());
    for &(i, j) in edges {
        a[[i, j]] = dist[[i, j]];
        a[[j, i]] = dist[[j, i]];
    }
    a
}

/// Removes and adds random edges; added edges take the point distance as weight.
fn perturb(
    adjacency: &mut Array2<f64>,
    dist: &Array2<f64>,
    sigma: f64,
    mode: PerturbationCount,
    rng: &mut ChaCha8Rng,
) {
    let n = adjacency.nrows();
    let (mut present, mut absent): (Vec<_>, Vec<_>) = upper_pairs(n)
        .into_iter()
        .partition(|&(i, j)| adjacency[[i, j]] != 0.0);
    present.shuffle(rng);
    absent.shuffle(rng);
    let flips = (0.5 * sigma * present.len() as f64).ceil() as usize;
    let (add, remove) = match mode {
        PerturbationCount::Each => (flips, flips),
        PerturbationCount::Total => (flips - flips / 2, flips / 2),
    };
    for &(i, j) in present.iter().take(remove) {
        adjacency[[i, j]] = 0.0;
        adjacency[[j, i]] = 0.0;
    }
    for &(i, j) in absent.iter().take(add) {
        adjacency[[i, j]] = dist[[i, j]];
        adjacency[[j, i]] = dist[[j, i]];
    }
}

/// Draws a synthetic instance with a planted ground-truth correspondence.
///
/// H's points are uniform on the unit square. L vertices of G copy their
/// partners in H plus N(0, σ²) noise; the remaining M − L are fresh uniform
/// outliers. Edge weights are Euclidean distances. Edges are kept so that
/// both graphs hit the target density while pairs of matched vertices share
/// the same edge/no-edge state in G and H, then each graph independently has
/// `⌈σ·#Edge / 2⌉` edges added and removed.
///
/// The random stream is consumed the same way for every σ and density, so
/// sweeping one parameter with a fixed seed changes only that parameter.
pub fn generate_instance(params: &GeneratorParams) -> Result<ProblemInstance> {
    params.validate()?;
    let (m, n, l) = (params.m, params.n, params.l);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let h_points = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>());
    let mut g_points = Array2::from_shape_fn((m, 2), |_| rng.random::<f64>());
    let noise = Array2::from_shape_fn((m, 2), |_| rng.sample::<f64, _>(StandardNormal));

    let mut g_order: Vec<usize> = (0..m).collect();
    let mut h_order: Vec<usize> = (0..n).collect();
    g_order.shuffle(&mut rng);
    h_order.shuffle(&mut rng);
    let pairs: Vec<(usize, usize)> = g_order[..l]
        .iter()
        .copied()
        .zip(h_order[..l].iter().copied())
        .collect();
    let gt = PartialPermutation::from_pairs(m, n, l, &pairs)?;

    let mut h_to_g = vec![None; n];
    for &(i, j) in &pairs {
        h_to_g[j] = Some(i);
        for c in 0..2 {
            g_points[[i, c]] = h_points[[j, c]] + params.sigma * noise[[i, c]];
        }
    }
    let dist_g = distances(&g_points);
    let dist_h = distances(&h_points);

    // H: pairs inside the matched block and the rest are sampled separately
    // so the block has exactly its share of edges.
    let mut h_pairs = upper_pairs(n);
    h_pairs.shuffle(&mut rng);
    let block = l * l.saturating_sub(1) / 2;
    let block_target = target_edges(params.density, block);
    let rest_target = target_edges(params.density, h_pairs.len())
        .saturating_sub(block_target)
        .min(h_pairs.len() - block);
    let in_block = |&(a, b): &(usize, usize)| h_to_g[a].is_some() && h_to_g[b].is_some();
    let mut h_edges: Vec<(usize, usize)> = h_pairs
        .iter()
        .filter(|p| in_block(p))
        .take(block_target)
        .copied()
        .collect();
    h_edges.extend(
        h_pairs
            .iter()
            .filter(|p| !in_block(p))
            .take(rest_target)
            .copied(),
    );

    // G: the matched block mirrors H; outlier pairs fill up to the target.
    let mut g_edges: Vec<(usize, usize)> = h_edges
        .iter()
        .filter(|p| in_block(p))
        .map(|&(a, b)| {
            let (x, y) = (h_to_g[a].unwrap(), h_to_g[b].unwrap());
            (x.min(y), x.max(y))
        })
        .collect();
    let g_row_matched: Vec<bool> = (0..m).map(|i| gt.col_of(i).is_some()).collect();
    let mut outlier_pairs: Vec<(usize, usize)> = upper_pairs(m)
        .into_iter()
        .filter(|&(a, b)| !(g_row_matched[a] && g_row_matched[b]))
        .collect();
    outlier_pairs.shuffle(&mut rng);
    let g_target = target_edges(params.density, m * m.saturating_sub(1) / 2);
    let need = g_target
        .saturating_sub(g_edges.len())
        .min(outlier_pairs.len());
    g_edges.extend(outlier_pairs.into_iter().take(need));

    let mut a_g = adjacency_from(&dist_g, &g_edges);
    let mut a_h = adjacency_from(&dist_h, &h_edges);
    perturb(
        &mut a_g,
        &dist_g,
        params.sigma,
        params.perturbation,
        &mut rng,
    );
    perturb(
        &mut a_h,
        &dist_h,
        params.sigma,
        params.perturbation,
        &mut rng,
    );

    let graph_g = WeightedGraph::unlabeled(a_g)?;
    let graph_h = WeightedGraph::unlabeled(a_h)?;
    ProblemInstance::structural(graph_g, graph_h, l)?.with_ground_truth(gt)
}

//! Exhaustive reference solver over P for small instances.
//!
//! |P| = C(M,L) · C(N,L) · L!, so this is only usable for a handful of
//! vertices; it exists to pin down exact optima for tests and for the
//! `oracle-check` command.

use rayon::prelude::*;

use crate::error::{Result, WcsError};
use crate::types::{PartialPermutation, ProblemInstance};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Values within this distance of the minimum count as optima.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best_assignment: PartialPermutation,
    pub best_value: f64,
    pub num_candidates: u128,
    pub num_optima: u128,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `C(M,L) · C(N,L) · L!`
pub fn candidate_count(m: usize, n: usize, l: usize) -> u128 {
    let mut perms: u128 = 1;
    for i in 1..=l as u128 {
        perms = perms.saturating_mul(i);
    }
    binomial(m, l)
        .saturating_mul(binomial(n, l))
        .saturating_mul(perms)
}

/// Advances `c` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for pos in (0..k).rev() {
        if c[pos] < n - k + pos {
            c[pos] += 1;
            for q in pos + 1..k {
                c[q] = c[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Advances `p` to the next injective tuple over `0..n` in lexicographic order.
fn next_arrangement(p: &mut [usize], n: usize) -> bool {
    let k = p.len();
    for pos in (0..k).rev() {
        let prefix = &p[..pos];
        let next = (p[pos] + 1..n).find(|v| !prefix.contains(v));
        if let Some(v) = next {
            p[pos] = v;
            let mut fill = 0;
            for q in pos + 1..k {
                while p[..q].contains(&fill) {
                    fill += 1;
                }
                p[q] = fill;
                fill += 1;
            }
            return true;
        }
    }
    false
}

/// Streaming enumeration of P: row subsets in lexicographic order, and for
/// each subset the injective column tuples in lexicographic order.
pub struct PartialPermutations {
    m: usize,
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    started: bool,
    finished: bool,
}

impl PartialPermutations {
    fn current(&self) -> PartialPermutation {
        let pairs: Vec<(usize, usize)> = self
            .rows
            .iter()
            .copied()
            .zip(self.cols.iter().copied())
            .collect();
        PartialPermutation::from_pairs(self.m, self.n, self.rows.len(), &pairs)
            .expect("enumerator yields valid assignments")
    }

    fn advance(&mut self) -> bool {
        if next_arrangement(&mut self.cols, self.n) {
            return true;
        }
        if next_combination(&mut self.rows, self.m) {
            self.cols = (0..self.rows.len()).collect();
            return true;
        }
        false
    }
}

impl Iterator for PartialPermutations {
    type Item = PartialPermutation;

    fn next(&mut self) -> Option<PartialPermutation> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.advance() {
            self.finished = true;
            return None;
        }
        Some(self.current())
    }
}

fn check_enumerable(m: usize, n: usize, l: usize, cap: u128) -> Result<u128> {
    if m == 0 || !(l <= m && m <= n) {
        return Err(WcsError::InvalidInstance(format!(
            "need L <= M <= N with M > 0, got L={l}, M={m}, N={n}"
        )));
    }
    let count = candidate_count(m, n, l);
    if count > cap {
        return Err(WcsError::EnumerationCap { count, cap });
    }
    Ok(count)
}

pub fn enumerate_partial_permutations(m: usize, n: usize, l: usize) -> Result<PartialPermutations> {
    enumerate_with_cap(m, n, l, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_with_cap(m: usize, n: usize, l: usize, cap: u128) -> Result<PartialPermutations> {
    check_enumerable(m, n, l, cap)?;
    Ok(PartialPermutations {
        m,
        n,
        rows: (0..l).collect(),
        cols: (0..l).collect(),
        started: false,
        finished: false,
    })
}

/// `α H0 + (1 − α) tr(C^T X)` summed over matched pairs only.
pub fn assignment_objective(instance: &ProblemInstance, rows: &[usize], cols: &[usize]) -> f64 {
    let a_g = instance.a_g();
    let a_h = instance.a_h();
    let c = instance.cost.entries();
    let mut structural = 0.0;
    for (a, (&i, &j)) in rows.iter().zip(cols).enumerate() {
        for (&k, &l) in rows[a + 1..].iter().zip(&cols[a + 1..]) {
            let d1 = a_g[[i, k]] - a_h[[j, l]];
            let d2 = a_g[[k, i]] - a_h[[l, j]];
            structural += d1 * d1 + d2 * d2;
        }
    }
    let unary: f64 = rows.iter().zip(cols).map(|(&i, &j)| c[[i, j]]).sum();
    instance.alpha * structural + (1.0 - instance.alpha) * unary
}

pub fn partial_permutation_objective(instance: &ProblemInstance, p: &PartialPermutation) -> f64 {
    let (rows, cols): (Vec<usize>, Vec<usize>) = p.pairs().unzip();
    assignment_objective(instance, &rows, &cols)
}

pub fn brute_force_min(instance: &ProblemInstance) -> Result<OracleResult> {
    brute_force_min_with_cap(instance, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive minimum. Row subsets are scanned in parallel; the reported
/// minimizer is the first in enumeration order among values within
/// [`TIE_TOL`] of the minimum.
pub fn brute_force_min_with_cap(instance: &ProblemInstance, cap: u128) -> Result<OracleResult> {
    let (m, n, l) = (instance.m(), instance.n(), instance.l);
    let num_candidates = check_enumerable(m, n, l, cap)?;

    let mut subsets = Vec::new();
    let mut rows: Vec<usize> = (0..l).collect();
    loop {
        subsets.push(rows.clone());
        if !next_combination(&mut rows, m) {
            break;
        }
    }

    let scan = |rows: &Vec<usize>, visit: &mut dyn FnMut(&[usize], f64)| {
        let mut cols: Vec<usize> = (0..l).collect();
        loop {
            visit(&cols, assignment_objective(instance, rows, &cols));
            if !next_arrangement(&mut cols, n) {
                break;
            }
        }
    };

    let best_value = subsets
        .par_iter()
        .map(|rows| {
            let mut best = f64::INFINITY;
            scan(rows, &mut |_, v| best = best.min(v));
            best
        })
        .reduce(|| f64::INFINITY, f64::min);

    let per_subset: Vec<(u128, Option<Vec<usize>>)> = subsets
        .par_iter()
        .map(|rows| {
            let mut count = 0u128;
            let mut first = None;
            scan(rows, &mut |cols, v| {
                if v - best_value <= TIE_TOL {
                    count += 1;
                    if first.is_none() {
                        first = Some(cols.to_vec());
                    }
                }
            });
            (count, first)
        })
        .collect();

    let num_optima = per_subset.iter().map(|(c, _)| c).sum();
    let (rows, cols) = subsets
        .iter()
        .zip(per_subset)
        .find_map(|(rows, (_, first))| first.map(|c| (rows.clone(), c)))
        .ok_or_else(|| WcsError::Infeasible("no candidate evaluated".into()))?;
    let pairs: Vec<(usize, usize)> = rows.into_iter().zip(cols).collect();
    let best_assignment = PartialPermutation::from_pairs(m, n, l, &pairs)?;

    Ok(OracleResult {
        best_assignment,
        best_value,
        num_candidates,
        num_optima,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::WeightedGraph;
    use ndarray::{array, Array2};
    use std::collections::HashSet;

    #[test]
    fn counts() {
        assert_eq!(enumerate_partial_permutations(2, 2, 2).unwrap().count(), 2);
        assert_eq!(enumerate_partial_permutations(2, 3, 1).unwrap().count(), 6);
        assert_eq!(enumerate_partial_permutations(3, 4, 2).unwrap().count(), 36);
        for (m, n, l) in [(1, 1, 1), (3, 3, 0), (3, 5, 3), (4, 4, 2), (4, 6, 3)] {
            let all: Vec<_> = enumerate_partial_permutations(m, n, l).unwrap().collect();
            assert_eq!(all.len() as u128, candidate_count(m, n, l), "{m} {n} {l}");
            let distinct: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(distinct.len(), all.len());
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_with_cap(5, 6, 4, 100),
            Err(WcsError::EnumerationCap { .. })
        ));
        assert!(enumerate_partial_permutations(4, 3, 2).is_err());
    }

    #[test]
    fn oracle_examples() {
        let a = array![[0., 1.], [1., 0.]];
        let b = array![[0., 2.], [2., 0.]];
        let g = WeightedGraph::unlabeled(a).unwrap();
        let h = WeightedGraph::unlabeled(b).unwrap();
        let inst = ProblemInstance::structural(g, h, 2).unwrap();
        let r = brute_force_min(&inst).unwrap();
        assert_eq!(r.best_value, 2.0);
        assert_eq!(r.num_candidates, 2);
        assert_eq!(r.num_optima, 2);

        let g = WeightedGraph::unlabeled(Array2::zeros((3, 3))).unwrap();
        let h = WeightedGraph::unlabeled(Array2::zeros((4, 4))).unwrap();
        let inst = ProblemInstance::structural(g, h, 2).unwrap();
        let r = brute_force_min(&inst).unwrap();
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.num_optima, r.num_candidates);
        assert_eq!(
            r.best_assignment.pairs().collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );
    }

    #[test]
    fn identical_graphs_have_unique_zero() {
        let a = array![[0., 0.3, 1.7], [0.3, 0., 0.9], [1.7, 0.9, 0.]];
        let g = WeightedGraph::unlabeled(a.clone()).unwrap();
        let inst = ProblemInstance::structural(g.clone(), g, 3).unwrap();
        let r = brute_force_min(&inst).unwrap();
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.num_optima, 1);
        assert_eq!(
            r.best_assignment.pairs().collect::<Vec<_>>(),
            vec![(0, 0), (1, 1), (2, 2)]
        );
    }
}

//! Linear subproblems over D: the Frank-Wolfe direction, rectangular
//! assignment, and rounding a relaxed point back to P.
//!
//! Every vertex of D is a partial permutation, so maximizing a linear score
//! over D is a cardinality-constrained bipartite matching. The exact solver
//! pads the score with M − L dummy columns and solves one assignment. The
//! fast solver assigns every row and then drops the weakest M − L pairs.

mod hungarian;

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WcsError};
use crate::types::{PartialPermutation, RelaxedAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMethod {
    /// Exact LP optimum.
    Exact,
    /// Rectangular assignment followed by pruning to L pairs.
    Fast,
}

impl fmt::Display for DirectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectionMethod::Exact => "exact",
            DirectionMethod::Fast => "fast",
        })
    }
}

impl FromStr for DirectionMethod {
    type Err = WcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "flow" => Ok(DirectionMethod::Exact),
            "fast" | "hungarian" => Ok(DirectionMethod::Fast),
            other => Err(WcsError::InvalidConfig(format!(
                "unknown direction method '{other}'"
            ))),
        }
    }
}

impl DirectionMethod {
    pub fn solve(self, score: ArrayView2<'_, f64>, l: usize) -> Result<PartialPermutation> {
        match self {
            DirectionMethod::Exact => solve_direction_exact(score, l),
            DirectionMethod::Fast => solve_direction_fast(score, l),
        }
    }
}

fn check_score(score: ArrayView2<'_, f64>) -> Result<()> {
    let (m, n) = score.dim();
    if m == 0 || n == 0 {
        return Err(WcsError::Dimension("score matrix is empty".into()));
    }
    if m > n {
        return Err(WcsError::Dimension(format!(
            "score is {m}x{n}; need M <= N"
        )));
    }
    if score.iter().any(|v| !v.is_finite()) {
        return Err(WcsError::Infeasible("score has non-finite entries".into()));
    }
    Ok(())
}

/// Maximizes `tr(score^T Y)` over D. The optimum is returned as a vertex,
/// i.e. a partial permutation with exactly `l` ones.
///
/// Solved as a rectangular assignment with `M − l` zero-cost dummy columns.
/// Real entries cost `max(score) − score + 1 ≥ 1`, so every dummy is used
/// and exactly `l` rows land on real columns, at maximum total score.
pub fn solve_direction_exact(score: ArrayView2<'_, f64>, l: usize) -> Result<PartialPermutation> {
    check_score(score)?;
    let (m, n) = score.dim();
    if l > m {
        return Err(WcsError::Infeasible(format!("L={l} exceeds min(M, N)={m}")));
    }
    let top = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = n + m - l;
    let mut cost = vec![0.0; m * width];
    for (i, row) in score.rows().into_iter().enumerate() {
        for (c, &s) in cost[i * width..i * width + n].iter_mut().zip(row.iter()) {
            *c = top - s + 1.0;
        }
    }
    let rows: Vec<Option<usize>> = hungarian::min_cost_row_assignment(&cost, m, width)
        .into_iter()
        .map(|j| (j < n).then_some(j))
        .collect();
    PartialPermutation::from_row_assignment(n, &rows)
}

/// Maximizes `tr(score^T Y)` over partial permutations matching every row.
pub fn solve_rectangular_assignment(score: ArrayView2<'_, f64>) -> Result<PartialPermutation> {
    check_score(score)?;
    let (m, n) = score.dim();
    let cost: Vec<f64> = score.iter().map(|v| -v).collect();
    let cols = hungarian::min_cost_row_assignment(&cost, m, n);
    let pairs: Vec<(usize, usize)> = cols.into_iter().enumerate().collect();
    PartialPermutation::from_pairs(m, n, m, &pairs)
}

/// Approximate direction: assign every row, then unassign the `M − l` rows
/// whose assigned score is smallest (ties go to the lowest `(row, col)`).
pub fn solve_direction_fast(score: ArrayView2<'_, f64>, l: usize) -> Result<PartialPermutation> {
    check_score(score)?;
    let (m, n) = score.dim();
    if l > m {
        return Err(WcsError::Infeasible(format!("L={l} exceeds M={m}")));
    }
    let full = solve_rectangular_assignment(score)?;
    if l == m {
        return Ok(full);
    }
    let mut pairs: Vec<(usize, usize)> = full.pairs().collect();
    pairs.sort_by(|a, b| {
        score[[a.0, a.1]]
            .total_cmp(&score[[b.0, b.1]])
            .then(a.cmp(b))
    });
    let kept = &pairs[m - l..];
    PartialPermutation::from_pairs(m, n, l, kept)
}

/// The partial permutation closest to `x` in the inner-product sense.
pub fn discretize(x: &RelaxedAssignment) -> Result<PartialPermutation> {
    solve_direction_exact(x.matrix().view(), x.size())
}

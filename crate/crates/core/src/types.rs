//! Graphs, assignments and the two feasible sets.
//!
//! `PartialPermutation` is a member of the combinatorial set P: an M×N
//! 0/1 matrix with exactly L ones and at most one per row and column.
//! `RelaxedAssignment` lives in its convex hull D, where entries are
//! nonnegative, row and column sums are at most one and the total mass is L.

use ndarray::{Array2, ArrayView2};

use crate::error::{Result, WcsError};

/// Slack allowed on the linear constraints of D.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Distance from {0, 1} tolerated when deciding that a relaxed iterate is in P.
pub const BINARITY_TOL: f64 = 1e-3;

/// An undirected, optionally labeled graph with nonnegative edge weights.
///
/// An absent edge is a zero weight. Asymmetric adjacency is accepted but
/// reported through [`WeightedGraph::is_directed`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    labels: Option<Array2<f64>>,
    adjacency: Array2<f64>,
    directed: bool,
}

impl WeightedGraph {
    pub fn new(adjacency: Array2<f64>, labels: Option<Array2<f64>>) -> Result<Self> {
        let (r, c) = adjacency.dim();
        if r != c {
            return Err(WcsError::InvalidGraph(format!(
                "adjacency must be square, got {r}x{c}"
            )));
        }
        if r == 0 {
            return Err(WcsError::InvalidGraph("graph has no vertices".into()));
        }
        for ((i, j), &w) in adjacency.indexed_iter() {
            if !w.is_finite() {
                return Err(WcsError::InvalidGraph(format!(
                    "weight ({i},{j}) is not finite"
                )));
            }
            if w < 0.0 {
                return Err(WcsError::InvalidGraph(format!(
                    "weight ({i},{j}) = {w} is negative"
                )));
            }
            if i == j && w != 0.0 {
                return Err(WcsError::InvalidGraph(format!(
                    "self-loop on vertex {i} (diagonal must be zero)"
                )));
            }
        }
        if let Some(l) = &labels {
            if l.nrows() != r {
                return Err(WcsError::InvalidGraph(format!(
                    "{} labels for {r} vertices",
                    l.nrows()
                )));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return Err(WcsError::InvalidGraph(
                    "label entries must be finite".into(),
                ));
            }
        }
        let directed = adjacency
            .indexed_iter()
            .any(|((i, j), &w)| w != adjacency[[j, i]]);
        Ok(Self {
            labels,
            adjacency,
            directed,
        })
    }

    pub fn unlabeled(adjacency: Array2<f64>) -> Result<Self> {
        Self::new(adjacency, None)
    }

    pub fn size(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    /// Labels as a `size × dim` matrix, one row per vertex.
    pub fn labels(&self) -> Option<&Array2<f64>> {
        self.labels.as_ref()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of undirected edges (nonzero weights above the diagonal).
    pub fn edge_count(&self) -> usize {
        let n = self.size();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency[[i, j]] != 0.0 || self.adjacency[[j, i]] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Label dissimilarities: entry (i, j) compares vertex i of G with vertex j of H.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(Array2<f64>);

impl CostMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(WcsError::InvalidCost("entries must be finite".into()));
        }
        Ok(Self(entries))
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self(Array2::zeros((m, n)))
    }

    /// Euclidean distances between the label vectors of two graphs.
    pub fn from_labels(g: &WeightedGraph, h: &WeightedGraph) -> Result<Self> {
        let (lg, lh) = match (g.labels(), h.labels()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(WcsError::InvalidCost("both graphs need labels".into())),
        };
        if lg.ncols() != lh.ncols() {
            return Err(WcsError::Dimension(format!(
                "label dimensions differ: {} vs {}",
                lg.ncols(),
                lh.ncols()
            )));
        }
        let c = Array2::from_shape_fn((lg.nrows(), lh.nrows()), |(i, j)| {
            lg.row(i)
                .iter()
                .zip(lh.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        });
        Self::new(c)
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn dim(&self) -> (usize, usize) {
        self.0.dim()
    }
}

/// A size-L one-to-one correspondence between rows (vertices of G) and
/// columns (vertices of H).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialPermutation {
    rows: usize,
    cols: usize,
    row_to_col: Vec<Option<usize>>,
    size: usize,
}

impl PartialPermutation {
    /// Builds from matched `(row, col)` pairs; `l` must equal the pair count.
    pub fn from_pairs(
        rows: usize,
        cols: usize,
        l: usize,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(WcsError::InvalidAssignment(
                "dimensions must be positive".into(),
            ));
        }
        if !(l <= rows && rows <= cols) {
            return Err(WcsError::InvalidAssignment(format!(
                "need L <= M <= N, got L={l}, M={rows}, N={cols}"
            )));
        }
        if pairs.len() != l {
            return Err(WcsError::InvalidAssignment(format!(
                "{} pairs given for L={l}",
                pairs.len()
            )));
        }
        let mut row_to_col = vec![None; rows];
        let mut col_used = vec![false; cols];
        for &(i, j) in pairs {
            if i >= rows || j >= cols {
                return Err(WcsError::InvalidAssignment(format!(
                    "pair ({i},{j}) outside {rows}x{cols}"
                )));
            }
            if row_to_col[i].is_some() {
                return Err(WcsError::InvalidAssignment(format!(
                    "row {i} matched twice"
                )));
            }
            if col_used[j] {
                return Err(WcsError::InvalidAssignment(format!(
                    "column {j} matched twice"
                )));
            }
            row_to_col[i] = Some(j);
            col_used[j] = true;
        }
        Ok(Self {
            rows,
            cols,
            row_to_col,
            size: l,
        })
    }

    /// Builds from a per-row assignment vector.
    pub fn from_row_assignment(cols: usize, row_to_col: &[Option<usize>]) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = row_to_col
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|j| (i, j)))
            .collect();
        Self::from_pairs(row_to_col.len(), cols, pairs.len(), &pairs)
    }

    /// Rounds a matrix that passes [`validate_partial_permutation`].
    pub fn from_matrix(x: ArrayView2<'_, f64>, l: usize, tol: f64) -> Result<Self> {
        if !validate_partial_permutation(x, l, tol) {
            return Err(WcsError::InvalidAssignment(
                "matrix is not a partial permutation within tolerance".into(),
            ));
        }
        let pairs: Vec<(usize, usize)> = x
            .indexed_iter()
            .filter(|(_, &v)| v.round() == 1.0)
            .map(|(ij, _)| ij)
            .collect();
        Self::from_pairs(x.nrows(), x.ncols(), l, &pairs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of matched pairs, L.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.row_to_col[row]
    }

    pub fn row_assignment(&self) -> &[Option<usize>] {
        &self.row_to_col
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.row_to_col.get(row).copied().flatten() == Some(col)
    }

    /// Matched pairs in increasing row order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|j| (i, j)))
    }

    pub fn to_matrix(&self) -> Array2<f64> {
        let mut x = Array2::zeros((self.rows, self.cols));
        for (i, j) in self.pairs() {
            x[[i, j]] = 1.0;
        }
        x
    }

    /// `tr(S^T X)` for this assignment `X`.
    pub fn score(&self, s: ArrayView2<'_, f64>) -> f64 {
        self.pairs().map(|(i, j)| s[[i, j]]).sum()
    }
}

/// A point of the convex hull D.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedAssignment {
    x: Array2<f64>,
    size: usize,
}

impl RelaxedAssignment {
    pub fn new(x: Array2<f64>, l: usize) -> Result<Self> {
        check_in_hull(x.view(), l, FEASIBILITY_TOL)?;
        Ok(Self { x, size: l })
    }

    /// The barycenter `L/(MN) · 1`, the unique minimizer of `tr(X^T X)` over D.
    pub fn uniform(m: usize, n: usize, l: usize) -> Result<Self> {
        if m == 0 || n == 0 || l == 0 || l > m.min(n) {
            return Err(WcsError::InvalidAssignment(format!(
                "no uniform point for M={m}, N={n}, L={l}"
            )));
        }
        let v = l as f64 / (m * n) as f64;
        Ok(Self {
            x: Array2::from_elem((m, n), v),
            size: l,
        })
    }

    pub(crate) fn from_raw(x: Array2<f64>, l: usize) -> Self {
        Self { x, size: l }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.x
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_partial_permutation(&self, tol: f64) -> bool {
        validate_partial_permutation(self.x.view(), self.size, tol)
    }

    /// Largest distance of any entry from the nearest of 0 and 1.
    pub fn binarity(&self) -> f64 {
        binarity(self.x.view())
    }
}

impl From<&PartialPermutation> for RelaxedAssignment {
    fn from(p: &PartialPermutation) -> Self {
        Self {
            x: p.to_matrix(),
            size: p.size(),
        }
    }
}

pub(crate) fn binarity(x: ArrayView2<'_, f64>) -> f64 {
    x.iter()
        .map(|&v| v.abs().min((1.0 - v).abs()))
        .fold(0.0, f64::max)
}

/// Checks membership in D with slack `eps` on every constraint.
pub fn check_in_hull(x: ArrayView2<'_, f64>, l: usize, eps: f64) -> Result<()> {
    let (m, n) = x.dim();
    if m == 0 || n == 0 {
        return Err(WcsError::InvalidAssignment(
            "dimensions must be positive".into(),
        ));
    }
    if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| !v.is_finite() || **v < -eps) {
        return Err(WcsError::InvalidAssignment(format!(
            "entry ({i},{j}) = {v}"
        )));
    }
    for (i, row) in x.rows().into_iter().enumerate() {
        let s = row.sum();
        if s > 1.0 + eps {
            return Err(WcsError::InvalidAssignment(format!("row {i} sums to {s}")));
        }
    }
    for (j, col) in x.columns().into_iter().enumerate() {
        let s = col.sum();
        if s > 1.0 + eps {
            return Err(WcsError::InvalidAssignment(format!(
                "column {j} sums to {s}"
            )));
        }
    }
    let total = x.sum();
    if (total - l as f64).abs() > eps * (1.0 + l as f64) {
        return Err(WcsError::InvalidAssignment(format!(
            "total mass {total}, expected {l}"
        )));
    }
    Ok(())
}

/// True iff `x` is within `tol` of a member of P with `l` ones.
pub fn validate_partial_permutation(x: ArrayView2<'_, f64>, l: usize, tol: f64) -> bool {
    let (m, n) = x.dim();
    if m == 0 || n == 0 {
        return false;
    }
    let mut row_sums = vec![0usize; m];
    let mut col_sums = vec![0usize; n];
    let mut total = 0usize;
    for ((i, j), &v) in x.indexed_iter() {
        if !v.is_finite() {
            return false;
        }
        if (v - 0.0).abs() <= tol {
            continue;
        }
        if (v - 1.0).abs() <= tol {
            row_sums[i] += 1;
            col_sums[j] += 1;
            total += 1;
            continue;
        }
        return false;
    }
    total == l && row_sums.iter().all(|&s| s <= 1) && col_sums.iter().all(|&s| s <= 1)
}

/// `U = X · 1_{N×N} · X^T`, the mask selecting matched rows of G.
pub fn selection_mask(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.ncols();
    let ones = Array2::<f64>::ones((n, n));
    x.dot(&ones).dot(&x.t())
}

/// A WCS(G, H) instance with G the smaller graph.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub graph_g: WeightedGraph,
    pub graph_h: WeightedGraph,
    pub cost: CostMatrix,
    pub l: usize,
    pub alpha: f64,
    pub ground_truth: Option<PartialPermutation>,
}

impl ProblemInstance {
    pub fn new(
        graph_g: WeightedGraph,
        graph_h: WeightedGraph,
        cost: CostMatrix,
        l: usize,
        alpha: f64,
    ) -> Result<Self> {
        let (m, n) = (graph_g.size(), graph_h.size());
        if l == 0 {
            return Err(WcsError::InvalidInstance("L must be positive".into()));
        }
        if m > n {
            return Err(WcsError::InvalidInstance(format!(
                "M must be <= N (got M={m}, N={n}); pass the smaller graph as G"
            )));
        }
        if l > m {
            return Err(WcsError::InvalidInstance(format!(
                "L must be <= M (got L={l}, M={m})"
            )));
        }
        if cost.dim() != (m, n) {
            return Err(WcsError::Dimension(format!(
                "cost matrix is {:?}, graphs need {m}x{n}",
                cost.dim()
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(WcsError::InvalidInstance(format!(
                "alpha = {alpha} outside [0,1]"
            )));
        }
        Ok(Self {
            graph_g,
            graph_h,
            cost,
            l,
            alpha,
            ground_truth: None,
        })
    }

    /// Structural-only instance: α = 1 and an all-zero cost matrix.
    pub fn structural(graph_g: WeightedGraph, graph_h: WeightedGraph, l: usize) -> Result<Self> {
        let cost = CostMatrix::zeros(graph_g.size(), graph_h.size());
        Self::new(graph_g, graph_h, cost, l, 1.0)
    }

    pub fn with_ground_truth(mut self, gt: PartialPermutation) -> Result<Self> {
        if gt.rows() != self.m() || gt.cols() != self.n() || gt.size() != self.l {
            return Err(WcsError::Dimension(format!(
                "ground truth is {}x{} with L={}, instance is {}x{} with L={}",
                gt.rows(),
                gt.cols(),
                gt.size(),
                self.m(),
                self.n(),
                self.l
            )));
        }
        self.ground_truth = Some(gt);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.graph_g.size()
    }

    pub fn n(&self) -> usize {
        self.graph_h.size()
    }

    pub fn a_g(&self) -> &Array2<f64> {
        self.graph_g.adjacency()
    }

    pub fn a_h(&self) -> &Array2<f64> {
        self.graph_h.adjacency()
    }

    pub fn is_part_in_whole(&self) -> bool {
        self.l == self.m()
    }
}

//! Rectangular Hungarian method (shortest augmenting paths with dual
//! potentials) for an M×N cost matrix with M ≤ N. Every row is assigned;
//! runs in O(M²N).

/// Minimum-cost assignment of every row to a distinct column of the
/// row-major `m × n` matrix `cost`. Returns `row -> col`. Requires `m <= n`.
pub(crate) fn min_cost_row_assignment(cost: &[f64], m: usize, n: usize) -> Vec<usize> {
    debug_assert!(m <= n && cost.len() == m * n);
    // Column 0 is a sentinel; columns 1..=n are real. Rows are 1-based in `p`.
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let ui = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let cols = row
                .iter()
                .zip(&v[1..])
                .zip(minv[1..].iter_mut())
                .zip(way[1..].iter_mut())
                .zip(&used[1..])
                .enumerate();
            for (j, ((((&c, &vj), mv), w), &done)) in cols {
                if done {
                    continue;
                }
                let cur = c - ui - vj;
                if cur < *mv {
                    *mv = cur;
                    *w = j0;
                }
                if *mv < delta {
                    delta = *mv;
                    j1 = j + 1;
                }
            }
            for (((&done, &pj), vj), mv) in
                used.iter().zip(&p).zip(v.iter_mut()).zip(minv.iter_mut())
            {
                if done {
                    u[pj] += delta;
                    *vj -= delta;
                } else {
                    *mv -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; m];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

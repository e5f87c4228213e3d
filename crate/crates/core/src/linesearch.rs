//! Step-size rules for a Frank-Wolfe step `X + λ (Y − X)`, `λ ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WcsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LineSearch {
    /// Halve λ from 1 until the Armijo sufficient-decrease test passes.
    Backtracking {
        shrink: f64,
        armijo: f64,
        max_halvings: u32,
    },
    /// Exact minimizer of a quartic `φ(λ)`. Only valid when J is a degree-4
    /// polynomial along lines, which holds for H1 and PIW but not H2.
    ExactQuartic,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch::Backtracking {
            shrink: 0.5,
            armijo: 1e-4,
            max_halvings: 30,
        }
    }
}

impl LineSearch {
    pub fn validate(&self) -> Result<()> {
        if let LineSearch::Backtracking {
            shrink,
            armijo,
            max_halvings,
        } = *self
        {
            if !(shrink > 0.0 && shrink < 1.0) {
                return Err(WcsError::InvalidConfig(format!(
                    "shrink {shrink} outside (0, 1)"
                )));
            }
            if !(armijo > 0.0 && armijo < 1.0) {
                return Err(WcsError::InvalidConfig(format!(
                    "armijo {armijo} outside (0, 1)"
                )));
            }
            if max_halvings == 0 {
                return Err(WcsError::InvalidConfig(
                    "max_halvings must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Picks λ for `phi` with `phi(0) = f0` and directional derivative
    /// `slope < 0`. Returns `(λ, phi(λ))`; λ = 0 means no acceptable step.
    pub fn step(&self, phi: impl Fn(f64) -> f64, f0: f64, slope: f64) -> (f64, f64) {
        match *self {
            LineSearch::Backtracking {
                shrink,
                armijo,
                max_halvings,
            } => backtracking(phi, f0, slope, shrink, armijo, max_halvings),
            LineSearch::ExactQuartic => exact_quartic(phi, f0),
        }
    }
}

pub fn backtracking(
    phi: impl Fn(f64) -> f64,
    f0: f64,
    slope: f64,
    shrink: f64,
    armijo: f64,
    max_halvings: u32,
) -> (f64, f64) {
    let mut lambda = 1.0;
    for _ in 0..=max_halvings {
        let f = phi(lambda);
        if f <= f0 + armijo * lambda * slope {
            return (lambda, f);
        }
        lambda *= shrink;
    }
    (0.0, f0)
}

const NODES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Monomial coefficients of the quartic through `(NODES[k], values[k])`.
fn interpolate_quartic(values: &[f64; 5]) -> [f64; 5] {
    // Gaussian elimination on the Vandermonde system, partial pivoting.
    let mut a = [[0.0f64; 6]; 5];
    for (r, &t) in NODES.iter().enumerate() {
        let mut p = 1.0;
        for c in 0..5 {
            a[r][c] = p;
            p *= t;
        }
        a[r][5] = values[r];
    }
    for col in 0..5 {
        let pivot = (col..5)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in col + 1..5 {
            let f = a[r][col] / a[col][col];
            for c in col..6 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut coef = [0.0; 5];
    for r in (0..5).rev() {
        let mut s = a[r][5];
        for c in r + 1..5 {
            s -= a[r][c] * coef[c];
        }
        coef[r] = s / a[r][r];
    }
    coef
}

fn poly(coef: &[f64; 5], t: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn poly_deriv(coef: &[f64; 5], t: f64) -> f64 {
    coef[1] + t * (2.0 * coef[2] + t * (3.0 * coef[3] + t * 4.0 * coef[4]))
}

/// Stationary points of the cubic derivative on [0, 1].
fn derivative_roots(coef: &[f64; 5]) -> Vec<f64> {
    const GRID: usize = 64;
    let mut roots = Vec::new();
    let mut lo = 0.0;
    let mut dlo = poly_deriv(coef, lo);
    for k in 1..=GRID {
        let hi = k as f64 / GRID as f64;
        let dhi = poly_deriv(coef, hi);
        if dlo == 0.0 {
            roots.push(lo);
        } else if dlo.signum() != dhi.signum() && dhi != 0.0 {
            let (mut a, mut b, mut da) = (lo, hi, dlo);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let dm = poly_deriv(coef, mid);
                if dm.signum() == da.signum() {
                    a = mid;
                    da = dm;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        dlo = dhi;
    }
    roots
}

pub fn exact_quartic(phi: impl Fn(f64) -> f64, f0: f64) -> (f64, f64) {
    let mut values = [f0; 5];
    for k in 1..5 {
        values[k] = phi(NODES[k]);
    }
    let coef = interpolate_quartic(&values);
    let mut best = (1.0, values[4]);
    for t in derivative_roots(&coef) {
        let v = poly(&coef, t);
        if v < best.1 {
            best = (t, v);
        }
    }
    if best.0 != 1.0 {
        best.1 = phi(best.0);
    }
    if best.1 <= f0 {
        best
    } else {
        (0.0, f0)
    }
}

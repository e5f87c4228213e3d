//! The WCS objective, its differentiable relaxations and the GNCCP blend.
//!
//! With `U = X 1 X^T` and `K = X A_H X^T`, the structural term is
//! `H0(X) = ‖U ∘ A_G − K‖²_F`. H0 has no convenient gradient, so the
//! solver differentiates one of three surrogates that agree with H0 on P:
//!
//! * `H1 = tr((A_G ∘ A_G) U^T) − 2 tr(A_G X A_H^T X^T) + ‖K‖²`
//! * `H2 = ‖(XX^T) A_G (XX^T) − K‖²` written as `T1 − 2 T2 + T3`
//! * `PIW = ‖A_G − K‖²`, only meaningful when every row is matched (L = M)
//!
//! The blended objective is `F = α H + (1 − α) tr(C^T X)` and the
//! continuation functional is `J_ζ = (1 − |ζ|) F + ζ tr(X^T X)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WcsError};
use crate::types::{selection_mask, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelaxationKind {
    H1,
    H2,
    Piw,
}

impl fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelaxationKind::H1 => "h1",
            RelaxationKind::H2 => "h2",
            RelaxationKind::Piw => "piw",
        })
    }
}

impl FromStr for RelaxationKind {
    type Err = WcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h1" | "rlx1" => Ok(RelaxationKind::H1),
            "h2" | "rlx2" => Ok(RelaxationKind::H2),
            "piw" => Ok(RelaxationKind::Piw),
            other => Err(WcsError::InvalidConfig(format!(
                "unknown relaxation '{other}'"
            ))),
        }
    }
}

fn check_dims(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Result<()> {
    let (m, n) = x.dim();
    if a_g.dim() != (m, m) || a_h.dim() != (n, n) {
        return Err(WcsError::Dimension(format!(
            "X is {m}x{n}, A_G is {:?}, A_H is {:?}",
            a_g.dim(),
            a_h.dim()
        )));
    }
    Ok(())
}

fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub(crate) fn inner(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    match (a.as_slice(), b.as_slice()) {
        (Some(x), Some(y)) => dot_slices(x, y),
        _ => a.iter().zip(b.iter()).map(|(p, q)| p * q).sum(),
    }
}

/// Four independent accumulators so the loop vectorizes.
fn dot_slices(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (xc, xr) = x.split_at(x.len() / 4 * 4);
    let (yc, yr) = y.split_at(xc.len());
    for (p, q) in xc.chunks_exact(4).zip(yc.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += p[k] * q[k];
        }
    }
    let tail: f64 = xr.iter().zip(yr).map(|(p, q)| p * q).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn trace(a: &Array2<f64>) -> f64 {
    a.diag().sum()
}

/// `H0` evaluated literally from the masked-difference definition.
pub fn eval_h0(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Result<f64> {
    check_dims(x, a_g, a_h)?;
    let u = selection_mask(x);
    let k = x.dot(&a_h).dot(&x.t());
    Ok(frob_sq(&(&u * &a_g - &k)))
}

pub fn eval_h1(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Result<f64> {
    check_dims(x, a_g, a_h)?;
    Ok(h1_value(x, a_g, a_h))
}

pub fn grad_h1(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_dims(x, a_g, a_h)?;
    Ok(h1_gradient(x, a_g, a_h))
}

pub fn eval_h2(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Result<f64> {
    check_dims(x, a_g, a_h)?;
    Ok(h2_value(x, a_g, a_h))
}

pub fn grad_h2(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_dims(x, a_g, a_h)?;
    Ok(h2_gradient(x, a_g, a_h))
}

fn check_piw(x: ArrayView2<'_, f64>, l: usize) -> Result<()> {
    if l != x.nrows() {
        return Err(WcsError::InvalidConfig(format!(
            "piw requires L = M (got L={l}, M={})",
            x.nrows()
        )));
    }
    Ok(())
}

pub fn eval_piw(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
    l: usize,
) -> Result<f64> {
    check_dims(x, a_g, a_h)?;
    check_piw(x, l)?;
    Ok(piw_value(x, a_g, a_h))
}

pub fn grad_piw(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
    l: usize,
) -> Result<Array2<f64>> {
    check_dims(x, a_g, a_h)?;
    check_piw(x, l)?;
    Ok(piw_gradient(x, a_g, a_h))
}

fn h1_value(x: ArrayView2<'_, f64>, a_g: ArrayView2<'_, f64>, a_h: ArrayView2<'_, f64>) -> f64 {
    // U = r r^T with r the row sums, so tr((A∘A) U^T) = r^T (A∘A) r.
    let r = x.sum_axis(Axis(1));
    let sq = &a_g * &a_g;
    let masked = r.dot(&sq.dot(&r));
    let k = x.dot(&a_h).dot(&x.t());
    masked - 2.0 * inner(a_g, k.view()) + frob_sq(&k)
}

fn h1_gradient(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let r = x.sum_axis(Axis(1));
    let sq = &a_g * &a_g;
    let v = sq.dot(&r) + sq.t().dot(&r);
    let xa = x.dot(&a_h);
    let xat = x.dot(&a_h.t());
    let k = xa.dot(&x.t());

    let mut g = (a_g.t().dot(&xa) + a_g.dot(&xat)) * -2.0;
    g += &((k.dot(&xat) + k.t().dot(&xa)) * 2.0);
    // (A∘A + (A∘A)^T) X 1_{N×N} repeats v in every column
    g += &v.insert_axis(Axis(1));
    g
}

fn h2_value(x: ArrayView2<'_, f64>, a_g: ArrayView2<'_, f64>, a_h: ArrayView2<'_, f64>) -> f64 {
    let p = x.dot(&x.t());
    let k = x.dot(&a_h).dot(&x.t());
    let pap = p.dot(&a_g).dot(&p);
    let t1 = trace(&p.dot(&a_g.t()).dot(&pap));
    let t2 = trace(&p.dot(&a_g.t()).dot(&k));
    let t3 = frob_sq(&k);
    t1 - 2.0 * t2 + t3
}

fn h2_gradient(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let xa = x.dot(&a_h);
    let xat = x.dot(&a_h.t());
    let k = xa.dot(&x.t());
    h2_gradient_cached(x, a_g, xa.view(), xat.view(), k.view())
}

/// H2 gradient given `X A_H`, `X A_H^T` and `K`.
///
/// With `P = X X^T` and `B = A_G P` the three trace gradients collapse to
/// `Z X + 2 ((K − B) X A_H^T + (K − B)^T X A_H)` where
/// `Z = 2 (P A^T P A + A^T P A P + A P P A^T) − 2 (K^T A + A^T K)`.
pub(crate) fn h2_gradient_cached(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    xa: ArrayView2<'_, f64>,
    xat: ArrayView2<'_, f64>,
    k: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let p = x.dot(&x.t());
    let b = a_g.dot(&p);
    let e = p.dot(&a_g);
    let pap = b.t().dot(&e);
    let atk = a_g.t().dot(&k);
    let mut z = &pap + &pap.t() + b.dot(&b.t());
    z -= &(&atk + &atk.t());
    z *= 2.0;
    let kb = &k - &b;
    let mut g = z.dot(&x);
    g += &((kb.dot(&xat) + kb.t().dot(&xa)) * 2.0);
    g
}

fn piw_value(x: ArrayView2<'_, f64>, a_g: ArrayView2<'_, f64>, a_h: ArrayView2<'_, f64>) -> f64 {
    let k = x.dot(&a_h).dot(&x.t());
    frob_sq(&(&a_g - &k))
}

fn piw_gradient(
    x: ArrayView2<'_, f64>,
    a_g: ArrayView2<'_, f64>,
    a_h: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let xa = x.dot(&a_h);
    let xat = x.dot(&a_h.t());
    let k = xa.dot(&x.t());
    (k.dot(&xat) + k.t().dot(&xa)) * 2.0 - (a_g.dot(&xat) + a_g.t().dot(&xa)) * 2.0
}

/// Coefficient of F in `J_ζ`.
pub(crate) fn blend_weight(zeta: f64) -> f64 {
    if zeta >= 0.0 {
        1.0 - zeta
    } else {
        1.0 + zeta
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&zeta) {
        return Err(WcsError::InvalidConfig(format!(
            "zeta = {zeta} outside [-1, 1]"
        )));
    }
    Ok(())
}

/// A relaxation bound to one problem instance.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub(crate) a_g: ArrayView2<'a, f64>,
    pub(crate) a_h: ArrayView2<'a, f64>,
    pub(crate) cost: ArrayView2<'a, f64>,
    pub(crate) alpha: f64,
    pub(crate) kind: RelaxationKind,
    pub(crate) literal_gradient: bool,
}

impl<'a> Objective<'a> {
    pub fn new(instance: &'a ProblemInstance, kind: RelaxationKind) -> Result<Self> {
        if kind == RelaxationKind::Piw && !instance.is_part_in_whole() {
            return Err(WcsError::InvalidConfig(format!(
                "piw requires L = M (got L={}, M={})",
                instance.l,
                instance.m()
            )));
        }
        Ok(Self {
            a_g: instance.a_g().view(),
            a_h: instance.a_h().view(),
            cost: instance.cost.entries().view(),
            alpha: instance.alpha,
            kind,
            literal_gradient: false,
        })
    }

    /// Use `∇H + (1 − α) C` for the gradient of F, dropping α on the
    /// structural part. The result is then not the derivative of
    /// [`Objective::eval_f`] unless α = 1.
    pub fn with_literal_gradient(mut self, literal: bool) -> Self {
        self.literal_gradient = literal;
        self
    }

    pub fn kind(&self) -> RelaxationKind {
        self.kind
    }

    fn check_x(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        check_dims(x, self.a_g, self.a_h)
    }

    pub fn eval_structural(&self, x: ArrayView2<'_, f64>) -> f64 {
        match self.kind {
            RelaxationKind::H1 => h1_value(x, self.a_g, self.a_h),
            RelaxationKind::H2 => h2_value(x, self.a_g, self.a_h),
            RelaxationKind::Piw => piw_value(x, self.a_g, self.a_h),
        }
    }

    pub fn grad_structural(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        match self.kind {
            RelaxationKind::H1 => h1_gradient(x, self.a_g, self.a_h),
            RelaxationKind::H2 => h2_gradient(x, self.a_g, self.a_h),
            RelaxationKind::Piw => piw_gradient(x, self.a_g, self.a_h),
        }
    }

    pub fn eval_f(&self, x: ArrayView2<'_, f64>) -> f64 {
        let mut v = 0.0;
        if self.alpha != 0.0 {
            v += self.alpha * self.eval_structural(x);
        }
        if self.alpha != 1.0 {
            v += (1.0 - self.alpha) * inner(self.cost, x);
        }
        v
    }

    pub fn grad_f(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let structural_weight = if self.literal_gradient {
            1.0
        } else {
            self.alpha
        };
        let mut g = if structural_weight != 0.0 {
            self.grad_structural(x) * structural_weight
        } else {
            Array2::zeros(x.dim())
        };
        if self.alpha != 1.0 {
            g.scaled_add(1.0 - self.alpha, &self.cost);
        }
        g
    }

    /// `J_ζ(X)`; ζ must already lie in [−1, 1].
    pub fn eval_j(&self, x: ArrayView2<'_, f64>, zeta: f64) -> f64 {
        let w = blend_weight(zeta);
        let quad: f64 = x.iter().map(|v| v * v).sum();
        let f = if w != 0.0 { w * self.eval_f(x) } else { 0.0 };
        f + zeta * quad
    }

    pub fn grad_j(&self, x: ArrayView2<'_, f64>, zeta: f64) -> Array2<f64> {
        let w = blend_weight(zeta);
        let mut g = if w != 0.0 {
            self.grad_f(x) * w
        } else {
            Array2::zeros(x.dim())
        };
        g.scaled_add(2.0 * zeta, &x);
        g
    }
}

pub fn eval_f(
    x: ArrayView2<'_, f64>,
    instance: &ProblemInstance,
    kind: RelaxationKind,
) -> Result<f64> {
    let obj = Objective::new(instance, kind)?;
    obj.check_x(x)?;
    Ok(obj.eval_f(x))
}

pub fn grad_f(
    x: ArrayView2<'_, f64>,
    instance: &ProblemInstance,
    kind: RelaxationKind,
) -> Result<Array2<f64>> {
    let obj = Objective::new(instance, kind)?;
    obj.check_x(x)?;
    Ok(obj.grad_f(x))
}

pub fn eval_j(
    x: ArrayView2<'_, f64>,
    instance: &ProblemInstance,
    kind: RelaxationKind,
    zeta: f64,
) -> Result<f64> {
    check_zeta(zeta)?;
    let obj = Objective::new(instance, kind)?;
    obj.check_x(x)?;
    Ok(obj.eval_j(x, zeta))
}

pub fn grad_j(
    x: ArrayView2<'_, f64>,
    instance: &ProblemInstance,
    kind: RelaxationKind,
    zeta: f64,
) -> Result<Array2<f64>> {
    check_zeta(zeta)?;
    let obj = Objective::new(instance, kind)?;
    obj.check_x(x)?;
    Ok(obj.grad_j(x, zeta))
}

/// `α H0(X) + (1 − α) tr(C^T X)`, the objective reported for results.
pub fn eval_true_objective(x: ArrayView2<'_, f64>, instance: &ProblemInstance) -> Result<f64> {
    let h0 = eval_h0(x, instance.a_g().view(), instance.a_h().view())?;
    Ok(instance.alpha * h0 + (1.0 - instance.alpha) * inner(instance.cost.entries().view(), x))
}

//! Frank-Wolfe bookkeeping that avoids matrix products along a step.
//!
//! Every target Y is a partial permutation, so `Y A_H`, `X A_H Y^T` and
//! friends are row and column selections. Caching `X A_H`, `X A_H^T` and
//! `K = X A_H X^T` therefore makes `J(X + λ(Y − X))` cheap for any λ, and
//! the cache can be moved to the accepted point without recomputation.
//! Along a line the structural term is a polynomial in λ (degree 4 for H1
//! and PIW, 6 for H2) whose coefficients are found once per step.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::objective::{blend_weight, h2_gradient_cached, inner, Objective, RelaxationKind};
use crate::types::PartialPermutation;

pub(crate) struct Iterate {
    pub(crate) x: Array2<f64>,
    xa: Array2<f64>,
    xat: Array2<f64>,
    k: Array2<f64>,
}

impl Iterate {
    pub(crate) fn into_matrix(self) -> Array2<f64> {
        self.x
    }
}

pub(crate) struct Evaluator<'a> {
    obj: Objective<'a>,
    /// `A_G ∘ A_G`, used by H1.
    sq: Array2<f64>,
    ag_sq: f64,
}

/// `J` restricted to `X + λ (Y − X)`.
pub(crate) struct Line {
    cols: Vec<Option<usize>>,
    k1: Array2<f64>,
    k2: Array2<f64>,
    blend: f64,
    alpha: f64,
    zeta: f64,
    /// Structural term, ascending powers of λ.
    poly: [f64; 7],
    /// `⟨C, X⟩ + λ ⟨C, D⟩`
    lin: [f64; 2],
    /// `‖X + λ D‖²`
    quad: [f64; 3],
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(obj: Objective<'a>) -> Self {
        let sq = &obj.a_g * &obj.a_g;
        let ag_sq = sq.sum();
        Self { obj, sq, ag_sq }
    }

    pub(crate) fn iterate(&self, x: Array2<f64>) -> Iterate {
        let xa = x.dot(&self.obj.a_h);
        let xat = x.dot(&self.obj.a_h.t());
        let k = xa.dot(&x.t());
        Iterate { x, xa, xat, k }
    }

    fn structural(&self, it: &Iterate) -> f64 {
        let (a_g, k) = (self.obj.a_g, &it.k);
        match self.obj.kind {
            RelaxationKind::H1 => {
                let r = it.x.sum_axis(Axis(1));
                r.dot(&self.sq.dot(&r)) - 2.0 * inner(a_g, k.view()) + inner(k.view(), k.view())
            }
            RelaxationKind::Piw => {
                self.ag_sq - 2.0 * inner(a_g, k.view()) + inner(k.view(), k.view())
            }
            RelaxationKind::H2 => h2_value(a_g, &it.x.dot(&it.x.t()), k),
        }
    }

    fn structural_gradient(&self, it: &Iterate) -> Array2<f64> {
        let a_g = self.obj.a_g;
        match self.obj.kind {
            RelaxationKind::H1 | RelaxationKind::Piw => {
                let kb = &it.k - &a_g;
                let mut g = kb.t().dot(&it.xa) + kb.dot(&it.xat);
                g *= 2.0;
                if self.obj.kind == RelaxationKind::H1 {
                    let r = it.x.sum_axis(Axis(1));
                    let v = self.sq.dot(&r) + self.sq.t().dot(&r);
                    g += &v.insert_axis(Axis(1));
                }
                g
            }
            RelaxationKind::H2 => {
                h2_gradient_cached(it.x.view(), a_g, it.xa.view(), it.xat.view(), it.k.view())
            }
        }
    }

    pub(crate) fn j(&self, it: &Iterate, zeta: f64) -> f64 {
        let w = blend_weight(zeta);
        let alpha = self.obj.alpha;
        let mut f = 0.0;
        if w != 0.0 {
            if alpha != 0.0 {
                f += alpha * self.structural(it);
            }
            if alpha != 1.0 {
                f += (1.0 - alpha) * inner(self.obj.cost, it.x.view());
            }
        }
        w * f + zeta * inner(it.x.view(), it.x.view())
    }

    pub(crate) fn grad_j(&self, it: &Iterate, zeta: f64) -> Array2<f64> {
        let w = blend_weight(zeta);
        let alpha = self.obj.alpha;
        let structural_weight = if self.obj.literal_gradient {
            1.0
        } else {
            alpha
        };
        let mut g = if w != 0.0 && structural_weight != 0.0 {
            self.structural_gradient(it) * (w * structural_weight)
        } else {
            Array2::zeros(it.x.dim())
        };
        if w != 0.0 && alpha != 1.0 {
            g.scaled_add(w * (1.0 - alpha), &self.obj.cost);
        }
        g.scaled_add(2.0 * zeta, &it.x);
        g
    }

    pub(crate) fn line(&self, it: &Iterate, y: &PartialPermutation, zeta: f64) -> Line {
        let cols = y.row_assignment().to_vec();
        let m = it.x.nrows();
        let a_h = self.obj.a_h;
        let k0 = &it.k;

        // X A Y^T, Y A X^T and Y A Y^T are row/column selections.
        let mut k1 = Array2::zeros((m, m));
        let mut k2 = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                let xay = cols[j].map_or(0.0, |c| it.xa[[i, c]]);
                let yax = cols[i].map_or(0.0, |c| it.xat[[j, c]]);
                let yay = match (cols[i], cols[j]) {
                    (Some(a), Some(b)) => a_h[[a, b]],
                    _ => 0.0,
                };
                let k = k0[[i, j]];
                k1[[i, j]] = xay + yax - 2.0 * k;
                k2[[i, j]] = yay - yax - xay + k;
            }
        }

        let at_y = |a: ArrayView2<'_, f64>| -> f64 {
            cols.iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|c| a[[i, c]]))
                .sum()
        };
        let xx = inner(it.x.view(), it.x.view());
        let xy = at_y(it.x.view());
        let l = y.size() as f64;
        let quad = [xx, xy - xx, l - 2.0 * xy + xx];
        let cx = inner(self.obj.cost, it.x.view());
        let lin = [cx, at_y(self.obj.cost) - cx];

        let kk = |a: &Array2<f64>, b: &Array2<f64>| inner(a.view(), b.view());
        let ks = [k0, &k1, &k2];
        // ‖K(λ)‖² and ⟨A_G, K(λ)⟩ are shared by every relaxation.
        let mut poly = [0.0; 7];
        for a in 0..3 {
            poly[2 * a] += kk(ks[a], ks[a]);
            for b in a + 1..3 {
                poly[a + b] += 2.0 * kk(ks[a], ks[b]);
            }
        }
        let a_g = self.obj.a_g;
        match self.obj.kind {
            RelaxationKind::H1 | RelaxationKind::Piw => {
                for (a, k) in ks.iter().enumerate() {
                    poly[a] -= 2.0 * inner(a_g, k.view());
                }
                if self.obj.kind == RelaxationKind::H1 {
                    let r0 = it.x.sum_axis(Axis(1));
                    let ry: Array1<f64> = cols
                        .iter()
                        .map(|c| if c.is_some() { 1.0 } else { 0.0 })
                        .collect();
                    let rd = &ry - &r0;
                    let s0 = self.sq.dot(&r0);
                    let sd = self.sq.dot(&rd);
                    poly[0] += r0.dot(&s0);
                    poly[1] += r0.dot(&sd) + rd.dot(&s0);
                    poly[2] += rd.dot(&sd);
                } else {
                    poly[0] += self.ag_sq;
                }
            }
            RelaxationKind::H2 => {
                // P(λ) = P0 + λ P1 + λ² P2 with P = X X^T.
                let p0 = it.x.dot(&it.x.t());
                let xyt =
                    Array2::from_shape_fn((m, m), |(i, j)| cols[j].map_or(0.0, |c| it.x[[i, c]]));
                let p1 = &xyt + &xyt.t() - &p0 * 2.0;
                let mut p2 = &p0 - &xyt - xyt.t();
                for (i, c) in cols.iter().enumerate() {
                    if c.is_some() {
                        p2[[i, i]] += 1.0;
                    }
                }
                let ps = [&p0, &p1, &p2];
                // With R = A_G P: T1 = ⟨R, P R⟩ and T2 = ⟨R, K⟩.
                let rs: Vec<Array2<f64>> = ps.iter().map(|p| a_g.dot(*p)).collect();
                // ⟨R_a, P_b R_c⟩ is symmetric in a and c because P_b is.
                for (b, p) in ps.iter().enumerate() {
                    for (c, r) in rs.iter().enumerate() {
                        let q = p.dot(r);
                        poly[c + b + c] += kk(r, &q);
                        for (a, ra) in rs.iter().enumerate().take(c) {
                            poly[a + b + c] += 2.0 * kk(ra, &q);
                        }
                    }
                }
                for (a, ra) in rs.iter().enumerate() {
                    for (b, k) in ks.iter().enumerate() {
                        poly[a + b] -= 2.0 * kk(ra, k);
                    }
                }
            }
        }

        Line {
            cols,
            k1,
            k2,
            blend: blend_weight(zeta),
            alpha: self.obj.alpha,
            zeta,
            poly,
            lin,
            quad,
        }
    }

    /// Moves the iterate to `X + λ (Y − X)`.
    pub(crate) fn step(&self, it: &mut Iterate, line: &Line, lambda: f64) {
        let a_h = self.obj.a_h;
        let keep = 1.0 - lambda;
        it.x *= keep;
        it.xa *= keep;
        it.xat *= keep;
        for (i, c) in line.cols.iter().enumerate() {
            if let Some(c) = *c {
                it.x[[i, c]] += lambda;
                it.xa.row_mut(i).scaled_add(lambda, &a_h.row(c));
                it.xat.row_mut(i).scaled_add(lambda, &a_h.column(c));
            }
        }
        it.k.scaled_add(lambda, &line.k1);
        it.k.scaled_add(lambda * lambda, &line.k2);
    }
}

impl Line {
    pub(crate) fn eval(&self, lambda: f64) -> f64 {
        let mut f = 0.0;
        if self.blend != 0.0 {
            if self.alpha != 0.0 {
                f += self.alpha * poly_eval(&self.poly, lambda);
            }
            if self.alpha != 1.0 {
                f += (1.0 - self.alpha) * (self.lin[0] + lambda * self.lin[1]);
            }
        }
        let q = self.quad[0] + lambda * (2.0 * self.quad[1] + lambda * self.quad[2]);
        self.blend * f + self.zeta * q
    }
}

/// `tr(P A^T P A P) − 2 tr(P A^T K) + ‖K‖²` for symmetric P.
fn h2_value(a_g: ArrayView2<'_, f64>, p: &Array2<f64>, k: &Array2<f64>) -> f64 {
    let ap = a_g.dot(p);
    let q = p.dot(&ap);
    inner(ap.view(), q.view()) - 2.0 * inner(ap.view(), k.view()) + inner(k.view(), k.view())
}

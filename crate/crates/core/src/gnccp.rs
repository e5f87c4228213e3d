//! Graduated nonconvexity and concavity with a Frank-Wolfe inner solver.
//!
//! Starting from the barycenter of D at ζ = 1, ζ is lowered by `zeta_step`
//! down to −1. Each value of ζ warm-starts Frank-Wolfe from the previous
//! solution. As J becomes concave its minimizers move to vertices of D, so
//! the iterate ends up in P and the loop stops early once it is.

use std::time::{Duration, Instant};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::direction::{discretize, DirectionMethod};
use crate::error::{Result, WcsError};
use crate::iterate::Evaluator;
use crate::linesearch::LineSearch;
use crate::objective::{eval_h0, eval_true_objective, inner, Objective, RelaxationKind};
use crate::types::{PartialPermutation, ProblemInstance, RelaxedAssignment, BINARITY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Overrides the instance's α when set.
    pub alpha: Option<f64>,
    pub relaxation: RelaxationKind,
    pub direction: DirectionMethod,
    pub zeta_step: f64,
    pub fw_max_iters: usize,
    /// Relative Frank-Wolfe duality gap used as the inner stopping rule.
    pub fw_gap_tol: f64,
    pub linesearch: LineSearch,
    pub binarity_tol: f64,
    /// Use `∇H + (1 − α) C` as the gradient of F instead of `α ∇H + (1 − α) C`.
    pub literal_gradient: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: None,
            relaxation: RelaxationKind::H1,
            direction: DirectionMethod::Exact,
            zeta_step: 0.01,
            fw_max_iters: 100,
            fw_gap_tol: 1e-4,
            linesearch: LineSearch::default(),
            binarity_tol: BINARITY_TOL,
            literal_gradient: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn new(relaxation: RelaxationKind, direction: DirectionMethod) -> Self {
        Self {
            relaxation,
            direction,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(WcsError::InvalidConfig(format!(
                    "alpha = {a} outside [0, 1]"
                )));
            }
        }
        if !(self.zeta_step > 0.0 && self.zeta_step <= 2.0) {
            return Err(WcsError::InvalidConfig(format!(
                "zeta step {} outside (0, 2]",
                self.zeta_step
            )));
        }
        if self.fw_max_iters == 0 {
            return Err(WcsError::InvalidConfig(
                "fw_max_iters must be positive".into(),
            ));
        }
        if !(self.fw_gap_tol > 0.0) {
            return Err(WcsError::InvalidConfig(
                "fw_gap_tol must be positive".into(),
            ));
        }
        if !(self.binarity_tol > 0.0 && self.binarity_tol < 0.5) {
            return Err(WcsError::InvalidConfig(
                "binarity_tol must be in (0, 0.5)".into(),
            ));
        }
        self.linesearch.validate()?;
        if self.linesearch == LineSearch::ExactQuartic && self.relaxation == RelaxationKind::H2 {
            return Err(WcsError::InvalidConfig(
                "exact quartic line search is only valid for h1 and piw".into(),
            ));
        }
        Ok(())
    }
}

/// One ζ step of the continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub zeta: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub fw_iters: usize,
    pub gap: f64,
    pub binarity: f64,
}

#[derive(Debug, Clone)]
pub struct MatchResult {
    pub assignment: PartialPermutation,
    pub objective_h0: f64,
    pub objective_f: f64,
    pub trace: Vec<TraceRecord>,
    pub discretized_by_fallback: bool,
    pub wall_time: Duration,
}

/// Result of minimizing `J_ζ` at a fixed ζ.
#[derive(Debug, Clone)]
pub struct FwOutcome {
    pub x: RelaxedAssignment,
    /// J at the start and after every accepted step.
    pub j_history: Vec<f64>,
    pub iterations: usize,
    /// Last computed Frank-Wolfe gap `tr(−∇J^T (Y − X))`.
    pub gap: f64,
}

impl FwOutcome {
    pub fn j(&self) -> f64 {
        *self.j_history.last().expect("history is never empty")
    }
}

fn run_frank_wolfe(
    ev: &Evaluator<'_>,
    x: Array2<f64>,
    l: usize,
    zeta: f64,
    config: &SolverConfig,
) -> Result<FwOutcome> {
    let mut it = ev.iterate(x);
    let mut j = ev.j(&it, zeta);
    let mut history = vec![j];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    for _ in 0..config.fw_max_iters {
        let grad = ev.grad_j(&it, zeta);
        let score = grad.mapv(|g| -g);
        let y = config.direction.solve(score.view(), l)?;
        // ⟨∇J, Y − X⟩ without forming Y
        let slope = -y.score(score.view()) - inner(grad.view(), it.x.view());
        gap = -slope;
        if gap <= config.fw_gap_tol * (1.0 + j.abs()) {
            break;
        }
        let line = ev.line(&it, &y, zeta);
        let (lambda, j_new) = config.linesearch.step(|t| line.eval(t), j, slope);
        if lambda <= 0.0 || j_new > j {
            break;
        }
        ev.step(&mut it, &line, lambda);
        j = j_new;
        history.push(j);
        iterations += 1;
    }

    Ok(FwOutcome {
        x: RelaxedAssignment::from_raw(it.into_matrix(), l),
        j_history: history,
        iterations,
        gap,
    })
}

fn effective_instance<'a>(
    instance: &'a ProblemInstance,
    config: &SolverConfig,
) -> std::borrow::Cow<'a, ProblemInstance> {
    match config.alpha {
        Some(a) if a != instance.alpha => {
            let mut owned = instance.clone();
            owned.alpha = a;
            std::borrow::Cow::Owned(owned)
        }
        _ => std::borrow::Cow::Borrowed(instance),
    }
}

/// Frank-Wolfe minimization of `J_ζ` over D starting at `x0`.
pub fn fw_minimize(
    x0: &RelaxedAssignment,
    instance: &ProblemInstance,
    kind: RelaxationKind,
    zeta: f64,
    config: &SolverConfig,
) -> Result<FwOutcome> {
    config.validate()?;
    if !(-1.0..=1.0).contains(&zeta) {
        return Err(WcsError::InvalidConfig(format!(
            "zeta = {zeta} outside [-1, 1]"
        )));
    }
    if x0.matrix().dim() != (instance.m(), instance.n()) || x0.size() != instance.l {
        return Err(WcsError::Dimension(
            "starting point does not match the instance".into(),
        ));
    }
    let inst = effective_instance(instance, config);
    let obj = Objective::new(&inst, kind)?.with_literal_gradient(config.literal_gradient);
    run_frank_wolfe(
        &Evaluator::new(obj),
        x0.matrix().clone(),
        instance.l,
        zeta,
        config,
    )
}

/// Runs the full continuation with `config.relaxation`.
pub fn match_graphs(instance: &ProblemInstance, config: &SolverConfig) -> Result<MatchResult> {
    config.validate()?;
    let start = Instant::now();
    let inst = effective_instance(instance, config);
    let obj =
        Objective::new(&inst, config.relaxation)?.with_literal_gradient(config.literal_gradient);
    let ev = Evaluator::new(obj);
    let l = inst.l;

    let mut x = RelaxedAssignment::uniform(inst.m(), inst.n(), l)?.into_matrix();
    let mut trace = Vec::new();
    let mut in_p = false;
    let mut step = 0usize;
    loop {
        let mut zeta = 1.0 - step as f64 * config.zeta_step;
        if zeta < -1.0 - 1e-9 {
            break;
        }
        zeta = zeta.max(-1.0);
        let out = run_frank_wolfe(&ev, x, l, zeta, config)?;
        trace.push(TraceRecord {
            zeta,
            j: out.j(),
            fw_iters: out.iterations,
            gap: out.gap,
            binarity: out.x.binarity(),
        });
        in_p = out.x.is_partial_permutation(config.binarity_tol);
        x = out.x.into_matrix();
        if in_p {
            break;
        }
        step += 1;
    }

    let (assignment, fallback) = if in_p {
        (
            PartialPermutation::from_matrix(x.view(), l, config.binarity_tol)?,
            false,
        )
    } else {
        (discretize(&RelaxedAssignment::from_raw(x, l))?, true)
    };
    let xm = assignment.to_matrix();
    let objective_h0 = eval_h0(xm.view(), inst.a_g().view(), inst.a_h().view())?;
    let objective_f = eval_true_objective(xm.view(), &inst)?;

    Ok(MatchResult {
        assignment,
        objective_h0,
        objective_f,
        trace,
        discretized_by_fallback: fallback,
        wall_time: start.elapsed(),
    })
}

/// Part-in-whole matching (L = M) with the `‖A_G − X A_H X^T‖²` objective.
pub fn match_piw(instance: &ProblemInstance, config: &SolverConfig) -> Result<MatchResult> {
    if !instance.is_part_in_whole() {
        return Err(WcsError::InvalidConfig(format!(
            "piw requires L = M (got L={}, M={})",
            instance.l,
            instance.m()
        )));
    }
    let cfg = SolverConfig {
        relaxation: RelaxationKind::Piw,
        ..config.clone()
    };
    let result = match_graphs(instance, &cfg)?;
    debug_assert!(result
        .assignment
        .row_assignment()
        .iter()
        .all(Option::is_some));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CostMatrix, WeightedGraph};
    use ndarray::array;

    fn small_instance() -> ProblemInstance {
        let g = WeightedGraph::unlabeled(array![[0., 0.4, 0.9], [0.4, 0., 0.7], [0.9, 0.7, 0.]])
            .unwrap();
        let h = WeightedGraph::unlabeled(array![
            [0., 0.7, 0.1, 0.9],
            [0.7, 0., 0.5, 0.4],
            [0.1, 0.5, 0., 0.3],
            [0.9, 0.4, 0.3, 0.]
        ])
        .unwrap();
        ProblemInstance::structural(g, h, 2).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            zeta_step: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            zeta_step: 2.5,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            relaxation: RelaxationKind::H2,
            linesearch: LineSearch::ExactQuartic,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            alpha: Some(1.5),
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fw_at_zeta_one_reaches_barycenter() {
        let inst = small_instance();
        let p = PartialPermutation::from_pairs(3, 4, 2, &[(0, 3), (2, 1)]).unwrap();
        let x0 = RelaxedAssignment::from(&p);
        let cfg = SolverConfig {
            fw_max_iters: 2000,
            fw_gap_tol: 1e-9,
            linesearch: LineSearch::ExactQuartic,
            ..SolverConfig::default()
        };
        let out = fw_minimize(&x0, &inst, RelaxationKind::H1, 1.0, &cfg).unwrap();
        let target = 2.0 / 12.0;
        for v in out.x.matrix().iter() {
            assert!((v - target).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn fw_at_zeta_minus_one_lands_on_vertex() {
        let inst = small_instance();
        // The barycenter is stationary for −tr(XᵀX), so start off-center.
        let a = PartialPermutation::from_pairs(3, 4, 2, &[(0, 0), (1, 1)])
            .unwrap()
            .to_matrix();
        let b = PartialPermutation::from_pairs(3, 4, 2, &[(1, 2), (2, 3)])
            .unwrap()
            .to_matrix();
        let x0 = RelaxedAssignment::new(a * 0.6 + b * 0.4, 2).unwrap();
        let out = fw_minimize(
            &x0,
            &inst,
            RelaxationKind::H1,
            -1.0,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(out.x.is_partial_permutation(1e-9), "{:?}", out.x.matrix());
    }

    #[test]
    fn fw_history_is_monotone() {
        let inst = small_instance();
        let x0 = RelaxedAssignment::uniform(3, 4, 2).unwrap();
        for kind in [RelaxationKind::H1, RelaxationKind::H2] {
            let out = fw_minimize(&x0, &inst, kind, 0.5, &SolverConfig::default()).unwrap();
            for w in out.j_history.windows(2) {
                assert!(w[1] <= w[0], "{:?}", out.j_history);
            }
        }
    }

    #[test]
    fn linear_problem_picks_cheapest_assignment() {
        let g = WeightedGraph::unlabeled(Array2::zeros((2, 2))).unwrap();
        let c = CostMatrix::new(array![[0., 1.], [1., 0.]]).unwrap();
        let inst = ProblemInstance::new(g.clone(), g, c, 2, 0.0).unwrap();
        let r = match_graphs(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(
            r.assignment.pairs().collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );
        assert_eq!(r.objective_f, 0.0);
        assert!(!r.discretized_by_fallback);
    }

    #[test]
    fn piw_rejects_partial_instances() {
        let inst = small_instance();
        let err = match_piw(&inst, &SolverConfig::default()).unwrap_err();
        assert!(err.to_string().contains("piw requires L = M"));
        let cfg = SolverConfig::new(RelaxationKind::Piw, DirectionMethod::Exact);
        assert!(match_graphs(&inst, &cfg).is_err());
    }

    #[test]
    fn deterministic_trace() {
        let inst = small_instance();
        let cfg = SolverConfig::default();
        let a = match_graphs(&inst, &cfg).unwrap();
        let b = match_graphs(&inst, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn trace_zeta_schedule_starts_at_one_and_descends() {
        let inst = small_instance();
        let r = match_graphs(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(r.trace[0].zeta, 1.0);
        for w in r.trace.windows(2) {
            assert!(w[1].zeta < w[0].zeta);
        }
        assert!(r.trace.last().unwrap().zeta >= -1.0);
    }
}

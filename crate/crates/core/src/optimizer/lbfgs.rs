use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::function::{CapabilitySet, Differentiable, Function};
use crate::math;
use crate::optimizer::{
    precheck, Monitor, OptimizationResult, OptimizeError, Optimizer, Oracle, Session, Termination,
    TerminationReason,
};

/// Sufficient-decrease constant of the Armijo condition.
const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK_FACTOR: f64 = 0.5;
const MAX_BACKTRACKS: u32 = 20;
/// Pairs with `sᵀy ≤ CURVATURE_EPS · ‖s‖‖y‖` are not stored.
const CURVATURE_EPS: f64 = 1e-12;

struct CurvaturePair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Limited-memory BFGS with a backtracking Armijo line search.
///
/// The search direction comes from the two-loop recursion over the last
/// `memory` curvature pairs, with the initial Hessian scaled by
/// `sᵀy / yᵀy` of the newest pair. The line search starts at step 1 and
/// halves up to 20 times; if no step satisfies the Armijo condition the run
/// stops with [`TerminationReason::StepTolerance`]. A pair that fails the
/// curvature test is not stored and the history is cleared, so the next step
/// is steepest descent; this keeps the implicit Hessian positive definite
/// without a Wolfe search and avoids creeping along a stale model in regions
/// of negative curvature. Accepted objectives never increase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lbfgs {
    pub memory: usize,
    pub termination: Termination,
}

impl Default for Lbfgs {
    fn default() -> Self {
        Self { memory: 10, termination: Termination::default() }
    }
}

impl Lbfgs {
    pub fn new(memory: usize) -> Self {
        Self { memory, ..Self::default() }
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn minimize<F: Differentiable>(&self, function: &mut F, initial: &[f64]) -> Result<OptimizationResult, OptimizeError> {
        self.optimize(function, initial)
    }
}

/// `-H g` by the two-loop recursion.
fn search_direction(history: &VecDeque<CurvaturePair>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * math::dot(&pair.s, &q);
        for (qi, yi) in q.iter_mut().zip(&pair.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(newest) = history.back() {
        let gamma = math::dot(&newest.s, &newest.y) / math::dot(&newest.y, &newest.y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (pair, a) in history.iter().zip(alphas.iter().rev()) {
        let b = pair.rho * math::dot(&pair.y, &q);
        for (qi, si) in q.iter_mut().zip(&pair.s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

impl Optimizer for Lbfgs {
    fn name(&self) -> &str {
        "L-BFGS"
    }

    fn required_capabilities(&self) -> CapabilitySet {
        CapabilitySet::DIFFERENTIABLE
    }

    fn optimize_monitored(
        &self,
        function: &mut dyn Function,
        initial: &[f64],
        monitor: &mut dyn Monitor,
    ) -> Result<OptimizationResult, OptimizeError> {
        precheck(self, function, initial)?;
        let term = &self.termination;
        term.validate()?;
        if self.memory == 0 {
            return Err(OptimizeError::InvalidConfig("memory must be at least 1".into()));
        }
        let mut oracle = Oracle::new(function)?;

        let mut x = initial.to_vec();
        let mut fx = oracle.evaluate(&x)?;
        if !fx.is_finite() {
            return Err(OptimizeError::NonFiniteInitialObjective(fx));
        }
        let mut g = oracle.gradient(&x)?.into_dense();
        let mut gnorm = math::norm(&g);
        let mut session = Session::new(monitor, &x, fx);
        session.record(0, oracle.evaluations, fx, gnorm);

        let mut history: VecDeque<CurvaturePair> = VecDeque::with_capacity(self.memory);
        let mut reason = TerminationReason::MaxIterations;
        let mut iterations = 0;
        let mut trial = alloc::vec![0.0; x.len()];
        for it in 1..=term.max_iterations {
            if !gnorm.is_finite() {
                reason = TerminationReason::Rejected;
                break;
            }
            if gnorm < term.gradient_tolerance {
                reason = TerminationReason::GradientTolerance;
                break;
            }
            let mut direction = search_direction(&history, &g);
            let mut slope = math::dot(&g, &direction);
            if !(slope < 0.0) {
                // Not a descent direction: restart from steepest descent.
                history.clear();
                direction = g.iter().map(|v| -v).collect();
                slope = -gnorm * gnorm;
            }

            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_BACKTRACKS {
                for ((t, xi), di) in trial.iter_mut().zip(&x).zip(&direction) {
                    *t = xi + alpha * di;
                }
                let f_trial = oracle.evaluate(&trial)?;
                if f_trial.is_finite() && f_trial <= fx + ARMIJO_C1 * alpha * slope {
                    accepted = Some(f_trial);
                    break;
                }
                alpha *= BACKTRACK_FACTOR;
            }
            let Some(f_new) = accepted else {
                reason = TerminationReason::StepTolerance;
                break;
            };

            let g_new = oracle.gradient(&trial)?.into_dense();
            let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = math::dot(&s, &y);
            if sy > CURVATURE_EPS * math::norm(&s) * math::norm(&y) {
                if history.len() == self.memory {
                    history.pop_front();
                }
                history.push_back(CurvaturePair { s, y, rho: 1.0 / sy });
            } else {
                // Stale pairs keep producing the same short step; start over.
                history.clear();
            }

            core::mem::swap(&mut x, &mut trial);
            g = g_new;
            gnorm = math::norm(&g);
            let decrease = fx - f_new;
            fx = f_new;
            iterations = it;
            session.iterate(it, &x);
            session.record(it, oracle.evaluations, fx, gnorm);
            session.consider(&x, fx);
            if decrease < term.objective_tolerance {
                reason = TerminationReason::ObjectiveTolerance;
                break;
            }
        }
        session.finish(&mut oracle, x, iterations, reason)
    }
}

use crate::function::{CapabilitySet, Differentiable, Function};
use crate::math;
use crate::optimizer::{
    diverged, positive, precheck, Monitor, OptimizationResult, OptimizeError, Optimizer, Oracle,
    Session, Termination, TerminationReason,
};

/// Fixed-step gradient descent: `x ← x − η ∇f(x)`.
///
/// One iteration is one parameter update. Every iteration is traced with its
/// gradient norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientDescent {
    pub step_size: f64,
    pub termination: Termination,
}

impl GradientDescent {
    pub fn new(step_size: f64) -> Self {
        Self { step_size, termination: Termination::default() }
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn minimize<F: Differentiable>(&self, function: &mut F, initial: &[f64]) -> Result<OptimizationResult, OptimizeError> {
        self.optimize(function, initial)
    }
}

impl Optimizer for GradientDescent {
    fn name(&self) -> &str {
        "GradientDescent"
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
        self.termination.validate()?;
        positive("step_size", self.step_size)?;
        let term = &self.termination;
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

        let mut reason = TerminationReason::MaxIterations;
        let mut iterations = 0;
        for it in 1..=term.max_iterations {
            if !gnorm.is_finite() {
                reason = TerminationReason::Rejected;
                break;
            }
            if gnorm < term.gradient_tolerance {
                reason = TerminationReason::GradientTolerance;
                break;
            }
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= self.step_size * gi;
            }
            iterations = it;
            session.iterate(it, &x);
            let f_new = oracle.evaluate(&x)?;
            if diverged(f_new) {
                reason = TerminationReason::Rejected;
                break;
            }
            g = oracle.gradient(&x)?.into_dense();
            gnorm = math::norm(&g);
            session.record(it, oracle.evaluations, f_new, gnorm);
            session.consider(&x, f_new);
            let change = (fx - f_new).abs();
            fx = f_new;
            if change < term.objective_tolerance {
                reason = TerminationReason::ObjectiveTolerance;
                break;
            }
        }
        session.finish(&mut oracle, x, iterations, reason)
    }
}

impl Default for GradientDescent {
    fn default() -> Self {
        Self::new(0.01)
    }
}


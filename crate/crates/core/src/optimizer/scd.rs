use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::function::{CapabilitySet, Evaluable, Function, PartiallyDifferentiable};
use crate::optimizer::{
    diverged, positive, precheck, Monitor, OptimizationResult, OptimizeError, Optimizer, Oracle,
    Session, Termination, TerminationReason,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordinateOrder {
    #[default]
    Cyclic,
    /// Uniform over features, drawn from the termination seed.
    Random,
}

impl fmt::Display for CoordinateOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoordinateOrder::Cyclic => "cyclic",
            CoordinateOrder::Random => "random",
        })
    }
}

impl FromStr for CoordinateOrder {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cyclic" => Ok(CoordinateOrder::Cyclic),
            "random" => Ok(CoordinateOrder::Random),
            other => Err(OptimizeError::InvalidConfig(alloc::format!(
                "unknown coordinate order `{other}` (expected cyclic or random)"
            ))),
        }
    }
}

/// Stochastic coordinate descent.
///
/// Each iteration picks one feature `j`, asks for its partial gradient and
/// moves only the coordinates in that sparse gradient:
/// `x ← x − η ∂_j f(x)`. The full objective is evaluated once per
/// `num_features` iterations (and after the last one) for the trace, the
/// best point and the objective tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scd {
    pub step_size: f64,
    pub order: CoordinateOrder,
    pub termination: Termination,
}

impl Scd {
    pub fn new(step_size: f64, order: CoordinateOrder) -> Self {
        Self { step_size, order, termination: Termination::default() }
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn minimize<F: PartiallyDifferentiable + Evaluable>(
        &self,
        function: &mut F,
        initial: &[f64],
    ) -> Result<OptimizationResult, OptimizeError> {
        self.optimize(function, initial)
    }
}

impl Optimizer for Scd {
    fn name(&self) -> &str {
        "SCD"
    }

    fn required_capabilities(&self) -> CapabilitySet {
        CapabilitySet::PARTIAL_GRADIENT | CapabilitySet::NUM_FEATURES | CapabilitySet::FULL_EVALUATE
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
        positive("step_size", self.step_size)?;
        let mut oracle = Oracle::new(function)?;
        let features = oracle.num_features()?;
        if features == 0 {
            return Err(OptimizeError::InvalidConfig("function reports zero features".into()));
        }
        let mut rng = crate::seeded_rng(term.seed);

        let mut x = initial.to_vec();
        let f0 = oracle.evaluate(&x)?;
        if !f0.is_finite() {
            return Err(OptimizeError::NonFiniteInitialObjective(f0));
        }
        let mut session = Session::new(monitor, &x, f0);
        session.record(0, oracle.evaluations, f0, f64::NAN);

        let mut previous = f0;
        let mut iterations = 0;
        let mut reason = TerminationReason::MaxIterations;
        for step in 1..=term.max_iterations {
            let j = match self.order {
                CoordinateOrder::Cyclic => ((step - 1) % features as u64) as usize,
                CoordinateOrder::Random => rng.random_range(0..features),
            };
            let g = oracle.partial_gradient(&x, j)?;
            if g.entries().iter().any(|(_, v)| !v.is_finite()) {
                reason = TerminationReason::Rejected;
                break;
            }
            for &(i, v) in g.entries() {
                x[i] -= self.step_size * v;
            }
            iterations = step;
            session.iterate(step, &x);
            if step % features as u64 == 0 || step == term.max_iterations {
                let f = oracle.evaluate(&x)?;
                if diverged(f) {
                    reason = TerminationReason::Rejected;
                    break;
                }
                session.record(step, oracle.evaluations, f, f64::NAN);
                session.consider(&x, f);
                let change = (previous - f).abs();
                previous = f;
                if change < term.objective_tolerance {
                    reason = TerminationReason::ObjectiveTolerance;
                    break;
                }
            }
        }
        session.finish(&mut oracle, x, iterations, reason)
    }
}

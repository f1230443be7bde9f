use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::function::{CapabilitySet, Evaluable, Function};
use crate::math;
use crate::optimizer::{
    diverged, positive, precheck, Monitor, OptimizationResult, OptimizeError, Optimizer, Oracle,
    Session, Termination, TerminationReason, Warning,
};

/// Temperature schedule of [`SimulatedAnnealing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule {
    pub initial_temperature: f64,
    /// Geometric cooling factor in `(0, 1)` applied after every block.
    pub cooling: f64,
    pub moves_per_temperature: u64,
    /// Standard deviation of the Gaussian proposal, per coordinate.
    pub move_scale: f64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self { initial_temperature: 10.0, cooling: 0.95, moves_per_temperature: 50, move_scale: 0.5 }
    }
}

/// Simulated annealing with Metropolis acceptance. Needs only `Evaluate()`.
///
/// One iteration is one temperature block of `moves_per_temperature`
/// proposals `x' = x + move_scale · u`, `u ~ N(0, I)`. A proposal is accepted
/// if it improves the objective, otherwise with probability
/// `exp(-(f(x') - f(x)) / T)`; proposals with a non-finite objective are
/// always rejected. After each block `T ← cooling · T`. The trace records the
/// current (last accepted) objective per block; the result is the best point
/// ever evaluated. Only `max_iterations` of the termination applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedAnnealing {
    pub schedule: AnnealingSchedule,
    pub termination: Termination,
}

impl SimulatedAnnealing {
    pub fn new(schedule: AnnealingSchedule) -> Self {
        Self { schedule, termination: Termination::default().with_max_iterations(200) }
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn minimize<F: Evaluable>(&self, function: &mut F, initial: &[f64]) -> Result<OptimizationResult, OptimizeError> {
        self.optimize(function, initial)
    }
}

impl Optimizer for SimulatedAnnealing {
    fn name(&self) -> &str {
        "SimulatedAnnealing"
    }

    fn required_capabilities(&self) -> CapabilitySet {
        CapabilitySet::FULL_EVALUATE
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
        let sched = &self.schedule;
        positive("initial_temperature", sched.initial_temperature)?;
        positive("move_scale", sched.move_scale)?;
        if !(sched.cooling > 0.0 && sched.cooling < 1.0) {
            return Err(OptimizeError::InvalidConfig("cooling must be in (0, 1)".into()));
        }
        if sched.moves_per_temperature == 0 {
            return Err(OptimizeError::InvalidConfig("moves_per_temperature must be at least 1".into()));
        }
        let mut oracle = Oracle::new(function)?;
        let mut rng = crate::seeded_rng(term.seed);

        let mut x = initial.to_vec();
        let mut fx = oracle.evaluate(&x)?;
        if !fx.is_finite() {
            return Err(OptimizeError::NonFiniteInitialObjective(fx));
        }
        let mut session = Session::new(monitor, &x, fx);
        session.record(0, oracle.evaluations, fx, f64::NAN);

        let mut temperature = sched.initial_temperature;
        let mut proposal: Vec<f64> = x.clone();
        let mut rejected_non_finite = 0u64;
        let mut reason = TerminationReason::MaxIterations;
        let mut iterations = 0;
        for block in 1..=term.max_iterations {
            for _ in 0..sched.moves_per_temperature {
                for (p, xi) in proposal.iter_mut().zip(&x) {
                    let u: f64 = rng.sample(StandardNormal);
                    *p = xi + sched.move_scale * u;
                }
                let fp = oracle.evaluate(&proposal)?;
                let draw: f64 = rng.random();
                if !fp.is_finite() {
                    rejected_non_finite += 1;
                    continue;
                }
                let accept = fp < fx || draw < math::exp(-(fp - fx) / temperature);
                if accept {
                    core::mem::swap(&mut x, &mut proposal);
                    fx = fp;
                    session.consider(&x, fx);
                }
            }
            temperature *= sched.cooling;
            iterations = block;
            session.iterate(block, &x);
            session.record(block, oracle.evaluations, fx, f64::NAN);
            if diverged(fx) {
                reason = TerminationReason::Rejected;
                break;
            }
        }
        if rejected_non_finite > 0 {
            session.warn(Warning::RejectedProposals { count: rejected_non_finite });
        }
        session.finish(&mut oracle, x, iterations, reason)
    }
}

use rand::RngCore;

use crate::function::{BatchRange, CapabilitySet, Function, SeparableDifferentiable};
use crate::optimizer::{
    diverged, positive, precheck, Monitor, OptimizationResult, OptimizeError, Optimizer, Oracle,
    Session, Termination, TerminationReason, Warning, WarmRestarts,
};
use crate::policy::{PolicyConfig, PolicyState, StepOutcome};

/// Mini-batch stochastic gradient descent with a pluggable update policy.
///
/// Each epoch shuffles the function (when it supports it), then visits
/// consecutive batches of `batch_size` components; the last batch of an
/// epoch holds whatever remains. A step feeds the batch gradient divided by
/// the actual batch size to the update policy.
///
/// One iteration is one step. The trace holds the initial point, the first
/// step, every epoch end and the last step, plus every `trace_every` steps
/// when set.
#[derive(Debug, Clone, PartialEq)]
pub struct Sgd {
    pub step_size: f64,
    pub batch_size: usize,
    pub policy: PolicyConfig,
    pub restarts: Option<WarmRestarts>,
    pub shuffle: bool,
    pub trace_every: Option<u64>,
    pub termination: Termination,
}

impl Sgd {
    pub fn new(step_size: f64, batch_size: usize) -> Self {
        Self {
            step_size,
            batch_size,
            policy: PolicyConfig::Vanilla,
            restarts: None,
            shuffle: true,
            trace_every: None,
            termination: Termination::default(),
        }
    }

    pub fn with_policy(mut self, policy: PolicyConfig) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_restarts(mut self, restarts: WarmRestarts) -> Self {
        self.restarts = Some(restarts);
        self
    }

    pub fn with_shuffle(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }

    pub fn with_trace_every(mut self, every: u64) -> Self {
        self.trace_every = (every > 0).then_some(every);
        self
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn minimize<F: SeparableDifferentiable>(
        &self,
        function: &mut F,
        initial: &[f64],
    ) -> Result<OptimizationResult, OptimizeError> {
        self.optimize(function, initial)
    }
}

impl Optimizer for Sgd {
    fn name(&self) -> &str {
        "SGD"
    }

    fn required_capabilities(&self) -> CapabilitySet {
        CapabilitySet::BATCH_EVALUATE | CapabilitySet::BATCH_GRADIENT | CapabilitySet::NUM_FUNCTIONS
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
        if self.batch_size == 0 {
            return Err(OptimizeError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if let Some(r) = &self.restarts {
            r.validate()?;
        }
        let mut policy = PolicyState::new(self.policy, initial.len())?;
        let mut oracle = Oracle::new(function)?;
        let n = oracle.num_functions()?;
        let batch = self.batch_size.min(n);
        let batches_per_epoch = n.div_ceil(batch);
        let mut rng = crate::seeded_rng(term.seed);

        let mut x = initial.to_vec();
        let f0 = oracle.evaluate(&x)?;
        if !f0.is_finite() {
            return Err(OptimizeError::NonFiniteInitialObjective(f0));
        }
        let mut session = Session::new(monitor, &x, f0);
        if batch < self.batch_size {
            session.warn(Warning::BatchSizeClamped { requested: self.batch_size, used: batch });
        }
        session.record(0, oracle.evaluations, f0, f64::NAN);

        let mut step: u64 = 0;
        let mut epoch: u64 = 0;
        let mut previous = f0;
        let mut scaled = alloc::vec![0.0; x.len()];
        let reason = 'run: loop {
            if step >= term.max_iterations {
                break TerminationReason::MaxIterations;
            }
            if self.shuffle {
                oracle.shuffle(rng.next_u64())?;
            }
            for b in 0..batches_per_epoch {
                if step >= term.max_iterations {
                    break 'run TerminationReason::MaxIterations;
                }
                let start = b * batch;
                let size = batch.min(n - start);
                let g = oracle.gradient_batch(&x, BatchRange::new(start, size))?;
                scaled.iter_mut().for_each(|v| *v = 0.0);
                g.add_scaled_to(&mut scaled, 1.0 / size as f64);
                let lr = match &self.restarts {
                    Some(r) => {
                        let progress = epoch as f64 + b as f64 / batches_per_epoch as f64;
                        r.step_size(self.step_size, progress)
                    }
                    None => self.step_size,
                };
                step += 1;
                // A fully annealed step size is a no-op, not an error.
                if lr > 0.0 && policy.apply(&mut x, lr, &scaled)? == StepOutcome::Rejected {
                    session.warn(Warning::RejectedGradient { iteration: step });
                }
                session.iterate(step, &x);
                let periodic = self.trace_every.is_some_and(|k| step.is_multiple_of(k));
                if (step == 1 || periodic) && b + 1 < batches_per_epoch {
                    let f = oracle.evaluate(&x)?;
                    if diverged(f) {
                        break 'run TerminationReason::Rejected;
                    }
                    session.record(step, oracle.evaluations, f, f64::NAN);
                    session.consider(&x, f);
                }
            }
            epoch += 1;
            let f = oracle.evaluate(&x)?;
            if diverged(f) {
                break TerminationReason::Rejected;
            }
            session.record(step, oracle.evaluations, f, f64::NAN);
            session.consider(&x, f);
            let change = (previous - f).abs();
            previous = f;
            if change < term.objective_tolerance {
                break TerminationReason::ObjectiveTolerance;
            }
        };
        if reason != TerminationReason::Rejected && session.last_recorded() != Some(step) {
            let f = oracle.evaluate(&x)?;
            if f.is_finite() {
                session.record(step, oracle.evaluations, f, f64::NAN);
                session.consider(&x, f);
            }
        }
        session.finish(&mut oracle, x, step, reason)
    }
}

/// SGD driven by a plain step counter, the way a minimal hand-written loop
/// would: for `i = 0, bs, 2bs, ...` below `total_steps`, shuffle whenever
/// `i mod N == 0`, then step on the batch starting at `i mod N` with the raw
/// batch gradient (`x ← x − η Σ_batch ∇f_i`). The result is the objective
/// after the last step.
///
/// `Sgd` is the general optimizer; this one exists to reproduce that loop
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularSgd {
    pub step_size: f64,
    pub batch_size: usize,
    pub total_steps: u64,
    pub seed: u64,
}

impl Default for ModularSgd {
    fn default() -> Self {
        Self { step_size: 0.02, batch_size: 1, total_steps: 5000, seed: 0 }
    }
}

impl ModularSgd {
    pub fn minimize<F: SeparableDifferentiable>(
        &self,
        function: &mut F,
        initial: &[f64],
    ) -> Result<OptimizationResult, OptimizeError> {
        self.optimize(function, initial)
    }
}

impl Optimizer for ModularSgd {
    fn name(&self) -> &str {
        "ModularSGD"
    }

    fn required_capabilities(&self) -> CapabilitySet {
        CapabilitySet::BATCH_EVALUATE | CapabilitySet::BATCH_GRADIENT | CapabilitySet::NUM_FUNCTIONS
    }

    fn optimize_monitored(
        &self,
        function: &mut dyn Function,
        initial: &[f64],
        monitor: &mut dyn Monitor,
    ) -> Result<OptimizationResult, OptimizeError> {
        precheck(self, function, initial)?;
        positive("step_size", self.step_size)?;
        if self.batch_size == 0 {
            return Err(OptimizeError::InvalidConfig("batch_size must be at least 1".into()));
        }
        let mut oracle = Oracle::new(function)?;
        let n = oracle.num_functions()?;
        let mut rng = crate::seeded_rng(self.seed);
        let mut x = initial.to_vec();
        let f0 = oracle.evaluate(&x)?;
        if !f0.is_finite() {
            return Err(OptimizeError::NonFiniteInitialObjective(f0));
        }
        let mut session = Session::new(monitor, &x, f0);
        session.record(0, oracle.evaluations, f0, f64::NAN);

        let mut steps = 0;
        let mut i: u64 = 0;
        while i < self.total_steps {
            let start = (i % n as u64) as usize;
            if start == 0 {
                oracle.shuffle(rng.next_u64())?;
            }
            let size = self.batch_size.min(n - start);
            let g = oracle.gradient_batch(&x, BatchRange::new(start, size))?;
            g.add_scaled_to(&mut x, -self.step_size);
            steps += 1;
            session.iterate(steps, &x);
            i += self.batch_size as u64;
        }
        let f = oracle.evaluate(&x)?;
        let reason = if diverged(f) { TerminationReason::Rejected } else { TerminationReason::MaxIterations };
        session.record(steps, oracle.evaluations, f, f64::NAN);
        // The loop reports its final point, not the best one seen.
        let mut result = session.finish(&mut oracle, x.clone(), steps, reason)?;
        result.best_params = x;
        result.best_objective = f;
        Ok(result)
    }
}

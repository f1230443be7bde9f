//! The optimizer contract and the optimizer catalog.
//!
//! Every optimizer implements [`Optimizer`]: it declares the capabilities it
//! needs, and its `optimize` method checks them against the function before
//! touching it, then minimizes from the given start and returns the best
//! point seen. Each optimizer also has a typed `minimize` entry point whose
//! trait bounds move the same check to compile time.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::function::{
    adapter, check_capabilities, BatchRange, CapabilityDiagnostic, CapabilitySet, Function,
    FunctionError, Gradient, SparseGradient,
};
use crate::policy::PolicyError;

mod annealing;
mod gradient_descent;
mod lbfgs;
mod restarts;
mod scd;
mod sgd;

pub use annealing::{AnnealingSchedule, SimulatedAnnealing};
pub use gradient_descent::GradientDescent;
pub use lbfgs::Lbfgs;
pub use restarts::WarmRestarts;
pub use scd::{CoordinateOrder, Scd};
pub use sgd::{ModularSgd, Sgd};

/// Objectives above this are treated as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e100;

pub(crate) fn diverged(objective: f64) -> bool {
    !objective.is_finite() || objective > DIVERGENCE_THRESHOLD
}

/// Stopping rules shared by all optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    /// Upper bound on iterations (the unit is optimizer-specific).
    pub max_iterations: u64,
    /// Stop when successive full objective evaluations differ by less.
    pub objective_tolerance: f64,
    /// Stop when the full-gradient norm drops below this (gradient methods).
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for Termination {
    fn default() -> Self {
        Self { max_iterations: 100_000, objective_tolerance: 1e-10, gradient_tolerance: 1e-9, seed: 0 }
    }
}

impl Termination {
    pub fn with_max_iterations(mut self, max_iterations: u64) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_objective_tolerance(mut self, tolerance: f64) -> Self {
        self.objective_tolerance = tolerance;
        self
    }

    pub fn with_gradient_tolerance(mut self, tolerance: f64) -> Self {
        self.gradient_tolerance = tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Only `max_iterations` is active.
    pub fn iterations_only(max_iterations: u64) -> Self {
        Self { max_iterations, objective_tolerance: 0.0, gradient_tolerance: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.max_iterations == 0 {
            return Err(OptimizeError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.objective_tolerance >= 0.0) {
            return Err(OptimizeError::InvalidConfig("objective_tolerance must be >= 0".into()));
        }
        if !(self.gradient_tolerance >= 0.0) {
            return Err(OptimizeError::InvalidConfig("gradient_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    MaxIterations,
    ObjectiveTolerance,
    GradientTolerance,
    StepTolerance,
    /// The objective became non-finite or exceeded [`DIVERGENCE_THRESHOLD`].
    Rejected,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::MaxIterations => "max_iterations",
            TerminationReason::ObjectiveTolerance => "objective_tolerance",
            TerminationReason::GradientTolerance => "gradient_tolerance",
            TerminationReason::StepTolerance => "step_tolerance",
            TerminationReason::Rejected => "rejected",
        }
    }
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: u64,
    /// Component evaluations so far, objective and gradient calls alike. A
    /// full evaluation of a function with `N` parts counts `N`, a batch counts
    /// its size, a partial gradient counts 1.
    pub evaluations: u64,
    pub objective: f64,
    /// `NaN` when the optimizer did not compute a full gradient here.
    pub gradient_norm: f64,
    pub elapsed_seconds: f64,
}

/// Non-fatal events recorded during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    BatchSizeClamped { requested: usize, used: usize },
    RejectedGradient { iteration: u64 },
    RejectedProposals { count: u64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::BatchSizeClamped { requested, used } => {
                write!(f, "batch size {requested} exceeds the number of functions; clamped to {used}")
            }
            Warning::RejectedGradient { iteration } => {
                write!(f, "non-finite gradient at iteration {iteration}; step rejected")
            }
            Warning::RejectedProposals { count } => {
                write!(f, "{count} proposals with non-finite objective rejected")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_params: Vec<f64>,
    /// `evaluate_full(best_params)`, recomputed after the run.
    pub best_objective: f64,
    pub final_params: Vec<f64>,
    pub iterations: u64,
    pub evaluations: u64,
    pub termination: TerminationReason,
    pub trace: Vec<TracePoint>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("{0}")]
    Capability(#[from] CapabilityDiagnostic),
    #[error("initial point has {actual} entries but the function has dimension {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("initial point contains non-finite entries")]
    NonFiniteInitialPoint,
    #[error("objective at the initial point is {0}")]
    NonFiniteInitialObjective(f64),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

/// Observes a run. Everything defaults to doing nothing.
pub trait Monitor {
    /// Called after every parameter update with the new parameters.
    fn on_iterate(&mut self, iteration: u64, params: &[f64]) {
        let _ = (iteration, params);
    }

    /// Wall time since the run started; `0.0` keeps traces reproducible.
    fn elapsed_seconds(&mut self) -> f64 {
        0.0
    }
}

/// A monitor that observes nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Silent;

impl Monitor for Silent {}

impl<F: FnMut(u64, &[f64])> Monitor for F {
    fn on_iterate(&mut self, iteration: u64, params: &[f64]) {
        self(iteration, params)
    }
}

/// The optimizer contract.
pub trait Optimizer {
    fn name(&self) -> &str;

    /// Capabilities a function must offer, directly or through an adapter.
    fn required_capabilities(&self) -> CapabilitySet;

    fn optimize_monitored(
        &self,
        function: &mut dyn Function,
        initial: &[f64],
        monitor: &mut dyn Monitor,
    ) -> Result<OptimizationResult, OptimizeError>;

    /// Minimizes `function` starting from `initial`.
    fn optimize(&self, function: &mut dyn Function, initial: &[f64]) -> Result<OptimizationResult, OptimizeError> {
        self.optimize_monitored(function, initial, &mut Silent)
    }

    /// The capability check `optimize` runs before any evaluation.
    fn check(&self, function: &dyn Function) -> Result<(), CapabilityDiagnostic> {
        check_capabilities(function.capabilities(), self.required_capabilities(), self.name(), function.name())
    }
}

/// Capability, dimension and finiteness checks shared by every optimizer.
pub(crate) fn precheck<O: Optimizer + ?Sized>(
    optimizer: &O,
    function: &dyn Function,
    initial: &[f64],
) -> Result<(), OptimizeError> {
    optimizer.check(function)?;
    if initial.len() != function.dimension() {
        return Err(OptimizeError::DimensionMismatch { expected: function.dimension(), actual: initial.len() });
    }
    if initial.iter().any(|x| !x.is_finite()) {
        return Err(OptimizeError::NonFiniteInitialPoint);
    }
    Ok(())
}

pub(crate) fn positive(name: &str, value: f64) -> Result<(), OptimizeError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(OptimizeError::InvalidConfig(alloc::format!("{name} must be positive and finite, got {value}")))
    }
}

/// Function access with evaluation counting, routing through adapters where
/// the function lacks a method directly.
pub(crate) struct Oracle<'f> {
    function: &'f mut dyn Function,
    components: usize,
    pub evaluations: u64,
}

impl<'f> Oracle<'f> {
    pub fn new(function: &'f mut dyn Function) -> Result<Self, FunctionError> {
        let components = adapter::component_count(&*function).unwrap_or(1);
        Ok(Self { function, components, evaluations: 0 })
    }

    pub fn num_functions(&self) -> Result<usize, FunctionError> {
        adapter::component_count(&*self.function)
    }

    pub fn num_features(&self) -> Result<usize, FunctionError> {
        self.function.num_features()
    }

    pub fn evaluate(&mut self, params: &[f64]) -> Result<f64, FunctionError> {
        self.evaluations += self.components as u64;
        adapter::evaluate_full(&*self.function, params)
    }

    pub fn gradient(&mut self, params: &[f64]) -> Result<Gradient, FunctionError> {
        self.evaluations += self.components as u64;
        adapter::gradient_full(&*self.function, params)
    }

    pub fn gradient_batch(&mut self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        self.evaluations += range.batch_size as u64;
        adapter::gradient_batch(&*self.function, params, range)
    }

    pub fn partial_gradient(&mut self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        self.evaluations += 1;
        self.function.partial_gradient(params, feature)
    }

    pub fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> {
        adapter::shuffle(&mut *self.function, seed)
    }
}

/// Trace, best-point and warning bookkeeping for one run.
pub(crate) struct Session<'m> {
    monitor: &'m mut dyn Monitor,
    trace: Vec<TracePoint>,
    best_params: Vec<f64>,
    best_objective: f64,
    warnings: Vec<Warning>,
}

impl<'m> Session<'m> {
    pub fn new(monitor: &'m mut dyn Monitor, initial: &[f64], initial_objective: f64) -> Self {
        Self {
            monitor,
            trace: Vec::new(),
            best_params: initial.to_vec(),
            best_objective: initial_objective,
            warnings: Vec::new(),
        }
    }

    pub fn iterate(&mut self, iteration: u64, params: &[f64]) {
        self.monitor.on_iterate(iteration, params);
    }

    /// Appends a trace row unless `iteration` was already recorded.
    pub fn record(&mut self, iteration: u64, evaluations: u64, objective: f64, gradient_norm: f64) {
        if self.trace.last().is_some_and(|p| p.iteration >= iteration) {
            return;
        }
        let elapsed_seconds = self.monitor.elapsed_seconds();
        self.trace.push(TracePoint { iteration, evaluations, objective, gradient_norm, elapsed_seconds });
    }

    pub fn last_recorded(&self) -> Option<u64> {
        self.trace.last().map(|p| p.iteration)
    }

    /// Keeps `params` if `objective` is finite and strictly better.
    pub fn consider(&mut self, params: &[f64], objective: f64) {
        if objective.is_finite() && objective < self.best_objective {
            self.best_objective = objective;
            self.best_params.clear();
            self.best_params.extend_from_slice(params);
        }
    }

    pub fn warn(&mut self, warning: Warning) {
        self.warnings.push(warning);
    }

    pub fn finish(
        self,
        oracle: &mut Oracle<'_>,
        final_params: Vec<f64>,
        iterations: u64,
        termination: TerminationReason,
    ) -> Result<OptimizationResult, OptimizeError> {
        let best_objective = oracle.evaluate(&self.best_params)?;
        Ok(OptimizationResult {
            best_params: self.best_params,
            best_objective,
            final_params,
            iterations,
            evaluations: oracle.evaluations,
            termination,
            trace: self.trace,
            warnings: self.warnings,
        })
    }
}

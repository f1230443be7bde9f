//! Name registries for problems and optimizers.

use std::fmt;
use std::str::FromStr;

use optframe_core::function::Function;
use optframe_core::optimizer::{
    AnnealingSchedule, GradientDescent, Lbfgs, ModularSgd, Scd, Sgd, SimulatedAnnealing, WarmRestarts,
};
use optframe_core::problems::{
    AbsoluteSum, FourQuadratics, LogisticRegression, ProblemError, Rosenbrock, SparseQuadratic, Sphere,
};
use optframe_core::{OptimizeError, Optimizer, Termination};

use crate::data::Dataset;
use crate::spec::{ExperimentSpec, SpecError};

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident, $error:ident { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn names() -> Vec<&'static str> {
                Self::ALL.iter().map(|k| k.name()).collect()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = SpecError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text $(| $alias)* => Ok($name::$variant),)+
                    other => Err(SpecError::$error { name: other.to_string(), known: Self::names() }),
                }
            }
        }
    };
}

named_enum!(
    /// Problems available from the command line.
    ProblemKind, UnknownProblem {
        FourQuadratics => "four_quadratics",
        Sphere => "sphere",
        Rosenbrock => "rosenbrock",
        SparseQuadratic => "sparse_quadratic",
        LogisticRegression => "logistic_regression" | "logistic",
        NogradientToy => "nogradient_toy",
    }
);

named_enum!(
    /// Optimizers available from the command line.
    OptimizerKind, UnknownOptimizer {
        GradientDescent => "gradient_descent" | "gd",
        Sgd => "sgd",
        ModularSgd => "modular_sgd",
        Scd => "scd",
        Lbfgs => "lbfgs" | "l-bfgs",
        SimulatedAnnealing => "simulated_annealing" | "sa",
    }
);

impl ProblemKind {
    pub fn fixed_dimension(self) -> Option<usize> {
        match self {
            ProblemKind::FourQuadratics => Some(4),
            ProblemKind::Rosenbrock => Some(2),
            _ => None,
        }
    }

    pub fn default_dimension(self) -> usize {
        match self {
            ProblemKind::FourQuadratics => 4,
            ProblemKind::SparseQuadratic => 8,
            _ => 2,
        }
    }
}

impl OptimizerKind {
    pub fn default_step_size(self) -> f64 {
        match self {
            OptimizerKind::ModularSgd => 0.02,
            _ => 0.01,
        }
    }

    pub fn default_iterations(self) -> u64 {
        match self {
            OptimizerKind::SimulatedAnnealing => 200,
            OptimizerKind::ModularSgd => 5000,
            _ => Termination::default().max_iterations,
        }
    }
}

/// Coefficients of the command-line sparse quadratic: `1, 1.5, 2, 2.5, 1, ...`.
pub fn sparse_quadratic_coefficients(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| 1.0 + 0.5 * (i % 4) as f64).collect()
}

/// Builds a fresh problem instance. Logistic regression uses `data` when
/// given, otherwise a synthetic dataset seeded by the base seed, so every
/// repetition sees the same data.
pub fn build_problem(spec: &ExperimentSpec, data: Option<&Dataset>) -> Result<Box<dyn Function + Send>, ProblemError> {
    Ok(match spec.problem {
        ProblemKind::FourQuadratics => Box::new(FourQuadratics::new()),
        ProblemKind::Sphere => Box::new(Sphere::new(spec.dim)?),
        ProblemKind::Rosenbrock => Box::new(Rosenbrock::new()),
        ProblemKind::SparseQuadratic => {
            Box::new(SparseQuadratic::new(sparse_quadratic_coefficients(spec.dim), spec.k)?)
        }
        ProblemKind::LogisticRegression => match data {
            Some(d) => Box::new(LogisticRegression::new(&d.rows, &d.labels)?),
            None => Box::new(LogisticRegression::synthetic(spec.rows, spec.features, spec.seed)?),
        },
        ProblemKind::NogradientToy => Box::new(AbsoluteSum::new(spec.dim)?),
    })
}

/// Builds the configured optimizer for one repetition.
pub fn build_optimizer(spec: &ExperimentSpec, seed: u64) -> Result<Box<dyn Optimizer + Send + Sync>, OptimizeError> {
    let termination = Termination {
        max_iterations: spec.iters,
        objective_tolerance: spec.objective_tolerance,
        gradient_tolerance: spec.gradient_tolerance,
        seed,
    };
    Ok(match spec.optimizer {
        OptimizerKind::GradientDescent => Box::new(GradientDescent::new(spec.lr).with_termination(termination)),
        OptimizerKind::Sgd => {
            let mut sgd = Sgd::new(spec.lr, spec.batch)
                .with_policy(spec.policy.default_config())
                .with_trace_every(spec.trace_every)
                .with_termination(termination);
            if spec.restart_period > 0.0 {
                sgd = sgd.with_restarts(WarmRestarts::new(spec.restart_period, spec.restart_mult)?);
            }
            Box::new(sgd)
        }
        OptimizerKind::ModularSgd => Box::new(ModularSgd {
            step_size: spec.lr,
            batch_size: spec.batch,
            total_steps: spec.iters,
            seed,
        }),
        OptimizerKind::Scd => Box::new(Scd::new(spec.lr, spec.order).with_termination(termination)),
        OptimizerKind::Lbfgs => Box::new(Lbfgs::new(spec.memory).with_termination(termination)),
        OptimizerKind::SimulatedAnnealing => Box::new(
            SimulatedAnnealing::new(AnnealingSchedule {
                initial_temperature: spec.temperature,
                cooling: spec.cooling,
                moves_per_temperature: spec.moves,
                move_scale: spec.move_scale,
            })
            .with_termination(termination),
        ),
    })
}

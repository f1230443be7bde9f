//! Capability-based numerical optimization.
//!
//! Objective functions implement the [`Function`](function::Function)
//! contract and publish which of its methods they provide as a
//! [`CapabilitySet`](function::CapabilitySet). Optimizers implement
//! [`Optimizer`](optimizer::Optimizer) and declare the capabilities they
//! need; a mismatch is reported before any evaluation, and at compile time
//! through the typed `minimize` entry points.
//!
//! The crate is `no_std` and needs only `alloc`. Wall-clock timing, file
//! formats and the command-line harness live in the companion `optframe`
//! crate.
//!
//! ```
//! use optframe_core::optimizer::{Optimizer, Sgd, Termination};
//! use optframe_core::problems::FourQuadratics;
//!
//! let mut f = FourQuadratics::new();
//! let sgd = Sgd::new(0.02, 1).with_termination(Termination::default().with_max_iterations(5000));
//! let result = sgd.optimize(&mut f, &[0.0; 4]).unwrap();
//! assert!((result.best_objective - 123.75).abs() < 1e-6);
//! ```

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod math;

pub mod function;
pub mod optimizer;
pub mod policy;
pub mod problems;
pub mod validation;

pub use function::{BatchRange, CapabilitySet, Function, FunctionError, Gradient, SparseGradient};
pub use optimizer::{OptimizationResult, OptimizeError, Optimizer, Termination, TerminationReason};

/// The deterministic generator used for every seeded draw in the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// A [`SeededRng`] expanded from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}

//! Capability flags, adapter closure and requirement checking.
//!
//! Every objective function publishes the contract methods it implements as a
//! [`CapabilitySet`]. Every optimizer publishes the set it requires. The
//! requirement is satisfied when each required flag is either present or
//! reachable through one of the two adapters:
//!
//! * separable to full: `evaluate_batch` + `num_functions` give `evaluate`;
//!   adding `gradient_batch` also gives `gradient`.
//! * full to separable: `evaluate` gives `evaluate_batch`, `num_functions`
//!   (one part) and a no-op `shuffle`; `gradient` gives `gradient_batch`.
//!
//! The same check exists at compile time through the marker traits at the
//! bottom of this module.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use bitflags::bitflags;

use crate::function::Function;

bitflags! {
    /// The contract methods an objective function provides.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
    pub struct CapabilitySet: u16 {
        const FULL_EVALUATE = 1 << 0;
        const BATCH_EVALUATE = 1 << 1;
        const FULL_GRADIENT = 1 << 2;
        const BATCH_GRADIENT = 1 << 3;
        const PARTIAL_GRADIENT = 1 << 4;
        const NUM_FUNCTIONS = 1 << 5;
        const NUM_FEATURES = 1 << 6;
        const SHUFFLE = 1 << 7;
        const SPARSE_GRADIENT = 1 << 8;
    }
}

impl CapabilitySet {
    /// Full-interface differentiable problem.
    pub const DIFFERENTIABLE: Self = Self::FULL_EVALUATE.union(Self::FULL_GRADIENT);

    /// Separable differentiable problem with a shuffle.
    pub const SEPARABLE_DIFFERENTIABLE: Self = Self::BATCH_EVALUATE
        .union(Self::BATCH_GRADIENT)
        .union(Self::NUM_FUNCTIONS)
        .union(Self::SHUFFLE);

    /// Checks the structural invariants a published set must obey.
    pub fn violated_invariant(self) -> Option<&'static str> {
        if self.contains(Self::BATCH_EVALUATE) && !self.contains(Self::NUM_FUNCTIONS) {
            return Some("batch evaluate requires num_functions");
        }
        if self.contains(Self::BATCH_GRADIENT) && !self.contains(Self::BATCH_EVALUATE) {
            return Some("batch gradient requires batch evaluate");
        }
        if self.contains(Self::PARTIAL_GRADIENT) && !self.contains(Self::NUM_FEATURES) {
            return Some("partial gradient requires num_features");
        }
        None
    }

    /// Every flag reachable from `self` through the adapters, applied to a
    /// fixed point.
    pub fn adapter_closure(self) -> Self {
        let mut caps = self;
        loop {
            let mut next = caps;
            if caps.contains(Self::BATCH_EVALUATE | Self::NUM_FUNCTIONS) {
                next |= Self::FULL_EVALUATE;
                if caps.contains(Self::BATCH_GRADIENT) {
                    next |= Self::FULL_GRADIENT;
                }
            }
            if caps.contains(Self::FULL_EVALUATE) {
                next |= Self::BATCH_EVALUATE | Self::NUM_FUNCTIONS | Self::SHUFFLE;
                if caps.contains(Self::FULL_GRADIENT) {
                    next |= Self::BATCH_GRADIENT;
                }
            }
            if next == caps {
                return caps;
            }
            caps = next;
        }
    }

    /// Contract methods corresponding to the set flags, in flag order.
    pub fn methods(self) -> Vec<Method> {
        Method::ALL
            .iter()
            .copied()
            .filter(|m| self.contains(m.flag()))
            .collect()
    }
}

/// One method of the objective-function contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Evaluate,
    EvaluateBatch,
    Gradient,
    GradientBatch,
    PartialGradient,
    NumFunctions,
    NumFeatures,
    Shuffle,
    SparseGradient,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Evaluate,
        Method::EvaluateBatch,
        Method::Gradient,
        Method::GradientBatch,
        Method::PartialGradient,
        Method::NumFunctions,
        Method::NumFeatures,
        Method::Shuffle,
        Method::SparseGradient,
    ];

    pub fn flag(self) -> CapabilitySet {
        match self {
            Method::Evaluate => CapabilitySet::FULL_EVALUATE,
            Method::EvaluateBatch => CapabilitySet::BATCH_EVALUATE,
            Method::Gradient => CapabilitySet::FULL_GRADIENT,
            Method::GradientBatch => CapabilitySet::BATCH_GRADIENT,
            Method::PartialGradient => CapabilitySet::PARTIAL_GRADIENT,
            Method::NumFunctions => CapabilitySet::NUM_FUNCTIONS,
            Method::NumFeatures => CapabilitySet::NUM_FEATURES,
            Method::Shuffle => CapabilitySet::SHUFFLE,
            Method::SparseGradient => CapabilitySet::SPARSE_GRADIENT,
        }
    }

    /// Contract name of the method as users refer to it.
    pub fn contract_name(self) -> &'static str {
        match self {
            Method::Evaluate | Method::EvaluateBatch => "Evaluate",
            Method::Gradient | Method::GradientBatch | Method::SparseGradient => "Gradient",
            Method::PartialGradient => "PartialGradient",
            Method::NumFunctions => "NumFunctions",
            Method::NumFeatures => "NumFeatures",
            Method::Shuffle => "Shuffle",
        }
    }

    /// The Rust signature the method must have on [`Function`].
    pub fn signature(self) -> &'static str {
        match self {
            Method::Evaluate => "fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError>",
            Method::EvaluateBatch => {
                "fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError>"
            }
            Method::Gradient => {
                "fn gradient(&self, params: &[f64]) -> Result<Gradient, FunctionError>"
            }
            Method::GradientBatch => {
                "fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError>"
            }
            Method::PartialGradient => {
                "fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError>"
            }
            Method::NumFunctions => "fn num_functions(&self) -> Result<usize, FunctionError>",
            Method::NumFeatures => "fn num_features(&self) -> Result<usize, FunctionError>",
            Method::Shuffle => "fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError>",
            Method::SparseGradient => {
                "fn gradient_batch(..) returning Gradient::Sparse (advertise CapabilitySet::SPARSE_GRADIENT)"
            }
        }
    }

    /// Human-readable description of the overload.
    pub fn describe(self) -> &'static str {
        match self {
            Method::Evaluate => "Evaluate() over the whole objective",
            Method::EvaluateBatch => "Evaluate() over a batch of separable components",
            Method::Gradient => "Gradient() over the whole objective",
            Method::GradientBatch => "Gradient() over a batch of separable components",
            Method::PartialGradient => "PartialGradient() with respect to one feature",
            Method::NumFunctions => "NumFunctions() reporting the number of separable components",
            Method::NumFeatures => "NumFeatures() reporting the number of partial derivatives",
            Method::Shuffle => "Shuffle() reordering the separable components",
            Method::SparseGradient => "a sparse Gradient() representation",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}()", self.contract_name())
    }
}

/// Why a function cannot be used with an optimizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilityDiagnostic {
    pub optimizer: String,
    pub function: String,
    pub missing: Vec<Method>,
}

impl fmt::Display for CapabilityDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.missing.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "{}: the function type `{}` does not have a correct definition of a {}() function \
                 (needs {}; expected `{}`)",
                self.optimizer,
                self.function,
                m.contract_name(),
                m.describe(),
                m.signature()
            )?;
        }
        Ok(())
    }
}

impl core::error::Error for CapabilityDiagnostic {}

/// Checks that `available` covers `required`, allowing adapter paths.
///
/// `optimizer` and `function` only label the diagnostic.
pub fn check_capabilities(
    available: CapabilitySet,
    required: CapabilitySet,
    optimizer: &str,
    function: &str,
) -> Result<(), CapabilityDiagnostic> {
    let missing = required - available.adapter_closure();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CapabilityDiagnostic {
            optimizer: optimizer.into(),
            function: function.into(),
            missing: missing.methods(),
        })
    }
}

// Compile-time layer. A type implements a marker when the corresponding
// requirement is satisfied directly or through an adapter, mirroring
// `adapter_closure`. Optimizers' typed entry points are bounded on these.

/// Provides `Evaluate()` over the whole objective (directly or via batches).
#[diagnostic::on_unimplemented(
    message = "the function type `{Self}` does not have a correct definition of an Evaluate() function",
    label = "Evaluate() is required here",
    note = "implement `Function::evaluate` (or `evaluate_batch` and `num_functions`) and add `impl Evaluable for {Self} {{}}`"
)]
pub trait Evaluable: Function {}

/// Provides `Gradient()` over the whole objective (directly or via batches).
#[diagnostic::on_unimplemented(
    message = "the function type `{Self}` does not have a correct definition of a Gradient() function",
    label = "Gradient() is required here",
    note = "implement `Function::gradient` (or `gradient_batch` and `num_functions`) and add `impl Differentiable for {Self} {{}}`"
)]
pub trait Differentiable: Evaluable {}

/// Provides the separable `Evaluate()` overload and `NumFunctions()`.
#[diagnostic::on_unimplemented(
    message = "the function type `{Self}` does not have a correct definition of a separable Evaluate() function",
    label = "separable Evaluate() and NumFunctions() are required here",
    note = "implement `Function::evaluate_batch` and `Function::num_functions` and add `impl Separable for {Self} {{}}`"
)]
pub trait Separable: Function {}

/// Provides the separable `Gradient()` overload.
#[diagnostic::on_unimplemented(
    message = "the function type `{Self}` does not have a correct definition of a separable Gradient() function",
    label = "separable Gradient() is required here",
    note = "implement `Function::gradient_batch` and add `impl SeparableDifferentiable for {Self} {{}}`"
)]
pub trait SeparableDifferentiable: Separable {}

/// Provides `PartialGradient()` and `NumFeatures()`.
#[diagnostic::on_unimplemented(
    message = "the function type `{Self}` does not have a correct definition of a PartialGradient() function",
    label = "PartialGradient() and NumFeatures() are required here",
    note = "implement `Function::partial_gradient` and `Function::num_features` and add `impl PartiallyDifferentiable for {Self} {{}}`"
)]
pub trait PartiallyDifferentiable: Function {}

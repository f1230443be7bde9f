//! The objective-function contract.
//!
//! An objective implements [`Function`]: two metadata methods
//! ([`dimension`](Function::dimension) and
//! [`capabilities`](Function::capabilities)) plus whichever contract methods it
//! actually supports. Unsupported methods keep their default body, which
//! returns [`FunctionError::Unsupported`]. The published [`CapabilitySet`] must
//! match exactly what is overridden.
//!
//! Separable objectives `f(x) = Σ f_i(x)` expose the batch overloads over a
//! [`BatchRange`] of components. The batch gradient is the *sum* of component
//! gradients over the range, matching the batch objective; averaging is left
//! to the optimizer.

use alloc::boxed::Box;
use core::fmt;

use thiserror::Error;

pub mod adapter;
pub mod capability;
pub mod gradient;

pub use adapter::{FullAsSeparable, SeparableAsFull};
pub use capability::{
    check_capabilities, CapabilityDiagnostic, CapabilitySet, Differentiable, Evaluable, Method,
    PartiallyDifferentiable, Separable, SeparableDifferentiable,
};
pub use gradient::{Gradient, SparseGradient};

/// Contract violations raised by objective functions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionError {
    #[error("dimension mismatch: expected {expected} parameters, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("batch range (start={start}, batch_size={batch_size}) is out of bounds for {num_functions} separable functions")]
    RangeOutOfBounds { start: usize, batch_size: usize, num_functions: usize },
    #[error("feature {feature} is out of range for {num_features} features")]
    FeatureOutOfRange { feature: usize, num_features: usize },
    #[error("sparse index {index} is not strictly increasing or lies outside [0, {dim})")]
    InvalidSparseIndex { index: usize, dim: usize },
    #[error("{0} is not provided by this function")]
    Unsupported(Method),
}

/// A window `[start, start + batch_size)` of separable components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BatchRange {
    pub start: usize,
    pub batch_size: usize,
}

impl BatchRange {
    pub const fn new(start: usize, batch_size: usize) -> Self {
        Self { start, batch_size }
    }

    /// The range covering all `n` components.
    pub const fn full(n: usize) -> Self {
        Self { start: 0, batch_size: n }
    }

    pub fn end(&self) -> usize {
        self.start + self.batch_size
    }

    /// Checks `batch_size ≥ 1` and `start + batch_size ≤ num_functions`.
    pub fn validate(self, num_functions: usize) -> Result<Self, FunctionError> {
        let ok = self.batch_size >= 1
            && self.start < num_functions
            && self.start.checked_add(self.batch_size).is_some_and(|e| e <= num_functions);
        if ok {
            Ok(self)
        } else {
            Err(FunctionError::RangeOutOfBounds {
                start: self.start,
                batch_size: self.batch_size,
                num_functions,
            })
        }
    }

    pub fn iter(&self) -> core::ops::Range<usize> {
        self.start..self.end()
    }
}

impl fmt::Display for BatchRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.start, self.batch_size)
    }
}

/// Fails unless `params.len() == expected`.
pub fn check_dimension(params: &[f64], expected: usize) -> Result<(), FunctionError> {
    if params.len() == expected {
        Ok(())
    } else {
        Err(FunctionError::DimensionMismatch { expected, actual: params.len() })
    }
}

/// An objective function to be minimized.
pub trait Function {
    /// Length of the parameter vector.
    fn dimension(&self) -> usize;

    /// The contract methods this function overrides.
    fn capabilities(&self) -> CapabilitySet;

    /// Name used in diagnostics.
    fn name(&self) -> &str {
        "<anonymous function>"
    }

    /// `f(params)`.
    fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError> {
        let _ = params;
        Err(FunctionError::Unsupported(Method::Evaluate))
    }

    /// Sum of the components in `range`, in the current shuffle order.
    fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError> {
        let _ = (params, range);
        Err(FunctionError::Unsupported(Method::EvaluateBatch))
    }

    /// `∇f(params)`.
    fn gradient(&self, params: &[f64]) -> Result<Gradient, FunctionError> {
        let _ = params;
        Err(FunctionError::Unsupported(Method::Gradient))
    }

    /// Sum of the component gradients in `range`, in the current shuffle order.
    fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        let _ = (params, range);
        Err(FunctionError::Unsupported(Method::GradientBatch))
    }

    /// Gradient contribution of feature `feature`. Summing the densified
    /// partial gradients over all features gives the full gradient.
    fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        let _ = (params, feature);
        Err(FunctionError::Unsupported(Method::PartialGradient))
    }

    fn num_functions(&self) -> Result<usize, FunctionError> {
        Err(FunctionError::Unsupported(Method::NumFunctions))
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        Err(FunctionError::Unsupported(Method::NumFeatures))
    }

    /// Redraws the component order as a uniform permutation from `seed`.
    fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> {
        let _ = seed;
        Err(FunctionError::Unsupported(Method::Shuffle))
    }
}

macro_rules! forward_function {
    ($($ty:ty),*) => {$(
        impl<F: Function + ?Sized> Function for $ty {
            fn dimension(&self) -> usize { (**self).dimension() }
            fn capabilities(&self) -> CapabilitySet { (**self).capabilities() }
            fn name(&self) -> &str { (**self).name() }
            fn evaluate(&self, p: &[f64]) -> Result<f64, FunctionError> { (**self).evaluate(p) }
            fn evaluate_batch(&self, p: &[f64], r: BatchRange) -> Result<f64, FunctionError> {
                (**self).evaluate_batch(p, r)
            }
            fn gradient(&self, p: &[f64]) -> Result<Gradient, FunctionError> { (**self).gradient(p) }
            fn gradient_batch(&self, p: &[f64], r: BatchRange) -> Result<Gradient, FunctionError> {
                (**self).gradient_batch(p, r)
            }
            fn partial_gradient(&self, p: &[f64], j: usize) -> Result<SparseGradient, FunctionError> {
                (**self).partial_gradient(p, j)
            }
            fn num_functions(&self) -> Result<usize, FunctionError> { (**self).num_functions() }
            fn num_features(&self) -> Result<usize, FunctionError> { (**self).num_features() }
            fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> { (**self).shuffle(seed) }
        }
    )*};
}

forward_function!(&mut F, Box<F>);

macro_rules! forward_markers {
    ($($ty:ty),*) => {$(
        impl<F: Evaluable + ?Sized> Evaluable for $ty {}
        impl<F: Differentiable + ?Sized> Differentiable for $ty {}
        impl<F: Separable + ?Sized> Separable for $ty {}
        impl<F: SeparableDifferentiable + ?Sized> SeparableDifferentiable for $ty {}
        impl<F: PartiallyDifferentiable + ?Sized> PartiallyDifferentiable for $ty {}
    )*};
}

forward_markers!(&mut F, Box<F>);

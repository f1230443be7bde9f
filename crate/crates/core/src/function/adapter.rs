//! Adapters between the separable and full forms of the contract, plus the
//! routing helpers optimizers use to reach a method through an adapter path.

use crate::function::{
    BatchRange, CapabilityDiagnostic, CapabilitySet, Differentiable, Evaluable, Function,
    FunctionError, Gradient, Method, PartiallyDifferentiable, Separable, SeparableDifferentiable,
    SparseGradient,
};

fn require<F: Function + ?Sized>(
    f: &F,
    required: CapabilitySet,
    adapter: &str,
) -> Result<(), CapabilityDiagnostic> {
    crate::function::check_capabilities(f.capabilities(), required, adapter, f.name())
}

/// Number of separable components, treating a full-only function as one part.
pub fn component_count<F: Function + ?Sized>(f: &F) -> Result<usize, FunctionError> {
    let caps = f.capabilities();
    if caps.contains(CapabilitySet::NUM_FUNCTIONS) {
        f.num_functions()
    } else if caps.contains(CapabilitySet::FULL_EVALUATE) {
        Ok(1)
    } else {
        Err(FunctionError::Unsupported(Method::NumFunctions))
    }
}

/// Full objective, directly or as the sum over all components.
pub fn evaluate_full<F: Function + ?Sized>(f: &F, params: &[f64]) -> Result<f64, FunctionError> {
    let caps = f.capabilities();
    if caps.contains(CapabilitySet::FULL_EVALUATE) {
        f.evaluate(params)
    } else if caps.contains(CapabilitySet::BATCH_EVALUATE | CapabilitySet::NUM_FUNCTIONS) {
        f.evaluate_batch(params, BatchRange::full(f.num_functions()?))
    } else {
        Err(FunctionError::Unsupported(Method::Evaluate))
    }
}

/// Full gradient, directly or as the batch gradient over all components.
pub fn gradient_full<F: Function + ?Sized>(f: &F, params: &[f64]) -> Result<Gradient, FunctionError> {
    let caps = f.capabilities();
    if caps.contains(CapabilitySet::FULL_GRADIENT) {
        f.gradient(params)
    } else if caps.contains(CapabilitySet::BATCH_GRADIENT | CapabilitySet::NUM_FUNCTIONS) {
        f.gradient_batch(params, BatchRange::full(f.num_functions()?))
    } else {
        Err(FunctionError::Unsupported(Method::Gradient))
    }
}

/// Batch objective, directly or from the full objective viewed as one part.
pub fn evaluate_batch<F: Function + ?Sized>(
    f: &F,
    params: &[f64],
    range: BatchRange,
) -> Result<f64, FunctionError> {
    if f.capabilities().contains(CapabilitySet::BATCH_EVALUATE) {
        f.evaluate_batch(params, range)
    } else {
        range.validate(1)?;
        evaluate_full(f, params)
    }
}

/// Batch gradient, directly or from the full gradient viewed as one part.
pub fn gradient_batch<F: Function + ?Sized>(
    f: &F,
    params: &[f64],
    range: BatchRange,
) -> Result<Gradient, FunctionError> {
    if f.capabilities().contains(CapabilitySet::BATCH_GRADIENT) {
        f.gradient_batch(params, range)
    } else {
        range.validate(1)?;
        gradient_full(f, params)
    }
}

/// Shuffles when supported; a function viewed as a single part has nothing
/// to reorder.
pub fn shuffle<F: Function + ?Sized>(f: &mut F, seed: u64) -> Result<(), FunctionError> {
    if f.capabilities().contains(CapabilitySet::SHUFFLE) {
        f.shuffle(seed)
    } else {
        Ok(())
    }
}

/// Exposes a separable function through the full interface: `evaluate` is
/// `evaluate_batch` over `(0, N)` and `gradient` is `gradient_batch` over
/// `(0, N)`. Every other method is forwarded.
#[derive(Debug, Clone)]
pub struct SeparableAsFull<F> {
    inner: F,
}

impl<F: Function> SeparableAsFull<F> {
    pub fn new(inner: F) -> Result<Self, CapabilityDiagnostic> {
        require(
            &inner,
            CapabilitySet::BATCH_EVALUATE | CapabilitySet::NUM_FUNCTIONS,
            "separable-to-full adapter",
        )?;
        Ok(Self { inner })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut F {
        &mut self.inner
    }

    pub fn into_inner(self) -> F {
        self.inner
    }

    fn all(&self) -> Result<BatchRange, FunctionError> {
        Ok(BatchRange::full(component_count(&self.inner)?))
    }
}

/// Wraps a separable function so it can be used where a full-interface
/// function is expected.
pub fn adapt_separable_to_full<F: Function>(f: F) -> Result<SeparableAsFull<F>, CapabilityDiagnostic> {
    SeparableAsFull::new(f)
}

impl<F: Function> Function for SeparableAsFull<F> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn capabilities(&self) -> CapabilitySet {
        let inner = self.inner.capabilities();
        let reachable = inner.adapter_closure();
        let mut caps = inner | CapabilitySet::FULL_EVALUATE;
        if reachable.contains(CapabilitySet::FULL_GRADIENT) {
            caps |= CapabilitySet::FULL_GRADIENT;
        }
        caps
    }

    fn name(&self) -> &str {
        self.inner.name()
    }

    fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError> {
        if self.inner.capabilities().contains(CapabilitySet::BATCH_EVALUATE) {
            self.inner.evaluate_batch(params, self.all()?)
        } else {
            evaluate_full(&self.inner, params)
        }
    }

    fn gradient(&self, params: &[f64]) -> Result<Gradient, FunctionError> {
        if self.inner.capabilities().contains(CapabilitySet::BATCH_GRADIENT) {
            self.inner.gradient_batch(params, self.all()?)
        } else {
            gradient_full(&self.inner, params)
        }
    }

    fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError> {
        self.inner.evaluate_batch(params, range)
    }

    fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        self.inner.gradient_batch(params, range)
    }

    fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        self.inner.partial_gradient(params, feature)
    }

    fn num_functions(&self) -> Result<usize, FunctionError> {
        self.inner.num_functions()
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        self.inner.num_features()
    }

    fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> {
        self.inner.shuffle(seed)
    }
}

impl<F: Separable> Evaluable for SeparableAsFull<F> {}
impl<F: SeparableDifferentiable> Differentiable for SeparableAsFull<F> {}
impl<F: Separable> Separable for SeparableAsFull<F> {}
impl<F: SeparableDifferentiable> SeparableDifferentiable for SeparableAsFull<F> {}
impl<F: PartiallyDifferentiable + Separable> PartiallyDifferentiable for SeparableAsFull<F> {}

/// Exposes a full-interface function as a separable function with a single
/// component. Only the range `(0, 1)` is valid; `shuffle` does nothing.
#[derive(Debug, Clone)]
pub struct FullAsSeparable<F> {
    inner: F,
}

impl<F: Function> FullAsSeparable<F> {
    pub fn new(inner: F) -> Result<Self, CapabilityDiagnostic> {
        require(&inner, CapabilitySet::FULL_EVALUATE, "full-to-separable adapter")?;
        Ok(Self { inner })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn into_inner(self) -> F {
        self.inner
    }
}

/// Wraps a full-interface function so it can be used where a separable
/// function is expected.
pub fn adapt_full_to_separable<F: Function>(f: F) -> Result<FullAsSeparable<F>, CapabilityDiagnostic> {
    FullAsSeparable::new(f)
}

impl<F: Function> Function for FullAsSeparable<F> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn capabilities(&self) -> CapabilitySet {
        let inner = self.inner.capabilities().adapter_closure();
        let mut caps = (inner
            & (CapabilitySet::FULL_EVALUATE
                | CapabilitySet::FULL_GRADIENT
                | CapabilitySet::PARTIAL_GRADIENT
                | CapabilitySet::NUM_FEATURES
                | CapabilitySet::SPARSE_GRADIENT))
            | CapabilitySet::BATCH_EVALUATE
            | CapabilitySet::NUM_FUNCTIONS
            | CapabilitySet::SHUFFLE;
        if inner.contains(CapabilitySet::FULL_GRADIENT) {
            caps |= CapabilitySet::BATCH_GRADIENT;
        }
        caps
    }

    fn name(&self) -> &str {
        self.inner.name()
    }

    fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError> {
        evaluate_full(&self.inner, params)
    }

    fn gradient(&self, params: &[f64]) -> Result<Gradient, FunctionError> {
        gradient_full(&self.inner, params)
    }

    fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError> {
        range.validate(1)?;
        evaluate_full(&self.inner, params)
    }

    fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        range.validate(1)?;
        gradient_full(&self.inner, params)
    }

    fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        self.inner.partial_gradient(params, feature)
    }

    fn num_functions(&self) -> Result<usize, FunctionError> {
        Ok(1)
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        self.inner.num_features()
    }

    fn shuffle(&mut self, _seed: u64) -> Result<(), FunctionError> {
        Ok(())
    }
}

impl<F: Evaluable> Evaluable for FullAsSeparable<F> {}
impl<F: Differentiable> Differentiable for FullAsSeparable<F> {}
impl<F: Evaluable> Separable for FullAsSeparable<F> {}
impl<F: Differentiable> SeparableDifferentiable for FullAsSeparable<F> {}
impl<F: PartiallyDifferentiable> PartiallyDifferentiable for FullAsSeparable<F> {}

use alloc::vec::Vec;

use crate::function::{
    check_dimension, CapabilitySet, Differentiable, Evaluable, Function, FunctionError, Gradient,
    PartiallyDifferentiable, SparseGradient,
};
use crate::problems::ProblemError;

/// `f(x) = Σ x_i²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sphere {
    dim: usize,
}

impl Sphere {
    pub fn new(dim: usize) -> Result<Self, ProblemError> {
        if dim == 0 {
            return Err(ProblemError::ZeroDimension);
        }
        Ok(Self { dim })
    }
}

impl Function for Sphere {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::DIFFERENTIABLE | CapabilitySet::PARTIAL_GRADIENT | CapabilitySet::NUM_FEATURES
    }

    fn name(&self) -> &str {
        "sphere"
    }

    fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError> {
        check_dimension(params, self.dim)?;
        Ok(params.iter().map(|x| x * x).sum())
    }

    fn gradient(&self, params: &[f64]) -> Result<Gradient, FunctionError> {
        check_dimension(params, self.dim)?;
        Ok(Gradient::Dense(params.iter().map(|x| 2.0 * x).collect::<Vec<_>>()))
    }

    fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        check_dimension(params, self.dim)?;
        if feature >= self.dim {
            return Err(FunctionError::FeatureOutOfRange { feature, num_features: self.dim });
        }
        SparseGradient::single(self.dim, feature, 2.0 * params[feature])
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        Ok(self.dim)
    }
}

impl Evaluable for Sphere {}
impl Differentiable for Sphere {}
impl PartiallyDifferentiable for Sphere {}

use alloc::vec;

use crate::function::{
    check_dimension, CapabilitySet, Differentiable, Evaluable, Function, FunctionError, Gradient,
};

/// Two-dimensional Rosenbrock function `(1 - x)² + 100 (y - x²)²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rosenbrock;

impl Rosenbrock {
    pub fn new() -> Self {
        Self
    }
}

impl Function for Rosenbrock {
    fn dimension(&self) -> usize {
        2
    }

    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::DIFFERENTIABLE
    }

    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError> {
        check_dimension(params, 2)?;
        let (x, y) = (params[0], params[1]);
        let a = 1.0 - x;
        let b = y - x * x;
        Ok(a * a + 100.0 * b * b)
    }

    fn gradient(&self, params: &[f64]) -> Result<Gradient, FunctionError> {
        check_dimension(params, 2)?;
        let (x, y) = (params[0], params[1]);
        let b = y - x * x;
        Ok(Gradient::Dense(vec![-2.0 * (1.0 - x) - 400.0 * x * b, 200.0 * b]))
    }
}

impl Evaluable for Rosenbrock {}
impl Differentiable for Rosenbrock {}

use crate::function::{check_dimension, CapabilitySet, Evaluable, Function, FunctionError};
use crate::problems::ProblemError;

/// `f(x) = Σ |x_i|`: an evaluate-only function with no gradient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsoluteSum {
    dim: usize,
}

impl AbsoluteSum {
    pub fn new(dim: usize) -> Result<Self, ProblemError> {
        if dim == 0 {
            return Err(ProblemError::ZeroDimension);
        }
        Ok(Self { dim })
    }
}

impl Function for AbsoluteSum {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::FULL_EVALUATE
    }

    fn name(&self) -> &str {
        "nogradient_toy"
    }

    fn evaluate(&self, params: &[f64]) -> Result<f64, FunctionError> {
        check_dimension(params, self.dim)?;
        Ok(params.iter().map(|x| x.abs()).sum())
    }
}

impl Evaluable for AbsoluteSum {}

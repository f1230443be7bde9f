use alloc::vec::Vec;

use crate::function::{
    check_dimension, BatchRange, CapabilitySet, Differentiable, Evaluable, Function, FunctionError,
    Gradient, PartiallyDifferentiable, Separable, SeparableDifferentiable, SparseGradient,
};
use crate::problems::Ordering;

/// Four independent parabolas, one per coordinate:
/// `f(x) = Σ_i (x_i² + b_i x_i + c_i)` with `b = (-4, -2, -3, -8)` and
/// `c = (20, 12, 15, 100)`.
///
/// Component `i` of the separable form is the parabola on coordinate
/// `ord[i]`. The minimum `123.75` is reached at `(2, 1, 1.5, 4)`.
#[derive(Debug, Clone)]
pub struct FourQuadratics {
    intercepts: [f64; 4],
    coefficients: [f64; 4],
    ord: Ordering,
}

impl Default for FourQuadratics {
    fn default() -> Self {
        Self::new()
    }
}

impl FourQuadratics {
    pub const MINIMIZER: [f64; 4] = [2.0, 1.0, 1.5, 4.0];
    pub const MINIMUM: f64 = 123.75;

    pub fn new() -> Self {
        Self {
            intercepts: [20.0, 12.0, 15.0, 100.0],
            coefficients: [-4.0, -2.0, -3.0, -8.0],
            ord: Ordering::identity(4),
        }
    }

    pub fn intercepts(&self) -> &[f64; 4] {
        &self.intercepts
    }

    pub fn coefficients(&self) -> &[f64; 4] {
        &self.coefficients
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ord
    }

    #[inline]
    fn component(&self, k: usize, x: f64) -> f64 {
        x * x + self.coefficients[k] * x + self.intercepts[k]
    }

    #[inline]
    fn derivative(&self, k: usize, x: f64) -> f64 {
        2.0 * x + self.coefficients[k]
    }
}

impl Function for FourQuadratics {
    fn dimension(&self) -> usize {
        4
    }

    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::SEPARABLE_DIFFERENTIABLE
            | CapabilitySet::PARTIAL_GRADIENT
            | CapabilitySet::NUM_FEATURES
            | CapabilitySet::SPARSE_GRADIENT
    }

    fn name(&self) -> &str {
        "four_quadratics"
    }

    fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError> {
        check_dimension(params, 4)?;
        range.validate(4)?;
        Ok(range
            .iter()
            .map(|i| {
                let k = self.ord.get(i);
                self.component(k, params[k])
            })
            .sum())
    }

    fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        check_dimension(params, 4)?;
        range.validate(4)?;
        let mut entries: Vec<(usize, f64)> = range
            .iter()
            .map(|i| {
                let k = self.ord.get(i);
                (k, self.derivative(k, params[k]))
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        Ok(SparseGradient::new(4, entries)?.into())
    }

    fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        check_dimension(params, 4)?;
        if feature >= 4 {
            return Err(FunctionError::FeatureOutOfRange { feature, num_features: 4 });
        }
        SparseGradient::single(4, feature, self.derivative(feature, params[feature]))
    }

    fn num_functions(&self) -> Result<usize, FunctionError> {
        Ok(4)
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        Ok(4)
    }

    fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> {
        self.ord.shuffle(seed);
        Ok(())
    }
}

impl Separable for FourQuadratics {}
impl SeparableDifferentiable for FourQuadratics {}
impl PartiallyDifferentiable for FourQuadratics {}
impl Evaluable for FourQuadratics {}
impl Differentiable for FourQuadratics {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Method;
    use alloc::vec;

    #[test]
    fn batch_values_with_identity_order() {
        let f = FourQuadratics::new();
        let zero = [0.0; 4];
        assert_eq!(f.evaluate_batch(&zero, BatchRange::new(0, 1)).unwrap(), 20.0);
        assert_eq!(f.evaluate_batch(&zero, BatchRange::new(0, 4)).unwrap(), 147.0);
        let star = FourQuadratics::MINIMIZER;
        // Vertex values c - b²/4 of components 2 and 3: 15 - 9/4 and 100 - 16.
        assert_eq!(f.evaluate_batch(&star, BatchRange::new(2, 2)).unwrap(), 96.75);
        assert_eq!(f.evaluate_batch(&star, BatchRange::new(0, 4)).unwrap(), 123.75);
    }

    #[test]
    fn batch_gradient_is_sparse_sum() {
        let f = FourQuadratics::new();
        let zero = [0.0; 4];
        let g = f.gradient_batch(&zero, BatchRange::new(0, 1)).unwrap();
        assert_eq!(g, Gradient::Sparse(SparseGradient::single(4, 0, -4.0).unwrap()));
        let g = f.gradient_batch(&zero, BatchRange::new(0, 4)).unwrap();
        assert_eq!(g.to_dense(), vec![-4.0, -2.0, -3.0, -8.0]);
    }

    #[test]
    fn partial_gradients() {
        let f = FourQuadratics::new();
        assert_eq!(f.partial_gradient(&[0.0; 4], 0).unwrap().entries(), &[(0, -4.0)]);
        let at_vertex = f.partial_gradient(&FourQuadratics::MINIMIZER, 0).unwrap();
        assert_eq!(at_vertex.entries(), &[(0, 0.0)]);
        assert!(matches!(
            f.partial_gradient(&[0.0; 4], 4),
            Err(FunctionError::FeatureOutOfRange { feature: 4, num_features: 4 })
        ));
    }

    #[test]
    fn contract_errors() {
        let f = FourQuadratics::new();
        assert!(matches!(
            f.evaluate_batch(&[0.0; 4], BatchRange::new(3, 2)),
            Err(FunctionError::RangeOutOfBounds { .. })
        ));
        assert!(matches!(
            f.evaluate_batch(&[0.0; 3], BatchRange::new(0, 1)),
            Err(FunctionError::DimensionMismatch { expected: 4, actual: 3 })
        ));
        assert_eq!(f.evaluate(&[0.0; 4]), Err(FunctionError::Unsupported(Method::Evaluate)));
        assert_eq!(f.gradient(&[0.0; 4]), Err(FunctionError::Unsupported(Method::Gradient)));
    }

    #[test]
    fn shuffle_keeps_full_sum() {
        let mut f = FourQuadratics::new();
        let x = [0.3, -1.0, 2.5, 7.0];
        let before = f.evaluate_batch(&x, BatchRange::full(4)).unwrap();
        for seed in 0..50 {
            f.shuffle(seed).unwrap();
            let after = f.evaluate_batch(&x, BatchRange::full(4)).unwrap();
            assert!((before - after).abs() <= 1e-12 * before.abs());
        }
    }
}

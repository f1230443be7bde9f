use alloc::vec;
use alloc::vec::Vec;

use crate::function::{
    check_dimension, BatchRange, CapabilitySet, Differentiable, Evaluable, Function, FunctionError,
    Gradient, PartiallyDifferentiable, Separable, SeparableDifferentiable, SparseGradient,
};
use crate::problems::{Ordering, ProblemError};

/// Separable diagonal quadratic with sparse component gradients.
///
/// There are `d` components. Component `i` covers the cyclic window of `k`
/// coordinates starting at `i`: `f_i(x) = Σ_{t<k} a_c x_c² / k` with
/// `c = (i + t) mod d`. Every coordinate lies in exactly `k` windows, so the
/// total is `Σ_j a_j x_j²`.
#[derive(Debug, Clone)]
pub struct SparseQuadratic {
    a: Vec<f64>,
    k: usize,
    ord: Ordering,
}

impl SparseQuadratic {
    pub fn new(a: Vec<f64>, k: usize) -> Result<Self, ProblemError> {
        if a.is_empty() {
            return Err(ProblemError::ZeroDimension);
        }
        if let Some((index, &value)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(ProblemError::NonPositiveCoefficient { index, value });
        }
        if k == 0 || k > a.len() {
            return Err(ProblemError::InvalidActiveSet { k, dim: a.len() });
        }
        let n = a.len();
        Ok(Self { a, k, ord: Ordering::identity(n) })
    }

    pub fn active_set_size(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    fn window(&self, component: usize) -> impl Iterator<Item = usize> + '_ {
        let d = self.a.len();
        (0..self.k).map(move |t| (component + t) % d)
    }

    fn validate(&self, params: &[f64], range: BatchRange) -> Result<(), FunctionError> {
        check_dimension(params, self.a.len())?;
        range.validate(self.a.len())?;
        Ok(())
    }
}

impl Function for SparseQuadratic {
    fn dimension(&self) -> usize {
        self.a.len()
    }

    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::SEPARABLE_DIFFERENTIABLE
            | CapabilitySet::SPARSE_GRADIENT
            | CapabilitySet::PARTIAL_GRADIENT
            | CapabilitySet::NUM_FEATURES
    }

    fn name(&self) -> &str {
        "sparse_quadratic"
    }

    fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError> {
        self.validate(params, range)?;
        let k = self.k as f64;
        Ok(range
            .iter()
            .flat_map(|p| self.window(self.ord.get(p)))
            .map(|c| self.a[c] * params[c] * params[c] / k)
            .sum())
    }

    fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        self.validate(params, range)?;
        let d = self.a.len();
        let k = self.k as f64;
        let mut acc = vec![0.0; d];
        let mut touched = vec![false; d];
        for p in range.iter() {
            for c in self.window(self.ord.get(p)) {
                acc[c] += 2.0 * self.a[c] * params[c] / k;
                touched[c] = true;
            }
        }
        let entries = (0..d).filter(|&c| touched[c]).map(|c| (c, acc[c])).collect();
        Ok(SparseGradient::new(d, entries)?.into())
    }

    fn partial_gradient(&self, params: &[f64], feature: usize) -> Result<SparseGradient, FunctionError> {
        let d = self.a.len();
        check_dimension(params, d)?;
        if feature >= d {
            return Err(FunctionError::FeatureOutOfRange { feature, num_features: d });
        }
        SparseGradient::single(d, feature, 2.0 * self.a[feature] * params[feature])
    }

    fn num_functions(&self) -> Result<usize, FunctionError> {
        Ok(self.a.len())
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        Ok(self.a.len())
    }

    fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> {
        self.ord.shuffle(seed);
        Ok(())
    }
}

impl Separable for SparseQuadratic {}
impl SeparableDifferentiable for SparseQuadratic {}
impl PartiallyDifferentiable for SparseQuadratic {}
impl Evaluable for SparseQuadratic {}
impl Differentiable for SparseQuadratic {}

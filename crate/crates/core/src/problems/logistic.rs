use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::function::{
    check_dimension, BatchRange, CapabilitySet, Differentiable, Evaluable, Function, FunctionError,
    Gradient, Separable, SeparableDifferentiable,
};
use crate::math;
use crate::problems::{Ordering, ProblemError};

/// Unregularized logistic-regression negative log-likelihood.
///
/// One separable component per data point. Parameters are the `d` feature
/// weights followed by the bias, so the dimension is `d + 1`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    /// Row-major `n × d`.
    data: Vec<f64>,
    labels: Vec<f64>,
    features: usize,
    ord: Ordering,
}

impl LogisticRegression {
    /// Builds the problem from rows of features and `{0, 1}` labels.
    pub fn new(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self, ProblemError> {
        let features = rows.first().map(Vec::len).ok_or(ProblemError::EmptyDataset)?;
        if labels.len() != rows.len() {
            return Err(ProblemError::RaggedRow {
                row: labels.len().min(rows.len()),
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        let mut data = Vec::with_capacity(rows.len() * features);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != features {
                return Err(ProblemError::RaggedRow { row, expected: features, actual: r.len() });
            }
            if let Some((column, &value)) = r.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(ProblemError::NonFinite { row, column, value });
            }
            data.extend_from_slice(r);
        }
        for (row, &value) in labels.iter().enumerate() {
            if value != 0.0 && value != 1.0 {
                return Err(ProblemError::InvalidLabel { row, value });
            }
        }
        Ok(Self { data, labels: labels.to_vec(), features, ord: Ordering::identity(rows.len()) })
    }

    /// Seeded synthetic dataset: standard-normal features, labels drawn from
    /// the logistic model with weights `w_k = (-1)^k (k + 1) / 2` and bias
    /// `0.25`.
    pub fn synthetic(rows: usize, features: usize, seed: u64) -> Result<Self, ProblemError> {
        if rows == 0 {
            return Err(ProblemError::EmptyDataset);
        }
        if features == 0 {
            return Err(ProblemError::ZeroDimension);
        }
        let mut rng = crate::seeded_rng(seed);
        let weights: Vec<f64> = (0..features)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (k as f64 + 1.0) / 2.0)
            .collect();
        let mut data = Vec::with_capacity(rows * features);
        let mut labels = Vec::with_capacity(rows);
        for _ in 0..rows {
            let start = data.len();
            for _ in 0..features {
                data.push(rng.sample::<f64, _>(StandardNormal));
            }
            let z = math::dot(&data[start..], &weights) + 0.25;
            let u: f64 = rng.random();
            labels.push(if u < math::sigmoid(z) { 1.0 } else { 0.0 });
        }
        Ok(Self { data, labels, features, ord: Ordering::identity(rows) })
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn features(&self) -> usize {
        self.features
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.features..(i + 1) * self.features]
    }

    fn margin(&self, params: &[f64], i: usize) -> f64 {
        math::dot(self.row(i), &params[..self.features]) + params[self.features]
    }

    fn point_loss(&self, params: &[f64], i: usize) -> f64 {
        let z = self.margin(params, i);
        // -[y ln σ(z) + (1-y) ln(1-σ(z))]
        if self.labels[i] == 1.0 {
            math::softplus(-z)
        } else {
            math::softplus(z)
        }
    }

    fn validate(&self, params: &[f64], range: BatchRange) -> Result<(), FunctionError> {
        check_dimension(params, self.features + 1)?;
        range.validate(self.rows())?;
        Ok(())
    }
}

impl Function for LogisticRegression {
    fn dimension(&self) -> usize {
        self.features + 1
    }

    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::SEPARABLE_DIFFERENTIABLE | CapabilitySet::NUM_FEATURES
    }

    fn name(&self) -> &str {
        "logistic_regression"
    }

    fn evaluate_batch(&self, params: &[f64], range: BatchRange) -> Result<f64, FunctionError> {
        self.validate(params, range)?;
        Ok(range.iter().map(|p| self.point_loss(params, self.ord.get(p))).sum())
    }

    fn gradient_batch(&self, params: &[f64], range: BatchRange) -> Result<Gradient, FunctionError> {
        self.validate(params, range)?;
        let mut g = vec![0.0; self.features + 1];
        for p in range.iter() {
            let i = self.ord.get(p);
            let residual = math::sigmoid(self.margin(params, i)) - self.labels[i];
            for (gk, xk) in g.iter_mut().zip(self.row(i)) {
                *gk += residual * xk;
            }
            g[self.features] += residual;
        }
        Ok(Gradient::Dense(g))
    }

    fn num_functions(&self) -> Result<usize, FunctionError> {
        Ok(self.rows())
    }

    fn num_features(&self) -> Result<usize, FunctionError> {
        Ok(self.features + 1)
    }

    fn shuffle(&mut self, seed: u64) -> Result<(), FunctionError> {
        self.ord.shuffle(seed);
        Ok(())
    }
}

impl Separable for LogisticRegression {}
impl SeparableDifferentiable for LogisticRegression {}
impl Evaluable for LogisticRegression {}
impl Differentiable for LogisticRegression {}

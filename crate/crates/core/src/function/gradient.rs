use alloc::vec;
use alloc::vec::Vec;

use crate::function::FunctionError;
use crate::math;

/// A gradient with `(index, value)` entries, indices strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGradient {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseGradient {
    /// Builds a sparse gradient, validating that indices are strictly
    /// increasing and inside `[0, dim)`.
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self, FunctionError> {
        let mut prev: Option<usize> = None;
        for &(index, _) in &entries {
            if index >= dim || prev.is_some_and(|p| p >= index) {
                return Err(FunctionError::InvalidSparseIndex { index, dim });
            }
            prev = Some(index);
        }
        Ok(Self { dim, entries })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// A gradient with a single non-structural entry.
    pub fn single(dim: usize, index: usize, value: f64) -> Result<Self, FunctionError> {
        Self::new(dim, vec![(index, value)])
    }

    /// Keeps every entry of `dense` that is not equal to zero.
    pub fn from_dense(dense: &[f64]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self { dim: dense.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    /// `out += scale * self`, touching only stored indices.
    pub fn add_scaled_to(&self, out: &mut [f64], scale: f64) {
        for &(i, v) in &self.entries {
            out[i] += scale * v;
        }
    }
}

/// Gradient of an objective, in dense or sparse storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Gradient {
    Dense(Vec<f64>),
    Sparse(SparseGradient),
}

impl Gradient {
    pub fn dim(&self) -> usize {
        match self {
            Gradient::Dense(v) => v.len(),
            Gradient::Sparse(s) => s.dim(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Gradient::Sparse(_))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Gradient::Dense(v) => v.clone(),
            Gradient::Sparse(s) => s.to_dense(),
        }
    }

    pub fn into_dense(self) -> Vec<f64> {
        match self {
            Gradient::Dense(v) => v,
            Gradient::Sparse(s) => s.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> SparseGradient {
        match self {
            Gradient::Dense(v) => SparseGradient::from_dense(v),
            Gradient::Sparse(s) => s.clone(),
        }
    }

    pub fn add_scaled_to(&self, out: &mut [f64], scale: f64) {
        match self {
            Gradient::Dense(v) => {
                for (o, g) in out.iter_mut().zip(v) {
                    *o += scale * g;
                }
            }
            Gradient::Sparse(s) => s.add_scaled_to(out, scale),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Gradient::Dense(v) => math::norm(v),
            Gradient::Sparse(s) => math::sqrt(s.entries.iter().map(|(_, v)| v * v).sum()),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Gradient::Dense(v) => v.iter().all(|x| x.is_finite()),
            Gradient::Sparse(s) => s.entries.iter().all(|(_, v)| v.is_finite()),
        }
    }
}

impl From<SparseGradient> for Gradient {
    fn from(s: SparseGradient) -> Self {
        Gradient::Sparse(s)
    }
}

impl From<Vec<f64>> for Gradient {
    fn from(v: Vec<f64>) -> Self {
        Gradient::Dense(v)
    }
}

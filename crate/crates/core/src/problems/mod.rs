//! Reference objective functions covering every capability combination.

use thiserror::Error;

mod four_quadratics;
mod logistic;
mod ordering;
mod rosenbrock;
mod sparse_quadratic;
mod sphere;
mod toy;

pub use four_quadratics::FourQuadratics;
pub use logistic::LogisticRegression;
pub use ordering::Ordering;
pub use rosenbrock::Rosenbrock;
pub use sparse_quadratic::SparseQuadratic;
pub use sphere::Sphere;
pub use toy::AbsoluteSum;

/// Invalid construction input for a reference problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dataset must contain at least one row")]
    EmptyDataset,
    #[error("row {row} has {actual} features, expected {expected}")]
    RaggedRow { row: usize, expected: usize, actual: usize },
    #[error("label {value} in row {row} is not 0 or 1")]
    InvalidLabel { row: usize, value: f64 },
    #[error("non-finite value {value} at row {row}, column {column}")]
    NonFinite { row: usize, column: usize, value: f64 },
    #[error("coefficient a[{index}] = {value} must be positive and finite")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("active-set size {k} must be in [1, {dim}]")]
    InvalidActiveSet { k: usize, dim: usize },
}

//! Independent oracles for checking objective functions: central finite
//! differences and exhaustive grid minimization.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::function::{adapter, check_capabilities, CapabilityDiagnostic, CapabilitySet, Function, FunctionError};

/// Default finite-difference step for unit-scale parameters.
pub const DEFAULT_STEP: f64 = 1e-5;
pub const MAX_POINTS_PER_AXIS: usize = 65;
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("objective is {value} at probe point {probe:?} (coordinate {coordinate})")]
    NonFiniteProbe { coordinate: usize, value: f64, probe: Vec<f64> },
    #[error("finite-difference step {0} must be positive and finite")]
    InvalidStep(f64),
    #[error("grid has {per_axis} points on its largest axis and {total} points in total; limits are {MAX_POINTS_PER_AXIS} per axis and {MAX_GRID_POINTS} overall")]
    GridTooLarge { per_axis: usize, total: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Capability(#[from] CapabilityDiagnostic),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

fn require<F: Function + ?Sized>(f: &F, required: CapabilitySet, who: &str) -> Result<(), ValidationError> {
    check_capabilities(f.capabilities(), required, who, f.name())?;
    Ok(())
}

/// Central differences `(f(x + h e_j) − f(x − h e_j)) / 2h` for every `j`.
pub fn finite_difference_gradient<F: Function + ?Sized>(
    function: &F,
    params: &[f64],
    h: f64,
) -> Result<Vec<f64>, ValidationError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ValidationError::InvalidStep(h));
    }
    require(function, CapabilitySet::FULL_EVALUATE, "finite_difference_gradient")?;
    let mut probe = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for j in 0..params.len() {
        let mut eval_at = |value: f64| -> Result<f64, ValidationError> {
            probe[j] = value;
            let v = adapter::evaluate_full(function, &probe)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ValidationError::NonFiniteProbe { coordinate: j, value: v, probe: probe.clone() })
            }
        };
        let plus = eval_at(params[j] + h)?;
        let minus = eval_at(params[j] - h)?;
        probe[j] = params[j];
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// Error measure used by [`check_gradient`]: `|a − b| / max(1, |a|, |b|)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    pub max_relative_error: f64,
    pub worst_coordinate: usize,
    /// The sampled point where the worst error occurred.
    pub worst_point: Vec<f64>,
    pub points_checked: usize,
    pub threshold: f64,
    pub passed: bool,
}

/// Compares the analytic gradient with central differences at `points`
/// seeded points drawn uniformly from `[-2, 2]^d`.
///
/// A point where the difference quotient cannot be formed counts as an
/// infinite error; only a function without a gradient is an `Err`.
pub fn check_gradient<F: Function + ?Sized>(
    function: &F,
    points: usize,
    seed: u64,
    h: f64,
    threshold: f64,
) -> Result<GradientCheckReport, ValidationError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ValidationError::InvalidStep(h));
    }
    require(function, CapabilitySet::DIFFERENTIABLE, "check_gradient")?;
    let d = function.dimension();
    let mut rng = crate::seeded_rng(seed);
    let mut worst = (0.0f64, 0usize, vec![0.0; d]);
    for _ in 0..points {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let analytic = adapter::gradient_full(function, &x)?.into_dense();
        let errors: Vec<f64> = match finite_difference_gradient(function, &x, h) {
            Ok(numeric) => analytic.iter().zip(&numeric).map(|(a, b)| relative_error(*a, *b)).collect(),
            Err(ValidationError::NonFiniteProbe { coordinate, .. }) => {
                let mut e = vec![0.0; d];
                e[coordinate] = f64::INFINITY;
                e
            }
            Err(other) => return Err(other),
        };
        for (j, e) in errors.into_iter().enumerate() {
            // NaN errors count as failures too.
            if e > worst.0 || (e.is_nan() && !worst.0.is_nan()) {
                worst = (e, j, x.clone());
            }
        }
    }
    let (max_relative_error, worst_coordinate, worst_point) = worst;
    Ok(GradientCheckReport {
        max_relative_error,
        worst_coordinate,
        worst_point,
        points_checked: points,
        threshold,
        passed: max_relative_error < threshold,
    })
}

/// Best point of an exhaustive grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub params: Vec<f64>,
    pub objective: f64,
    pub points_evaluated: u64,
}

/// Evaluates `lower_j + i · resolution` for every `i` with the point still
/// `≤ upper_j`, on every axis, and returns the smallest objective. Ties go
/// to the lexicographically smallest point.
pub fn brute_force_grid_min<F: Function + ?Sized>(
    function: &F,
    lower: &[f64],
    upper: &[f64],
    resolution: f64,
) -> Result<GridMinimum, ValidationError> {
    require(function, CapabilitySet::FULL_EVALUATE, "brute_force_grid_min")?;
    let d = function.dimension();
    if lower.len() != d || upper.len() != d {
        return Err(ValidationError::InvalidGrid(alloc::format!(
            "bounds must have the function dimension {d}"
        )));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(ValidationError::InvalidGrid(alloc::format!("resolution {resolution} must be positive")));
    }
    let mut counts = Vec::with_capacity(d);
    for (l, u) in lower.iter().zip(upper) {
        if !(l.is_finite() && u.is_finite() && l <= u) {
            return Err(ValidationError::InvalidGrid(alloc::format!("invalid bounds [{l}, {u}]")));
        }
        // Tolerate representation error in (u - l) / resolution.
        let intervals = libm::floor((u - l) / resolution + 1e-9);
        counts.push(intervals + 1.0);
    }
    let per_axis = counts.iter().copied().fold(0.0, f64::max);
    let total: f64 = counts.iter().product();
    if per_axis > MAX_POINTS_PER_AXIS as f64 || total > MAX_GRID_POINTS as f64 {
        return Err(ValidationError::GridTooLarge { per_axis: per_axis as usize, total });
    }
    let counts: Vec<usize> = counts.into_iter().map(|c| c as usize).collect();

    let mut index = vec![0usize; d];
    let mut point = lower.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0u64;
    loop {
        let v = adapter::evaluate_full(function, &point)?;
        evaluated += 1;
        if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, point.clone()));
        }
        // Odometer with the first coordinate most significant.
        let mut axis = d;
        loop {
            if axis == 0 {
                let (objective, params) = best.ok_or_else(|| {
                    ValidationError::InvalidGrid("objective is non-finite at every grid point".into())
                })?;
                return Ok(GridMinimum { params, objective, points_evaluated: evaluated });
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < counts[axis] {
                point[axis] = lower[axis] + index[axis] as f64 * resolution;
                break;
            }
            index[axis] = 0;
            point[axis] = lower[axis];
        }
    }
}

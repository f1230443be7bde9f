//! Per-step update rules for the SGD family.
//!
//! A [`PolicyState`] turns a (batch-averaged) gradient into a parameter step
//! and carries whatever running statistics the rule needs. Policies always
//! work on dense gradients.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::math;

/// Configuration errors and contract violations of an update policy.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("{policy}: hyperparameter `{name}` = {value} must be in {expected}")]
    InvalidHyperparameter { policy: PolicyKind, name: &'static str, value: f64, expected: &'static str },
    #[error("parameter dimension must be at least 1")]
    ZeroDimension,
    #[error("expected vectors of dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("step size {0} must be positive and finite")]
    InvalidStepSize(f64),
    #[error("unknown update policy `{0}`")]
    UnknownPolicy(alloc::string::String),
}

/// Names of the available update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Vanilla,
    Momentum,
    AdaGrad,
    AdaDelta,
    RmsProp,
    Adam,
    AdaMax,
    Smorms3,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::Vanilla,
        PolicyKind::Momentum,
        PolicyKind::AdaGrad,
        PolicyKind::AdaDelta,
        PolicyKind::RmsProp,
        PolicyKind::Adam,
        PolicyKind::AdaMax,
        PolicyKind::Smorms3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Vanilla => "vanilla",
            PolicyKind::Momentum => "momentum",
            PolicyKind::AdaGrad => "adagrad",
            PolicyKind::AdaDelta => "adadelta",
            PolicyKind::RmsProp => "rmsprop",
            PolicyKind::Adam => "adam",
            PolicyKind::AdaMax => "adamax",
            PolicyKind::Smorms3 => "smorms3",
        }
    }

    /// The rule with its customary hyperparameters.
    pub fn default_config(self) -> PolicyConfig {
        match self {
            PolicyKind::Vanilla => PolicyConfig::Vanilla,
            PolicyKind::Momentum => PolicyConfig::Momentum { momentum: 0.9 },
            PolicyKind::AdaGrad => PolicyConfig::AdaGrad { epsilon: 1e-8 },
            PolicyKind::AdaDelta => PolicyConfig::AdaDelta { rho: 0.95, epsilon: 1e-6 },
            PolicyKind::RmsProp => PolicyConfig::RmsProp { decay: 0.99, epsilon: 1e-8 },
            PolicyKind::Adam => PolicyConfig::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 },
            PolicyKind::AdaMax => PolicyConfig::AdaMax { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 },
            PolicyKind::Smorms3 => PolicyConfig::Smorms3 { epsilon: 1e-16 },
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PolicyError::UnknownPolicy(s.into()))
    }
}

/// Update rule and its hyperparameters.
///
/// | rule | step | ε placement |
/// |------|------|-------------|
/// | vanilla | `x -= η g` | none |
/// | momentum | `v = μ v - η g; x += v` | none |
/// | AdaGrad | `G += g²; x -= η g / (√G + ε)` | outside the root |
/// | AdaDelta | `E[g²] = ρ E[g²] + (1-ρ) g²; Δ = -√(E[Δ²]+ε) / √(E[g²]+ε) g; E[Δ²] = ρ E[Δ²] + (1-ρ) Δ²; x += η Δ` | inside both roots |
/// | RMSProp | `v = ρ v + (1-ρ) g²; x -= η g / (√(v / (1-ρᵗ)) + ε)` | outside the root |
/// | Adam | `m = β₁ m + (1-β₁) g; v = β₂ v + (1-β₂) g²; x -= η m̂ / (√v̂ + ε)` | outside the root |
/// | AdaMax | `m = β₁ m + (1-β₁) g; u = max(β₂ u, |g|); x -= η / (1-β₁ᵗ) · m / (u + ε)` | added to `u` |
/// | SMORMS3 | `r = 1/(mem+1); g₁, g₂` running means with weight `r`; `x -= g · min(η, g₁²/(g₂+ε)) / (√g₂ + ε)`; `mem = 1 + mem (1 - g₁²/(g₂+ε))` | outside the root |
///
/// `m̂`, `v̂` are the bias-corrected moments `m / (1-β₁ᵗ)`, `v / (1-β₂ᵗ)`.
/// RMSProp applies the same correction to its squared-gradient average, and
/// SMORMS3 starts its memory at 0, so the first step of every adaptive rule
/// has magnitude at most `η`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PolicyConfig {
    #[default]
    Vanilla,
    Momentum { momentum: f64 },
    AdaGrad { epsilon: f64 },
    AdaDelta { rho: f64, epsilon: f64 },
    RmsProp { decay: f64, epsilon: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
    AdaMax { beta1: f64, beta2: f64, epsilon: f64 },
    Smorms3 { epsilon: f64 },
}

impl PolicyConfig {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyConfig::Vanilla => PolicyKind::Vanilla,
            PolicyConfig::Momentum { .. } => PolicyKind::Momentum,
            PolicyConfig::AdaGrad { .. } => PolicyKind::AdaGrad,
            PolicyConfig::AdaDelta { .. } => PolicyKind::AdaDelta,
            PolicyConfig::RmsProp { .. } => PolicyKind::RmsProp,
            PolicyConfig::Adam { .. } => PolicyKind::Adam,
            PolicyConfig::AdaMax { .. } => PolicyKind::AdaMax,
            PolicyConfig::Smorms3 { .. } => PolicyKind::Smorms3,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let policy = self.kind();
        let open_unit = |name, value: f64| {
            if value > 0.0 && value < 1.0 {
                Ok(())
            } else {
                Err(PolicyError::InvalidHyperparameter { policy, name, value, expected: "(0, 1)" })
            }
        };
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(PolicyError::InvalidHyperparameter { policy, name, value, expected: "(0, inf)" })
            }
        };
        match *self {
            PolicyConfig::Vanilla => Ok(()),
            PolicyConfig::Momentum { momentum } => {
                if (0.0..1.0).contains(&momentum) {
                    Ok(())
                } else {
                    Err(PolicyError::InvalidHyperparameter {
                        policy,
                        name: "momentum",
                        value: momentum,
                        expected: "[0, 1)",
                    })
                }
            }
            PolicyConfig::AdaGrad { epsilon } | PolicyConfig::Smorms3 { epsilon } => {
                positive("epsilon", epsilon)
            }
            PolicyConfig::AdaDelta { rho, epsilon } => {
                open_unit("rho", rho)?;
                positive("epsilon", epsilon)
            }
            PolicyConfig::RmsProp { decay, epsilon } => {
                open_unit("decay", decay)?;
                positive("epsilon", epsilon)
            }
            PolicyConfig::Adam { beta1, beta2, epsilon } | PolicyConfig::AdaMax { beta1, beta2, epsilon } => {
                open_unit("beta1", beta1)?;
                open_unit("beta2", beta2)?;
                positive("epsilon", epsilon)
            }
        }
    }

    fn accumulator_count(&self) -> usize {
        match self {
            PolicyConfig::Vanilla => 0,
            PolicyConfig::Momentum { .. } | PolicyConfig::AdaGrad { .. } | PolicyConfig::RmsProp { .. } => 1,
            PolicyConfig::AdaDelta { .. } | PolicyConfig::Adam { .. } | PolicyConfig::AdaMax { .. } => 2,
            PolicyConfig::Smorms3 { .. } => 3,
        }
    }
}

/// Whether [`PolicyState::apply`] changed the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    /// The gradient had a non-finite entry; parameters and accumulators are
    /// untouched.
    Rejected,
}

/// Mutable state of one update rule for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    config: PolicyConfig,
    dim: usize,
    step_count: u64,
    rejected_steps: u64,
    accumulators: Vec<Vec<f64>>,
}

impl PolicyState {
    /// Fresh state: zero step count and zero accumulators of length `dim`.
    pub fn new(config: PolicyConfig, dim: usize) -> Result<Self, PolicyError> {
        config.validate()?;
        if dim == 0 {
            return Err(PolicyError::ZeroDimension);
        }
        let accumulators = (0..config.accumulator_count()).map(|_| vec![0.0; dim]).collect();
        Ok(Self { config, dim, step_count: 0, rejected_steps: 0, accumulators })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn kind(&self) -> PolicyKind {
        self.config.kind()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Calls to [`apply`](Self::apply), rejected ones included.
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn rejected_steps(&self) -> u64 {
        self.rejected_steps
    }

    pub fn accumulators(&self) -> &[Vec<f64>] {
        &self.accumulators
    }

    /// Applies one step of size `step_size` along `gradient`, in place.
    pub fn apply(
        &mut self,
        params: &mut [f64],
        step_size: f64,
        gradient: &[f64],
    ) -> Result<StepOutcome, PolicyError> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(PolicyError::InvalidStepSize(step_size));
        }
        for len in [params.len(), gradient.len()] {
            if len != self.dim {
                return Err(PolicyError::DimensionMismatch { expected: self.dim, actual: len });
            }
        }
        self.step_count += 1;
        if gradient.iter().any(|g| !g.is_finite()) {
            self.rejected_steps += 1;
            return Ok(StepOutcome::Rejected);
        }
        let t = (self.step_count - self.rejected_steps) as f64;
        let lr = step_size;
        let acc = &mut self.accumulators;
        match self.config {
            PolicyConfig::Vanilla => {
                for (x, g) in params.iter_mut().zip(gradient) {
                    *x -= lr * g;
                }
            }
            PolicyConfig::Momentum { momentum } => {
                let v = &mut acc[0];
                for i in 0..params.len() {
                    v[i] = momentum * v[i] - lr * gradient[i];
                    params[i] += v[i];
                }
            }
            PolicyConfig::AdaGrad { epsilon } => {
                let sum_sq = &mut acc[0];
                for i in 0..params.len() {
                    let g = gradient[i];
                    sum_sq[i] += g * g;
                    params[i] -= lr * g / (math::sqrt(sum_sq[i]) + epsilon);
                }
            }
            PolicyConfig::AdaDelta { rho, epsilon } => {
                let (mean_sq_grad, rest) = acc.split_at_mut(1);
                let (mean_sq_grad, mean_sq_delta) = (&mut mean_sq_grad[0], &mut rest[0]);
                for i in 0..params.len() {
                    let g = gradient[i];
                    mean_sq_grad[i] = rho * mean_sq_grad[i] + (1.0 - rho) * g * g;
                    let delta = -math::sqrt(mean_sq_delta[i] + epsilon)
                        / math::sqrt(mean_sq_grad[i] + epsilon)
                        * g;
                    mean_sq_delta[i] = rho * mean_sq_delta[i] + (1.0 - rho) * delta * delta;
                    params[i] += lr * delta;
                }
            }
            PolicyConfig::RmsProp { decay, epsilon } => {
                let correction = 1.0 - math::pow(decay, t);
                let mean_sq = &mut acc[0];
                for i in 0..params.len() {
                    let g = gradient[i];
                    mean_sq[i] = decay * mean_sq[i] + (1.0 - decay) * g * g;
                    params[i] -= lr * g / (math::sqrt(mean_sq[i] / correction) + epsilon);
                }
            }
            PolicyConfig::Adam { beta1, beta2, epsilon } => {
                let c1 = 1.0 - math::pow(beta1, t);
                let c2 = 1.0 - math::pow(beta2, t);
                let (m, rest) = acc.split_at_mut(1);
                let (m, v) = (&mut m[0], &mut rest[0]);
                for i in 0..params.len() {
                    let g = gradient[i];
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                    params[i] -= lr * (m[i] / c1) / (math::sqrt(v[i] / c2) + epsilon);
                }
            }
            PolicyConfig::AdaMax { beta1, beta2, epsilon } => {
                let rate = lr / (1.0 - math::pow(beta1, t));
                let (m, rest) = acc.split_at_mut(1);
                let (m, u) = (&mut m[0], &mut rest[0]);
                for i in 0..params.len() {
                    let g = gradient[i];
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                    u[i] = (beta2 * u[i]).max(g.abs());
                    params[i] -= rate * m[i] / (u[i] + epsilon);
                }
            }
            PolicyConfig::Smorms3 { epsilon } => {
                let [g1, g2, mem] = &mut acc[..] else {
                    unreachable!("smorms3 keeps three accumulators")
                };
                for i in 0..params.len() {
                    let g = gradient[i];
                    let r = 1.0 / (mem[i] + 1.0);
                    g1[i] = (1.0 - r) * g1[i] + r * g;
                    g2[i] = (1.0 - r) * g2[i] + r * g * g;
                    let ratio = g1[i] * g1[i] / (g2[i] + epsilon);
                    params[i] -= g * ratio.min(lr) / (math::sqrt(g2[i]) + epsilon);
                    mem[i] = 1.0 + mem[i] * (1.0 - ratio);
                }
            }
        }
        Ok(StepOutcome::Applied)
    }

    /// Like [`apply`](Self::apply) but returns the updated vector.
    pub fn updated(
        &mut self,
        params: &[f64],
        step_size: f64,
        gradient: &[f64],
    ) -> Result<(Vec<f64>, StepOutcome), PolicyError> {
        let mut next = params.to_vec();
        let outcome = self.apply(&mut next, step_size, gradient)?;
        Ok((next, outcome))
    }
}

use core::f64::consts::PI;

use crate::math;
use crate::optimizer::OptimizeError;

/// Cosine annealing with warm restarts.
///
/// Within a period of `T_i` epochs the step size falls from its base value
/// to zero along half a cosine; at the end of the period it jumps back to the
/// base value and the next period lasts `T_{i+1} = T_i · multiplier` epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmRestarts {
    /// `T_0`, in epochs.
    pub initial_period: f64,
    pub multiplier: f64,
}

impl WarmRestarts {
    pub fn new(initial_period: f64, multiplier: f64) -> Result<Self, OptimizeError> {
        let s = Self { initial_period, multiplier };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if !(self.initial_period > 0.0 && self.initial_period.is_finite()) {
            return Err(OptimizeError::InvalidConfig("restart period must be positive".into()));
        }
        if !(self.multiplier >= 1.0 && self.multiplier.is_finite()) {
            return Err(OptimizeError::InvalidConfig("restart multiplier must be >= 1".into()));
        }
        Ok(())
    }

    /// `(start, length)` of the period containing `epochs`.
    pub fn period_at(&self, epochs: f64) -> (f64, f64) {
        let t0 = self.initial_period;
        let m = self.multiplier;
        let start_of = |k: f64| if m == 1.0 { k * t0 } else { t0 * (math::pow(m, k) - 1.0) / (m - 1.0) };
        let mut k = if m == 1.0 {
            libm::floor(epochs / t0)
        } else {
            libm::floor(math::ln(1.0 + epochs * (m - 1.0) / t0) / math::ln(m))
        };
        // Correct for rounding at period boundaries.
        while k > 0.0 && start_of(k) > epochs {
            k -= 1.0;
        }
        while start_of(k + 1.0) <= epochs {
            k += 1.0;
        }
        (start_of(k), t0 * math::pow(m, k))
    }

    /// Multiplier in `[0, 1]` applied to the base step size after `epochs`
    /// (fractional) epochs.
    pub fn factor(&self, epochs: f64) -> f64 {
        let (start, length) = self.period_at(epochs);
        0.5 * (1.0 + math::cos(PI * (epochs - start) / length))
    }

    pub fn step_size(&self, base: f64, epochs: f64) -> f64 {
        base * self.factor(epochs)
    }
}

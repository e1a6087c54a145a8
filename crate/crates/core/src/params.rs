//! Intrinsic system constants and mode labels shared by every layer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("damping constant L must be finite and > 0, got {0}")]
    Damping(f64),
    #[error("propagation speed c must be finite and > 0, got {0}")]
    Speed(f64),
    #[error("momentum k must be finite and > 0, got {0}")]
    Momentum(f64),
}

/// Internal parameters of the system.
///
/// Each momentum `k` carries the reference frequency `ω₀,k = k·c`; the
/// threshold momentum is `k₀ = L / (2c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    damping: f64,
    speed: f64,
}

impl SystemParams {
    pub fn new(damping: f64, speed: f64) -> Result<Self, ParamError> {
        if !(damping.is_finite() && damping > 0.0) {
            return Err(ParamError::Damping(damping));
        }
        if !(speed.is_finite() && speed > 0.0) {
            return Err(ParamError::Speed(speed));
        }
        Ok(Self { damping, speed })
    }

    /// Damping constant `L`.
    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// Propagation speed `c`.
    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Threshold momentum `k₀ = L / (2c)`.
    pub fn k0(&self) -> f64 {
        self.damping / (2.0 * self.speed)
    }

    /// Reference frequency `ω₀,k = k·c`.
    pub fn omega0(&self, k: f64) -> f64 {
        k * self.speed
    }

    /// Momentum whose reference frequency is `omega0`.
    pub fn momentum_for(&self, omega0: f64) -> f64 {
        omega0 / self.speed
    }

    /// Squeeze rate of the doubled-mode evolution, `Γ = L/2`, shared by all `k`.
    pub fn gamma(&self) -> f64 {
        self.damping / 2.0
    }
}

/// A `(k, n)` pair: momentum label and openness order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: f64,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(k: f64, n: u32) -> Result<Self, ParamError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ParamError::Momentum(k));
        }
        Ok(Self { k, n })
    }

    /// `2n + 1`, the factor grading every time scale of the mode.
    pub fn grade(&self) -> f64 {
        f64::from(2 * self.n + 1)
    }
}

//! Quadratic terminal sliding surface shared by every controller.

use crate::error::{require, Result};
use crate::math::sign;

/// Parameters of the quadratic terminal surface
/// `sigma = x1 + delta * x2^2 * sign(x2)`.
///
/// The curvature is mass-scaled: `delta = alpha * m / (K * U)`, i.e. `alpha`
/// divided by the largest commanded acceleration `K * U / m`. With this
/// scaling `alpha = 0.5` is the time-optimal switching parabola of the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    pub alpha: f64,
    /// Maximal switching amplitude U (V).
    pub u_max: f64,
    /// Moving mass m (kg).
    pub mass: f64,
    /// Input gain K (N/V).
    pub input_gain: f64,
    /// Target position x_r (m).
    pub reference: f64,
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self {
            alpha: 1.2,
            u_max: 0.8,
            mass: 0.538,
            input_gain: 3.28,
            reference: 0.015,
        }
    }
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        require(self.alpha > 0.0 && self.alpha.is_finite(), "alpha", self.alpha, "alpha > 0")?;
        require(self.u_max > 0.0 && self.u_max.is_finite(), "u_max", self.u_max, "U > 0")?;
        require(self.mass > 0.0 && self.mass.is_finite(), "mass", self.mass, "m > 0")?;
        require(
            self.input_gain > 0.0 && self.input_gain.is_finite(),
            "input_gain",
            self.input_gain,
            "K > 0",
        )?;
        require(self.reference.is_finite(), "reference", self.reference, "finite x_r")
    }

    /// Largest acceleration the switching component can command (m/s^2).
    pub fn max_acceleration(&self) -> f64 {
        self.input_gain * self.u_max / self.mass
    }

    /// Effective curvature `delta` of the surface (s^2/m).
    pub fn delta(&self) -> f64 {
        self.alpha * self.mass / (self.input_gain * self.u_max)
    }

    /// `alpha <= 0.5` puts the terminal law into twisting mode.
    pub fn is_twisting(&self) -> bool {
        self.alpha <= 0.5
    }

    pub fn sigma(&self, position_error: f64, velocity: f64) -> f64 {
        sigma(position_error, velocity, self)
    }
}

/// Evaluates the surface at a (position error, velocity) point.
#[inline]
pub fn sigma(position_error: f64, velocity: f64, spec: &SurfaceSpec) -> f64 {
    position_error + spec.delta() * velocity * velocity * sign(velocity)
}

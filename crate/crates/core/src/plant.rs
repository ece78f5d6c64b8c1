//! Voice-coil plant: moving mass with gravity and matched disturbance,
//! first-order actuator lag, and noisy position sensing.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{require, Error, Result};
use crate::math::{clamp_abs, sign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    /// Moving mass m (kg).
    pub mass: f64,
    /// Input gain K (N/V).
    pub input_gain: f64,
    /// Gravity force magnitude G (N). Acts against the direction in which a
    /// positive input pushes.
    pub gravity: f64,
    /// Actuator time constant mu (s).
    pub actuator_tau: f64,
    /// Disturbance bound D (N).
    pub disturbance_bound: f64,
    /// Position sensor noise standard deviation (m).
    pub sensor_noise_std: f64,
    /// Constant gravity compensation u_gr (V) added by the controller.
    pub gravity_comp: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            mass: 0.538,
            input_gain: 3.28,
            gravity: 5.27,
            actuator_tau: 0.0012,
            disturbance_bound: 1.0,
            sensor_noise_std: 4.58e-5,
            gravity_comp: 1.61,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        require(self.mass > 0.0 && self.mass.is_finite(), "mass", self.mass, "m > 0")?;
        require(self.input_gain > 0.0 && self.input_gain.is_finite(), "input_gain", self.input_gain, "K > 0")?;
        require(self.gravity.is_finite(), "gravity", self.gravity, "finite G")?;
        require(self.actuator_tau > 0.0 && self.actuator_tau.is_finite(), "actuator_tau", self.actuator_tau, "mu > 0")?;
        require(
            self.disturbance_bound >= 0.0 && self.disturbance_bound.is_finite(),
            "disturbance_bound",
            self.disturbance_bound,
            "D >= 0",
        )?;
        require(
            self.sensor_noise_std >= 0.0 && self.sensor_noise_std.is_finite(),
            "sensor_noise_std",
            self.sensor_noise_std,
            ">= 0",
        )?;
        require(self.gravity_comp.is_finite(), "gravity_comp", self.gravity_comp, "finite u_gr")
    }

    /// Static force left over once the compensation voltage has passed the
    /// actuator: `K * u_gr - G`.
    pub fn residual_gravity(&self) -> f64 {
        self.input_gain * self.gravity_comp - self.gravity
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlantState {
    pub position: f64,
    pub velocity: f64,
    /// Actuator force v after the lag (N).
    pub force: f64,
}

impl PlantState {
    pub fn at_rest(position: f64) -> Self {
        Self {
            position,
            ..Self::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite() && self.force.is_finite()
    }
}

/// Advances the plant by `dt` under a constant input voltage `u`.
///
/// The lag `mu v' = K u - v` is integrated exactly; the mechanical part
/// `m x'' = v - G + d(x)` uses a classical four-stage step in which every stage
/// sees the exact lag output at its own time.
pub fn plant_step(
    state: &PlantState,
    u: f64,
    params: &PlantParams,
    dt: f64,
    disturbance: impl Fn(f64) -> f64,
) -> Result<PlantState> {
    let target = params.input_gain * u;
    let gap = state.force - target;
    let tau = params.actuator_tau;
    let force_at = |s: f64| target + gap * libm::exp(-s / tau);
    let accel = |s: f64, x: f64| (force_at(s) - params.gravity + disturbance(x)) / params.mass;

    let (x0, v0) = (state.position, state.velocity);
    let h = dt;
    let k1x = v0;
    let k1v = accel(0.0, x0);
    let k2x = v0 + 0.5 * h * k1v;
    let k2v = accel(0.5 * h, x0 + 0.5 * h * k1x);
    let k3x = v0 + 0.5 * h * k2v;
    let k3v = accel(0.5 * h, x0 + 0.5 * h * k2x);
    let k4x = v0 + h * k3v;
    let k4v = accel(h, x0 + h * k3x);

    let next = PlantState {
        position: x0 + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        velocity: v0 + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        force: force_at(h),
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { t: f64::NAN })
    }
}

/// Position measurement with additive zero-mean Gaussian noise.
pub fn measure<R: Rng + ?Sized>(state: &PlantState, params: &PlantParams, rng: &mut R) -> f64 {
    if params.sensor_noise_std == 0.0 {
        return state.position;
    }
    let eta: f64 = rng.sample(StandardNormal);
    state.position + params.sensor_noise_std * eta
}

/// One additive disturbance component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceKind {
    None,
    Constant { bias: f64 },
    /// `amplitude * sin(2 pi x / period)`.
    Cogging { amplitude: f64, period: f64 },
    /// First-order low-pass filtered Gaussian noise with standard deviation
    /// `bound / 2`, clamped to `bound`.
    RandomBounded { bound: f64, bandwidth: f64 },
    /// Adversarial `-D sign(u_sm)`, re-evaluated each control sample.
    WorstCase,
}

/// Matched disturbance: the sum of its components clamped to `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceModel {
    pub kinds: Vec<DisturbanceKind>,
    pub bound: f64,
    pub seed: u64,
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self {
            kinds: alloc::vec![
                DisturbanceKind::Cogging {
                    amplitude: 0.6,
                    period: 0.005,
                },
                DisturbanceKind::RandomBounded {
                    bound: 0.4,
                    bandwidth: 50.0,
                },
            ],
            bound: 1.0,
            seed: 0,
        }
    }
}

impl DisturbanceModel {
    pub fn none() -> Self {
        Self {
            kinds: Vec::new(),
            bound: 0.0,
            seed: 0,
        }
    }

    pub fn worst_case(bound: f64) -> Self {
        Self {
            kinds: alloc::vec![DisturbanceKind::WorstCase],
            bound,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.bound >= 0.0 && self.bound.is_finite(), "disturbance.bound", self.bound, "D >= 0")?;
        for kind in &self.kinds {
            match *kind {
                DisturbanceKind::Cogging { amplitude, period } => {
                    require(amplitude.is_finite(), "cogging amplitude", amplitude, "finite")?;
                    require(period > 0.0 && period.is_finite(), "cogging period", period, "> 0")?;
                }
                DisturbanceKind::RandomBounded { bound, bandwidth } => {
                    require(bound >= 0.0 && bound.is_finite(), "random bound", bound, ">= 0")?;
                    require(bandwidth > 0.0 && bandwidth.is_finite(), "random bandwidth", bandwidth, "> 0")?;
                }
                DisturbanceKind::Constant { bias } => require(bias.is_finite(), "constant bias", bias, "finite")?,
                DisturbanceKind::None | DisturbanceKind::WorstCase => {}
            }
        }
        Ok(())
    }
}

/// Runtime disturbance generator holding the random components' state.
#[derive(Debug, Clone)]
pub struct Disturbance {
    model: DisturbanceModel,
    rng: ChaCha8Rng,
    filtered: Vec<f64>,
    worst_case: f64,
}

impl Disturbance {
    pub fn new(model: DisturbanceModel) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        rng.set_stream(1);
        let filtered = alloc::vec![0.0; model.kinds.len()];
        Self {
            model,
            rng,
            filtered,
            worst_case: 0.0,
        }
    }

    pub fn model(&self) -> &DisturbanceModel {
        &self.model
    }

    /// Advances the stochastic components by one control period and latches
    /// the adversarial component against the switching control `u_sm`.
    pub fn advance(&mut self, u_sm: f64, dt: f64) {
        self.worst_case = -self.model.bound * sign(u_sm);
        for (kind, state) in self.model.kinds.iter().zip(self.filtered.iter_mut()) {
            if let DisturbanceKind::RandomBounded { bound, bandwidth } = *kind {
                let a = libm::exp(-2.0 * core::f64::consts::PI * bandwidth * dt);
                let n: f64 = self.rng.sample(StandardNormal);
                *state = a * *state + libm::sqrt(1.0 - a * a) * 0.5 * bound * n;
            }
        }
    }

    /// Disturbance force at position `x` given the latched stochastic state.
    pub fn eval(&self, x: f64) -> f64 {
        let mut d = 0.0;
        for (kind, state) in self.model.kinds.iter().zip(&self.filtered) {
            d += match *kind {
                DisturbanceKind::None => 0.0,
                DisturbanceKind::Constant { bias } => bias,
                DisturbanceKind::Cogging { amplitude, period } => {
                    amplitude * libm::sin(2.0 * core::f64::consts::PI * x / period)
                }
                DisturbanceKind::RandomBounded { bound, .. } => clamp_abs(*state, bound),
                DisturbanceKind::WorstCase => self.worst_case,
            };
        }
        clamp_abs(d, self.model.bound)
    }
}

/// Evaluates a fresh generator of `model` at position `x`.
pub fn disturbance_eval(model: &DisturbanceModel, x: f64) -> f64 {
    Disturbance::new(model.clone()).eval(x)
}

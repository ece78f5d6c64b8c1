//! Switching control laws: terminal, sub-optimal and energy-saving
//! sub-optimal, plus the extremum tracking that anchors the threshold laws.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{require, Error, Result};
use crate::math::sign;

/// Parameters of the classic sub-optimal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubOptimalParams {
    /// Anticipation factor, `0 <= beta < 1`.
    pub beta: f64,
    /// Modulation factor, `>= 1`. Saturated actuation uses 1.
    pub gamma_star: f64,
    pub u_max: f64,
}

impl SubOptimalParams {
    pub fn validate(&self) -> Result<()> {
        require((0.0..1.0).contains(&self.beta), "beta", self.beta, "0 <= beta < 1")?;
        require(self.gamma_star >= 1.0 && self.gamma_star.is_finite(), "gamma_star", self.gamma_star, "gamma* >= 1")?;
        require(self.u_max > 0.0 && self.u_max.is_finite(), "u_max", self.u_max, "U > 0")
    }
}

/// Parameters of the energy-saving sub-optimal law.
///
/// `disturbance_bound` must be expressed in the same units as `u_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySavingParams {
    pub beta1: f64,
    pub beta2: f64,
    pub u_max: f64,
    pub disturbance_bound: f64,
}

impl EnergySavingParams {
    pub fn validate(&self) -> Result<()> {
        require(self.u_max > 0.0 && self.u_max.is_finite(), "u_max", self.u_max, "U > 0")?;
        require(self.disturbance_bound >= 0.0, "disturbance_bound", self.disturbance_bound, "D >= 0")?;
        let check = feasibility_check(self.beta1, self.beta2, self.disturbance_bound, self.u_max);
        if check.is_feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible(check))
        }
    }
}

/// One inequality of the admissible threshold triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `beta1 + beta2 > 2D/U`
    SumExceedsDisturbanceRatio,
    /// `0 <= beta1`
    Beta1NonNegative,
    /// `beta1 < 1`
    Beta1BelowOne,
    /// `-1 < beta2`
    Beta2AboveMinusOne,
    /// `beta2 < beta1`
    Beta2BelowBeta1,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::SumExceedsDisturbanceRatio => "β₁ + β₂ > 2D/U",
            Constraint::Beta1NonNegative => "0 ≤ β₁",
            Constraint::Beta1BelowOne => "β₁ < 1",
            Constraint::Beta2AboveMinusOne => "−1 < β₂",
            Constraint::Beta2BelowBeta1 => "β₂ < β₁",
        })
    }
}

/// Outcome of [`feasibility_check`]: the list of violated inequalities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Violations(pub Vec<Constraint>);

impl Violations {
    pub fn is_feasible(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: Constraint) -> bool {
        self.0.contains(&c)
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Checks `(beta1, beta2)` against the convergence triangle for a
/// disturbance bound `d` and amplitude `u` given in consistent units.
pub fn feasibility_check(beta1: f64, beta2: f64, d: f64, u: f64) -> Violations {
    let mut v = Vec::new();
    // negated comparisons so that NaN counts as a violation
    if !(beta1 + beta2 > 2.0 * d / u) {
        v.push(Constraint::SumExceedsDisturbanceRatio);
    }
    if !(beta1 >= 0.0) {
        v.push(Constraint::Beta1NonNegative);
    }
    if !(beta1 < 1.0) {
        v.push(Constraint::Beta1BelowOne);
    }
    if !(beta2 > -1.0) {
        v.push(Constraint::Beta2AboveMinusOne);
    }
    if !(beta2 < beta1) {
        v.push(Constraint::Beta2BelowBeta1);
    }
    Violations(v)
}

/// Smallest admissible modulation factor for an uncertain input gain
/// `K in [k_min, k_max]`.
pub fn gamma_star_lower_bound(beta: f64, d: f64, u_max: f64, k_min: f64, k_max: f64) -> Result<f64> {
    require(k_min > 0.0 && k_min <= k_max, "k_min", k_min, "0 < K_m <= K_M")?;
    require((0.0..1.0).contains(&beta), "beta", beta, "0 <= beta < 1")?;
    if !(u_max > d / k_min) {
        return Err(Error::InsufficientAuthority {
            u_max,
            required: d / k_min,
        });
    }
    let bound = (2.0 * d + (1.0 - beta) * k_max * u_max) / ((1.0 + beta) * k_min * u_max);
    Ok(bound.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Before the first detected extremum of sigma.
    Initializing,
    Running,
}

/// Per-run controller memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Last detected extremum of sigma.
    pub sigma_m: f64,
    pub phase: Phase,
    pub last_sigma: f64,
    /// Direction of the current excursion: +1 rising, -1 falling, 0 unknown.
    pub last_dsigma_sign: f64,
    pub sigma0: f64,
    /// Running extreme of the current excursion (peak hold).
    pub candidate: f64,
}

impl ControllerState {
    pub fn new(sigma0: f64) -> Self {
        Self {
            sigma_m: sigma0,
            phase: Phase::Initializing,
            last_sigma: sigma0,
            last_dsigma_sign: 0.0,
            sigma0,
            candidate: sigma0,
        }
    }
}

/// Terminal law `-U sign(sigma)`.
#[inline]
pub fn terminal_step(sigma: f64, u_max: f64) -> f64 {
    -u_max * sign(sigma)
}

pub fn suboptimal_step(sigma: f64, state: &ControllerState, params: &SubOptimalParams) -> f64 {
    let s = sigma - params.beta * state.sigma_m;
    let gamma = if s * state.sigma_m >= 0.0 { 1.0 } else { params.gamma_star };
    -gamma * params.u_max * sign(s)
}

pub fn energy_saving_step(sigma: f64, state: &ControllerState, params: &EnergySavingParams) -> f64 {
    let half = 0.5 * params.u_max;
    -half * sign(sigma - params.beta1 * state.sigma_m) - half * sign(sigma - params.beta2 * state.sigma_m)
}

/// Initializing action applied until the first extremum.
#[inline]
pub fn init_step(sigma: f64, state: &ControllerState, u_max: f64) -> f64 {
    -u_max * sign(sigma - state.sigma0)
}

/// Feeds one sample into the extremum detector.
///
/// An excursion reverses once sigma retreats from the held peak by more than
/// `hysteresis`; the held peak then becomes `sigma_m` and the phase switches to
/// [`Phase::Running`]. With zero hysteresis any strict reversal counts.
pub fn update_extremum(sigma: f64, state: &ControllerState, hysteresis: f64) -> ControllerState {
    let mut next = *state;
    next.last_sigma = sigma;
    if state.last_dsigma_sign > 0.0 {
        if sigma > state.candidate {
            next.candidate = sigma;
        } else if state.candidate - sigma > hysteresis {
            next.sigma_m = state.candidate;
            next.phase = Phase::Running;
            next.last_dsigma_sign = -1.0;
            next.candidate = sigma;
        }
    } else if state.last_dsigma_sign < 0.0 {
        if sigma < state.candidate {
            next.candidate = sigma;
        } else if sigma - state.candidate > hysteresis {
            next.sigma_m = state.candidate;
            next.phase = Phase::Running;
            next.last_dsigma_sign = 1.0;
            next.candidate = sigma;
        }
    } else if sigma - state.candidate > hysteresis {
        next.last_dsigma_sign = 1.0;
        next.candidate = sigma;
    } else if state.candidate - sigma > hysteresis {
        next.last_dsigma_sign = -1.0;
        next.candidate = sigma;
    }
    next
}

/// Selection of switching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    Terminal { u_max: f64 },
    SubOptimal(SubOptimalParams),
    EnergySaving(EnergySavingParams),
}

impl ControlLaw {
    pub fn u_max(&self) -> f64 {
        match self {
            ControlLaw::Terminal { u_max } => *u_max,
            ControlLaw::SubOptimal(p) => p.u_max,
            ControlLaw::EnergySaving(p) => p.u_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ControlLaw::Terminal { u_max } => require(*u_max > 0.0 && u_max.is_finite(), "u_max", *u_max, "U > 0"),
            ControlLaw::SubOptimal(p) => p.validate(),
            ControlLaw::EnergySaving(p) => p.validate(),
        }
    }
}

/// A control law bound to its run-local memory.
#[derive(Debug, Clone)]
pub struct Controller {
    law: ControlLaw,
    hysteresis: f64,
    state: Option<ControllerState>,
}

impl Controller {
    pub fn new(law: ControlLaw, hysteresis: f64) -> Result<Self> {
        law.validate()?;
        require(hysteresis >= 0.0 && hysteresis.is_finite(), "hysteresis", hysteresis, "hysteresis >= 0")?;
        Ok(Self {
            law,
            hysteresis,
            state: None,
        })
    }

    pub fn law(&self) -> &ControlLaw {
        &self.law
    }

    pub fn state(&self) -> Option<&ControllerState> {
        self.state.as_ref()
    }

    /// Consumes one sigma sample and returns the switching control `u_sm`.
    /// The first sample fixes `sigma(0)`.
    pub fn step(&mut self, sigma: f64) -> f64 {
        let state = match self.state {
            None => ControllerState::new(sigma),
            Some(s) => update_extremum(sigma, &s, self.hysteresis),
        };
        self.state = Some(state);
        match (&self.law, state.phase) {
            (ControlLaw::Terminal { u_max }, _) => terminal_step(sigma, *u_max),
            (law, Phase::Initializing) => init_step(sigma, &state, law.u_max()),
            (ControlLaw::SubOptimal(p), Phase::Running) => suboptimal_step(sigma, &state, p),
            (ControlLaw::EnergySaving(p), Phase::Running) => energy_saving_step(sigma, &state, p),
        }
    }
}

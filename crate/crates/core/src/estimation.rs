//! Velocity reconstruction from noisy position: backward difference
//! followed by a critically damped second-order low-pass filter
//! `w'' + 2 wc w' + wc^2 w = wc^2 r`.

use core::f64::consts::PI;

use crate::error::{require, Error, Result};

/// Largest `dt * omega_c` accepted by a single filter step.
pub const STABILITY_LIMIT: f64 = 0.5;

#[inline]
pub fn differentiate(x_now: f64, x_prev: f64, dt: f64) -> f64 {
    (x_now - x_prev) / dt
}

/// Approximate 1% settling time `4.6 / omega_c` of the filter.
pub fn settling_time(cutoff_hz: f64) -> f64 {
    4.6 / (2.0 * PI * cutoff_hz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpfState {
    /// Filtered velocity (m/s).
    pub w: f64,
    /// Rate of the filtered velocity (m/s^2).
    pub w_rate: f64,
    pub cutoff_hz: f64,
    /// Previous measured position, `None` before the first sample.
    pub last_x: Option<f64>,
}

impl LpfState {
    pub fn new(cutoff_hz: f64) -> Result<Self> {
        require(cutoff_hz > 0.0 && cutoff_hz.is_finite(), "cutoff_hz", cutoff_hz, "f_c > 0")?;
        Ok(Self {
            w: 0.0,
            w_rate: 0.0,
            cutoff_hz,
            last_x: None,
        })
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.cutoff_hz
    }
}

/// One four-stage step of the filter with `raw_velocity` held over `dt`.
pub fn lpf_step(state: &LpfState, raw_velocity: f64, dt: f64) -> Result<LpfState> {
    let wc = state.omega();
    let product = dt * wc;
    if !(product < STABILITY_LIMIT) || dt <= 0.0 {
        return Err(Error::UnstableFilter { product });
    }
    let f = |w: f64, wr: f64| (wr, wc * wc * (raw_velocity - w) - 2.0 * wc * wr);
    let (w, wr) = (state.w, state.w_rate);
    let (a1, b1) = f(w, wr);
    let (a2, b2) = f(w + 0.5 * dt * a1, wr + 0.5 * dt * b1);
    let (a3, b3) = f(w + 0.5 * dt * a2, wr + 0.5 * dt * b2);
    let (a4, b4) = f(w + dt * a3, wr + dt * b3);
    Ok(LpfState {
        w: w + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        w_rate: wr + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
        ..*state
    })
}

/// Backward difference plus filter, stepped at the control rate with a fixed
/// number of filter substeps per sample.
#[derive(Debug, Clone)]
pub struct VelocityEstimator {
    state: LpfState,
    dt: f64,
    substeps: u32,
}

impl VelocityEstimator {
    pub fn new(cutoff_hz: f64, dt: f64, substeps: u32) -> Result<Self> {
        let state = LpfState::new(cutoff_hz)?;
        require(dt > 0.0 && dt.is_finite(), "dt", dt, "dt > 0")?;
        require(substeps >= 1, "lpf_substeps", substeps as f64, ">= 1")?;
        let product = dt / substeps as f64 * state.omega();
        if !(product < STABILITY_LIMIT) {
            return Err(Error::UnstableFilter { product });
        }
        Ok(Self { state, dt, substeps })
    }

    pub fn state(&self) -> &LpfState {
        &self.state
    }

    /// Feeds a position sample and returns the filtered velocity.
    /// The first sample only primes the difference.
    pub fn update(&mut self, x: f64) -> f64 {
        let raw = match self.state.last_x {
            Some(prev) => differentiate(x, prev, self.dt),
            None => 0.0,
        };
        self.state.last_x = Some(x);
        self.filter(raw)
    }

    /// Feeds a raw velocity directly, bypassing the difference stage.
    pub fn filter(&mut self, raw_velocity: f64) -> f64 {
        let h = self.dt / self.substeps as f64;
        for _ in 0..self.substeps {
            // stability was checked at construction
            self.state = lpf_step(&self.state, raw_velocity, h).expect("filter step within stability bound");
        }
        self.state.w
    }

    /// Standard deviation of the filtered velocity produced by white position
    /// noise of standard deviation `sensor_std`, from the impulse response of
    /// the whole difference-plus-filter chain.
    pub fn noise_gain(cutoff_hz: f64, dt: f64, substeps: u32) -> Result<f64> {
        let mut est = Self::new(cutoff_hz, dt, substeps)?;
        est.update(0.0);
        let horizon = libm::ceil(60.0 / (2.0 * PI * cutoff_hz * dt)) as usize + 10;
        let mut energy = 0.0;
        let mut x = 1.0;
        for _ in 0..horizon {
            let w = est.update(x);
            energy += w * w;
            x = 0.0;
        }
        Ok(libm::sqrt(energy))
    }
}

/// Time after which the unit-step response of the filter stays within
/// `tolerance` of 1, simulated at sample period `dt` with `substeps`.
pub fn measured_settling_time(cutoff_hz: f64, dt: f64, substeps: u32, tolerance: f64) -> Result<f64> {
    let mut est = VelocityEstimator::new(cutoff_hz, dt, substeps)?;
    let horizon = libm::ceil(20.0 * settling_time(cutoff_hz) / dt) as usize + 2;
    let mut last_outside = 0usize;
    for k in 1..=horizon {
        let w = est.filter(1.0);
        if (1.0 - w).abs() >= tolerance {
            last_outside = k;
        }
    }
    Ok(last_outside as f64 * dt)
}

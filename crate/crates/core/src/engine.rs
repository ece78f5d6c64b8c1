//! Closed-loop simulation: zero-order-hold control at the sampling rate,
//! plant substeps, tracing and run summaries.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::controllers::{ControlLaw, Controller, EnergySavingParams, SubOptimalParams};
use crate::error::{require, Error, Result};
use crate::estimation::VelocityEstimator;
use crate::plant::{measure, plant_step, Disturbance, DisturbanceModel, PlantParams, PlantState};
use crate::surface::SurfaceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Terminal,
    SubOptimal,
    EnergySaving,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::Terminal => "terminal",
            ControllerKind::SubOptimal => "sub_optimal",
            ControllerKind::EnergySaving => "energy_saving",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "terminal" => Some(ControllerKind::Terminal),
            "sub_optimal" | "suboptimal" => Some(ControllerKind::SubOptimal),
            "energy_saving" => Some(ControllerKind::EnergySaving),
            _ => None,
        }
    }
}

/// Controller selection and the parameters of every law. Only the fields
/// of the selected `kind` are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    /// Surface shape parameter.
    pub alpha: f64,
    /// Switching amplitude U (V).
    pub u_max: f64,
    pub beta: f64,
    pub gamma_star: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Extremum detector band (m). `None` uses twice the sensor noise
    /// standard deviation.
    pub hysteresis: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kind: ControllerKind::EnergySaving,
            alpha: 1.2,
            u_max: 0.8,
            beta: 0.85,
            gamma_star: 1.0,
            beta1: 0.85,
            beta2: 0.1,
            hysteresis: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Control period (s).
    pub dt_control: f64,
    /// Plant integration steps per control period.
    pub substeps: u32,
    pub duration: f64,
    /// Reference position x_r (m).
    pub reference: f64,
    pub initial_position: f64,
    pub initial_velocity: f64,
    pub controller: ControllerConfig,
    pub plant: PlantParams,
    pub disturbance: DisturbanceModel,
    pub noise_seed: u64,
    pub lpf_cutoff: f64,
    pub lpf_substeps: u32,
    /// Convergence band around x_r (m).
    pub tolerance_band: f64,
    /// Time the position must stay inside the band (s).
    pub dwell: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_control: 1e-4,
            substeps: 4,
            duration: 1.5,
            reference: 0.015,
            initial_position: 0.0,
            initial_velocity: 0.0,
            controller: ControllerConfig::default(),
            plant: PlantParams::default(),
            disturbance: DisturbanceModel::default(),
            noise_seed: 0,
            lpf_cutoff: 1000.0,
            lpf_substeps: 4,
            tolerance_band: 2e-4,
            dwell: 0.2,
        }
    }
}

impl SimConfig {
    pub fn surface(&self) -> SurfaceSpec {
        SurfaceSpec {
            alpha: self.controller.alpha,
            u_max: self.controller.u_max,
            mass: self.plant.mass,
            input_gain: self.plant.input_gain,
            reference: self.reference,
        }
    }

    /// Disturbance bound expressed in control units, `D / K`.
    pub fn disturbance_in_control_units(&self) -> f64 {
        self.plant.disturbance_bound / self.plant.input_gain
    }

    pub fn control_law(&self) -> ControlLaw {
        let c = &self.controller;
        match c.kind {
            ControllerKind::Terminal => ControlLaw::Terminal { u_max: c.u_max },
            ControllerKind::SubOptimal => ControlLaw::SubOptimal(SubOptimalParams {
                beta: c.beta,
                gamma_star: c.gamma_star,
                u_max: c.u_max,
            }),
            ControllerKind::EnergySaving => ControlLaw::EnergySaving(EnergySavingParams {
                beta1: c.beta1,
                beta2: c.beta2,
                u_max: c.u_max,
                disturbance_bound: self.disturbance_in_control_units(),
            }),
        }
    }

    /// Number of control samples in the run.
    pub fn samples(&self) -> usize {
        libm::round(self.duration / self.dt_control) as usize
    }

    /// Detector band: the configured one, else twice the sensor noise
    /// propagated through the surface linearized at rest, where
    /// `d sigma / d x1 = 1` and `d sigma / d x2 = 0`.
    pub fn hysteresis(&self) -> f64 {
        self.controller.hysteresis.unwrap_or(2.0 * self.plant.sensor_noise_std)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.dt_control > 0.0 && self.dt_control.is_finite(), "dt_control", self.dt_control, "> 0")?;
        require(self.substeps >= 1, "substeps", self.substeps as f64, ">= 1")?;
        require(self.duration > 0.0 && self.duration.is_finite(), "duration", self.duration, "> 0")?;
        require(self.tolerance_band > 0.0, "tolerance_band", self.tolerance_band, "> 0")?;
        require(self.dwell >= 0.0, "dwell", self.dwell, ">= 0")?;
        require(self.duration >= self.dwell, "duration", self.duration, "duration >= dwell")?;
        require(self.initial_position.is_finite(), "initial_position", self.initial_position, "finite")?;
        require(self.initial_velocity.is_finite(), "initial_velocity", self.initial_velocity, "finite")?;
        self.plant.validate()?;
        self.surface().validate()?;
        self.disturbance.validate()?;
        self.control_law().validate()?;
        VelocityEstimator::new(self.lpf_cutoff, self.dt_control, self.lpf_substeps)?;
        Ok(())
    }
}

/// One control sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x_measured: f64,
    pub x_true: f64,
    pub velocity_true: f64,
    /// Filtered velocity estimate.
    pub w: f64,
    pub sigma: f64,
    pub sigma_m: f64,
    /// Total applied input `u_sm + u_gr` (V).
    pub u: f64,
    /// Switching component of the input (V).
    pub u_sm: f64,
    /// Actuator force (N).
    pub v: f64,
    /// Disturbance force (N).
    pub d: f64,
    /// Energy accumulated through the end of this sample (V s).
    pub energy: f64,
}

impl TraceRecord {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "x_measured",
        "x_true",
        "velocity_true",
        "w",
        "sigma",
        "sigma_m",
        "u",
        "u_sm",
        "v",
        "d",
        "energy",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.t,
            self.x_measured,
            self.x_true,
            self.velocity_true,
            self.w,
            self.sigma,
            self.sigma_m,
            self.u,
            self.u_sm,
            self.v,
            self.d,
            self.energy,
        ]
    }

    pub fn from_values(v: [f64; 12]) -> Self {
        Self {
            t: v[0],
            x_measured: v[1],
            x_true: v[2],
            velocity_true: v[3],
            w: v[4],
            sigma: v[5],
            sigma_m: v[6],
            u: v[7],
            u_sm: v[8],
            v: v[9],
            d: v[10],
            energy: v[11],
        }
    }
}

/// Timing and evaluation settings a trace was produced with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMeta {
    pub dt: f64,
    pub reference: f64,
    pub u_max: f64,
    pub tolerance_band: f64,
    pub dwell: f64,
    pub sensor_noise_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

impl SimTrace {
    pub fn duration(&self) -> f64 {
        self.records.len() as f64 * self.meta.dt
    }

    /// Index of the first record in the final dwell window.
    pub fn dwell_start(&self) -> usize {
        let n = libm::round(self.meta.dwell / self.meta.dt) as usize;
        self.records.len().saturating_sub(n.max(1))
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.energy)
    }

    /// Start of the first window of `dwell` length in which the true position
    /// stays within the band, if any.
    pub fn convergence_time(&self) -> Option<f64> {
        let need = libm::round(self.meta.dwell / self.meta.dt) as usize;
        let mut run_start = None;
        for (i, r) in self.records.iter().enumerate() {
            if (r.x_true - self.meta.reference).abs() < self.meta.tolerance_band {
                let start = *run_start.get_or_insert(i);
                if i + 1 - start >= need.max(1) {
                    return Some(self.records[start].t);
                }
            } else {
                run_start = None;
            }
        }
        None
    }
}

/// Scalar metrics of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    /// `None` when no dwell window stayed inside the band.
    pub convergence_time: Option<f64>,
    pub energy: f64,
    /// Max `|x - x_r|` over the final dwell.
    pub steady_state_error: f64,
    /// Fraction of samples with `u_sm != 0`.
    pub control_on_fraction: f64,
    /// Half peak-to-peak of the true position over the final dwell.
    pub residual_amplitude: f64,
    /// Residual oscillation larger than the sensor noise floor.
    pub chattering_detectable: bool,
    pub duration: f64,
}

impl RunSummary {
    pub fn converged(&self) -> bool {
        self.convergence_time.is_some()
    }

    pub fn from_trace(trace: &SimTrace) -> Self {
        let n = trace.records.len();
        let tail = &trace.records[trace.dwell_start()..];
        let steady_state_error = tail
            .iter()
            .map(|r| (r.x_true - trace.meta.reference).abs())
            .fold(0.0, f64::max);
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.x_true), hi.max(r.x_true)));
        let residual_amplitude = if tail.is_empty() { 0.0 } else { 0.5 * (hi - lo) };
        let on = trace.records.iter().filter(|r| r.u_sm != 0.0).count();
        Self {
            convergence_time: trace.convergence_time(),
            energy: trace.final_energy(),
            steady_state_error,
            control_on_fraction: if n == 0 { 0.0 } else { on as f64 / n as f64 },
            residual_amplitude,
            chattering_detectable: residual_amplitude > trace.meta.sensor_noise_std,
            duration: trace.duration(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: SimTrace,
    pub summary: RunSummary,
}

/// Executes one closed-loop run.
///
/// Each control sample: measure, estimate velocity, shift to `x - x_r`,
/// evaluate sigma, step the controller, add `u_gr`, hold the input over the
/// period while the plant advances `substeps` times. Energy integrates
/// `|u_sm|` with the rectangle rule.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let dt = config.dt_control;
    let h = dt / config.substeps as f64;
    let surface = config.surface();
    let plant = &config.plant;

    let mut controller = Controller::new(config.control_law(), config.hysteresis())?;
    let mut estimator = VelocityEstimator::new(config.lpf_cutoff, dt, config.lpf_substeps)?;
    let mut disturbance = Disturbance::new(config.disturbance.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.noise_seed);
    let mut state = PlantState {
        position: config.initial_position,
        velocity: config.initial_velocity,
        force: 0.0,
    };

    let n = config.samples();
    let mut records = Vec::with_capacity(n);
    let mut energy = 0.0;
    for k in 0..n {
        let t = k as f64 * dt;
        let x_measured = measure(&state, plant, &mut rng);
        let w = estimator.update(x_measured);
        let sigma = surface.sigma(x_measured - config.reference, w);
        if !sigma.is_finite() {
            return Err(Error::NonFinite { t });
        }
        let u_sm = controller.step(sigma);
        let u = u_sm + plant.gravity_comp;
        energy += u_sm.abs() * dt;

        disturbance.advance(u_sm, dt);
        records.push(TraceRecord {
            t,
            x_measured,
            x_true: state.position,
            velocity_true: state.velocity,
            w,
            sigma,
            sigma_m: controller.state().map_or(sigma, |s| s.sigma_m),
            u,
            u_sm,
            v: state.force,
            d: disturbance.eval(state.position),
            energy,
        });
        for _ in 0..config.substeps {
            state = plant_step(&state, u, plant, h, |x| disturbance.eval(x)).map_err(|_| Error::NonFinite { t })?;
        }
    }

    let trace = SimTrace {
        meta: TraceMeta {
            dt,
            reference: config.reference,
            u_max: config.controller.u_max,
            tolerance_band: config.tolerance_band,
            dwell: config.dwell,
            sensor_noise_std: plant.sensor_noise_std,
        },
        records,
    };
    let summary = RunSummary::from_trace(&trace);
    Ok(RunOutput { trace, summary })
}

/// Runs independent configurations in order; a failing run does not stop the
/// others.
pub fn sweep(configs: &[SimConfig]) -> Vec<Result<RunSummary>> {
    configs.iter().map(|c| run(c).map(|o| o.summary)).collect()
}

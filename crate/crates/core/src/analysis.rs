//! Chattering prediction by harmonic balance, empirical threshold tuning
//! over the admissible triangle, and two-run comparison reports.

use alloc::vec::Vec;

use crate::controllers::feasibility_check;
use crate::engine::{sweep, ControllerKind, RunSummary, SimConfig, SimTrace};
use crate::error::{require, Error, Result};
use crate::plant::DisturbanceModel;

/// Harmonic-balance estimate of the steady oscillation caused by the
/// first-order actuator lag under the energy-saving law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatteringPrediction {
    /// Oscillation frequency (rad/s).
    pub omega: f64,
    pub amplitude_sigma: f64,
    /// Position amplitude. Near the origin the quadratic velocity term of the
    /// surface vanishes, so this equals `amplitude_sigma`.
    pub amplitude_x: f64,
}

pub fn predict_chattering(mu: f64, beta1: f64, beta2: f64) -> Result<ChatteringPrediction> {
    require(mu > 0.0 && mu.is_finite(), "mu", mu, "mu > 0")?;
    require(beta1.abs() < 1.0, "beta1", beta1, "|beta1| < 1")?;
    require(beta2.abs() < 1.0, "beta2", beta2, "|beta2| < 1")?;
    require(beta1 + beta2 > 0.0, "beta1 + beta2", beta1 + beta2, "beta1 + beta2 > 0")?;
    let omega = (beta1 + beta2) / (mu * (libm::sqrt(1.0 - beta1 * beta1) + libm::sqrt(1.0 - beta2 * beta2)));
    let q = mu * mu * omega * omega + 1.0;
    let amplitude_sigma = libm::sqrt(q) / (omega * omega * q);
    Ok(ChatteringPrediction {
        omega,
        amplitude_sigma,
        amplitude_x: amplitude_sigma,
    })
}

/// Oscillation measured on a window of a signal.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Oscillation {
    /// Half peak-to-peak.
    pub amplitude: f64,
    /// Angular frequency from the mean zero-crossing interval (rad/s); zero
    /// when fewer than two crossings occur.
    pub omega: f64,
    pub crossings: usize,
}

/// Zero-crossing analysis of `samples` (mean removed) taken every `dt`.
pub fn oscillation(samples: &[f64], dt: f64) -> Oscillation {
    if samples.is_empty() {
        return Oscillation::default();
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let mut crossings = Vec::new();
    let mut prev = samples[0] - mean;
    for (i, &s) in samples.iter().enumerate().skip(1) {
        let cur = s - mean;
        if (prev < 0.0 && cur >= 0.0) || (prev >= 0.0 && cur < 0.0) {
            crossings.push(i);
        }
        prev = cur;
    }
    let omega = if crossings.len() >= 2 {
        let span = (crossings[crossings.len() - 1] - crossings[0]) as f64 * dt;
        let half_period = span / (crossings.len() - 1) as f64;
        core::f64::consts::PI / half_period
    } else {
        0.0
    };
    Oscillation {
        amplitude: 0.5 * (hi - lo),
        omega,
        crossings: crossings.len(),
    }
}

/// Residual oscillation of sigma over the final dwell of a trace.
pub fn residual_oscillation(trace: &SimTrace) -> Oscillation {
    let tail: Vec<f64> = trace.records[trace.dwell_start()..].iter().map(|r| r.sigma).collect();
    oscillation(&tail, trace.meta.dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detectability {
    Detectable,
    NotDetectable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedSample {
    pub t: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub energy_a: f64,
    pub energy_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub series: Vec<AlignedSample>,
    pub summary_a: RunSummary,
    pub summary_b: RunSummary,
    /// `E_a - E_b` at the end of the runs.
    pub delta_energy: f64,
    /// `t_a - t_b`, when both converged.
    pub delta_convergence_time: Option<f64>,
    pub delta_steady_state_error: f64,
    pub residual_a: Oscillation,
    pub residual_b: Oscillation,
    pub prediction: Option<ChatteringPrediction>,
    pub chattering: Detectability,
}

/// Aligns two traces sample by sample and reports their differences.
///
/// The chattering verdict compares the predicted position amplitude (or,
/// without a prediction, the larger measured residual) with the sensor
/// noise standard deviation.
pub fn compare_runs(
    a: &SimTrace,
    b: &SimTrace,
    prediction: Option<ChatteringPrediction>,
) -> Result<ComparisonReport> {
    if a.meta.dt != b.meta.dt || a.records.len() != b.records.len() {
        return Err(Error::MismatchedTiming);
    }
    let series = a
        .records
        .iter()
        .zip(&b.records)
        .map(|(ra, rb)| AlignedSample {
            t: ra.t,
            x_a: ra.x_true,
            x_b: rb.x_true,
            energy_a: ra.energy,
            energy_b: rb.energy,
        })
        .collect();
    let summary_a = RunSummary::from_trace(a);
    let summary_b = RunSummary::from_trace(b);
    let noise = a.meta.sensor_noise_std.max(b.meta.sensor_noise_std);
    let amplitude = match prediction {
        Some(p) => p.amplitude_x,
        None => summary_a.residual_amplitude.max(summary_b.residual_amplitude),
    };
    let chattering = if amplitude < noise {
        Detectability::NotDetectable
    } else {
        Detectability::Detectable
    };
    Ok(ComparisonReport {
        series,
        delta_energy: summary_a.energy - summary_b.energy,
        delta_convergence_time: match (summary_a.convergence_time, summary_b.convergence_time) {
            (Some(ta), Some(tb)) => Some(ta - tb),
            _ => None,
        },
        delta_steady_state_error: summary_a.steady_state_error - summary_b.steady_state_error,
        summary_a,
        summary_b,
        residual_a: residual_oscillation(a),
        residual_b: residual_oscillation(b),
        prediction,
        chattering,
    })
}

/// Settings of the empirical threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningRequest {
    /// Keep `beta1` fixed and search `beta2` only.
    pub beta1_fixed: Option<f64>,
    /// Grid points per axis.
    pub resolution: usize,
    /// Multiplier on the baseline convergence time in the hard constraint
    /// `J < slack * J_hat`.
    pub slack: f64,
    /// Optional ceiling on the baseline convergence time.
    pub j_hat_max: Option<f64>,
}

impl Default for TuningRequest {
    fn default() -> Self {
        Self {
            beta1_fixed: None,
            resolution: 21,
            slack: 1.0,
            j_hat_max: None,
        }
    }
}

/// Metrics of one evaluated `(beta1, beta2)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningCell {
    pub beta1: f64,
    pub beta2: f64,
    /// Empirical convergence time; `None` if the run did not converge.
    pub j_emp: Option<f64>,
    pub energy: f64,
    /// Baseline (`beta2 = beta1`) convergence time for the same `beta1`.
    pub j_hat: Option<f64>,
    pub meets_constraint: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub beta1: f64,
    pub beta2: f64,
    pub j_emp: f64,
    pub j_hat: f64,
    pub energy: f64,
    pub cells: Vec<TuningCell>,
}

/// Feasible `(beta1, beta2)` grid for the disturbance ratio `D/U`.
///
/// With `beta1` fixed, `beta2` is spread strictly inside
/// `(max(-1, 2D/U - beta1), beta1)`. Otherwise `beta1` takes `i / n` for
/// `i < n` and `beta2` takes interior points of `(-1, 1)`; infeasible cells
/// are dropped.
pub fn tuning_grid(ratio: f64, request: &TuningRequest) -> Vec<(f64, f64)> {
    let n = request.resolution;
    let mut cells = Vec::new();
    match request.beta1_fixed {
        Some(b1) => {
            let lo = (2.0 * ratio - b1).max(-1.0);
            for j in 0..n {
                let b2 = lo + (b1 - lo) * (j + 1) as f64 / (n + 1) as f64;
                cells.push((b1, b2));
            }
        }
        None => {
            for i in 0..n {
                let b1 = i as f64 / n as f64;
                for j in 0..n {
                    let b2 = -1.0 + 2.0 * (j + 1) as f64 / (n + 1) as f64;
                    cells.push((b1, b2));
                }
            }
        }
    }
    cells.retain(|&(b1, b2)| feasibility_check(b1, b2, ratio, 1.0).is_feasible());
    cells
}

/// Noise-free, worst-case-disturbance energy-saving run for one cell.
pub fn tuning_config(template: &SimConfig, beta1: f64, beta2: f64) -> SimConfig {
    let mut c = template.clone();
    c.plant.sensor_noise_std = 0.0;
    c.disturbance = DisturbanceModel::worst_case(template.plant.disturbance_bound);
    c.controller.kind = ControllerKind::EnergySaving;
    c.controller.beta1 = beta1;
    c.controller.beta2 = beta2;
    c
}

/// Baseline for a given `beta1`: the sub-optimal law with `beta = beta1`,
/// which is the energy-saving law on its `beta2 = beta1` edge.
pub fn baseline_config(template: &SimConfig, beta1: f64) -> SimConfig {
    let mut c = tuning_config(template, beta1, beta1);
    c.controller.kind = ControllerKind::SubOptimal;
    c.controller.beta = beta1;
    c.controller.gamma_star = 1.0;
    c
}

pub fn tune_thresholds(template: &SimConfig, request: &TuningRequest) -> Result<TuningResult> {
    tune_thresholds_with(template, request, sweep)
}

/// Same as [`tune_thresholds`] with a caller-provided runner for the batch of
/// simulations (for example a parallel one). The runner must return results
/// in input order.
pub fn tune_thresholds_with<F>(template: &SimConfig, request: &TuningRequest, runner: F) -> Result<TuningResult>
where
    F: FnOnce(&[SimConfig]) -> Vec<Result<RunSummary>>,
{
    template.validate()?;
    let u = template.controller.u_max;
    let ratio = template.disturbance_in_control_units() / u;
    require(ratio < 1.0, "D/U", ratio, "D < U")?;
    require(request.resolution >= 3, "resolution", request.resolution as f64, ">= 3")?;
    require(request.slack > 0.0, "slack", request.slack, "> 0")?;
    if let Some(b1) = request.beta1_fixed {
        require((0.0..1.0).contains(&b1), "beta1", b1, "0 <= beta1 < 1")?;
    }

    let grid = tuning_grid(ratio, request);
    let mut beta1s: Vec<f64> = grid.iter().map(|c| c.0).collect();
    beta1s.dedup();

    let mut configs: Vec<SimConfig> = beta1s.iter().map(|&b1| baseline_config(template, b1)).collect();
    configs.extend(grid.iter().map(|&(b1, b2)| tuning_config(template, b1, b2)));
    let results = runner(&configs);
    let (baselines, evaluated) = results.split_at(beta1s.len());

    let mut cells = Vec::with_capacity(grid.len());
    for (&(beta1, beta2), result) in grid.iter().zip(evaluated) {
        let idx = beta1s.iter().position(|&b| b == beta1).expect("beta1 from grid");
        let j_hat = baselines[idx].as_ref().ok().and_then(|s| s.convergence_time);
        let (j_emp, energy) = match result {
            Ok(s) => (s.convergence_time, s.energy),
            Err(_) => (None, f64::INFINITY),
        };
        let j_hat_ok = match (j_hat, request.j_hat_max) {
            (Some(jh), Some(max)) => jh < max,
            _ => true,
        };
        // a baseline that never converges is beaten by any converging cell
        let meets_constraint = j_hat_ok
            && match (j_emp, j_hat) {
                (Some(j), Some(jh)) => j < request.slack * jh,
                (Some(_), None) => true,
                (None, _) => false,
            };
        cells.push(TuningCell {
            beta1,
            beta2,
            j_emp,
            energy,
            j_hat,
            meets_constraint,
        });
    }

    let best = cells
        .iter()
        .filter(|c| c.meets_constraint)
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .copied()
        .ok_or(Error::NoImprovingPair)?;
    Ok(TuningResult {
        beta1: best.beta1,
        beta2: best.beta2,
        j_emp: best.j_emp.unwrap_or(f64::INFINITY),
        j_hat: best.j_hat.unwrap_or(f64::INFINITY),
        energy: best.energy,
        cells,
    })
}

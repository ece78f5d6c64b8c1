//! Run configuration file: TOML with the sections `plant`, `controller`,
//! `simulation`, `disturbance` and `output`, plus optional `benchmark` and
//! `tune` sections for the matching subcommands.
//!
//! Every field is addressable by a dotted key (`controller.beta2`) for
//! command-line overrides. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use smc_bench_core::analysis::TuningRequest;
use smc_bench_core::engine::{ControllerConfig, ControllerKind, SimConfig};
use smc_bench_core::plant::{DisturbanceKind, DisturbanceModel, PlantParams};
use toml::{Table, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub mass: f64,
    pub input_gain: f64,
    pub gravity: f64,
    pub actuator_tau: f64,
    pub disturbance_bound: f64,
    pub sensor_noise_std: f64,
    pub gravity_comp: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        let p = PlantParams::default();
        Self {
            mass: p.mass,
            input_gain: p.input_gain,
            gravity: p.gravity,
            actuator_tau: p.actuator_tau,
            disturbance_bound: p.disturbance_bound,
            sensor_noise_std: p.sensor_noise_std,
            gravity_comp: p.gravity_comp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub kind: String,
    pub alpha: f64,
    pub u_max: f64,
    pub beta: f64,
    pub gamma_star: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub hysteresis: Option<f64>,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let c = ControllerConfig::default();
        Self {
            kind: c.kind.name().to_string(),
            alpha: c.alpha,
            u_max: c.u_max,
            beta: c.beta,
            gamma_star: c.gamma_star,
            beta1: c.beta1,
            beta2: c.beta2,
            hysteresis: c.hysteresis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub dt_control: f64,
    pub substeps: u32,
    pub duration: f64,
    pub reference: f64,
    pub initial_position: f64,
    pub initial_velocity: f64,
    pub seed: u64,
    pub lpf_cutoff: f64,
    pub lpf_substeps: u32,
    pub tolerance_band: f64,
    pub dwell: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            dt_control: s.dt_control,
            substeps: s.substeps,
            duration: s.duration,
            reference: s.reference,
            initial_position: s.initial_position,
            initial_velocity: s.initial_velocity,
            seed: s.noise_seed,
            lpf_cutoff: s.lpf_cutoff,
            lpf_substeps: s.lpf_substeps,
            tolerance_band: s.tolerance_band,
            dwell: s.dwell,
        }
    }
}

/// Disturbance components. The total is clamped to `plant.disturbance_bound`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSection {
    /// `default`, `none` or `worst_case`; `default` sums the components below.
    pub model: String,
    pub seed: u64,
    pub constant: f64,
    pub cogging_amplitude: f64,
    pub cogging_period: f64,
    pub random_bound: f64,
    pub random_bandwidth: f64,
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        Self {
            model: "default".into(),
            seed: 0,
            constant: 0.0,
            cogging_amplitude: 0.6,
            cogging_period: 0.005,
            random_bound: 0.4,
            random_bandwidth: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub run_id: String,
    pub dir: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub baseline: String,
    pub candidate: String,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            baseline: ControllerKind::Terminal.name().into(),
            candidate: ControllerKind::EnergySaving.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    pub beta1: Option<f64>,
    pub grid: usize,
    pub slack: f64,
    pub j_hat_max: Option<f64>,
    /// Sets `plant.disturbance_bound` to `ratio * input_gain * u_max`.
    pub disturbance_ratio: Option<f64>,
}

impl Default for TuneSection {
    fn default() -> Self {
        let r = TuningRequest::default();
        Self {
            beta1: r.beta1_fixed,
            grid: r.resolution,
            slack: r.slack,
            j_hat_max: r.j_hat_max,
            disturbance_ratio: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub plant: PlantSection,
    pub controller: ControllerSection,
    pub simulation: SimulationSection,
    pub disturbance: DisturbanceSection,
    pub output: OutputSection,
    pub benchmark: BenchmarkSection,
    pub tune: TuneSection,
}

impl RunConfigFile {
    /// Reads `path`, applies `overrides` (`key=value`) and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CliError::ConfigNotFound(path.display().to_string()))
            }
            Err(e) => return Err(CliError::Io(e)),
        };
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let file: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
        file.sim_config()?.validate()?;
        Ok(file)
    }

    pub fn controller_kind(&self) -> Result<ControllerKind> {
        parse_kind(&self.controller.kind)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let p = &self.plant;
        let s = &self.simulation;
        let c = &self.controller;
        let plant = PlantParams {
            mass: p.mass,
            input_gain: p.input_gain,
            gravity: p.gravity,
            actuator_tau: p.actuator_tau,
            disturbance_bound: p.disturbance_bound,
            sensor_noise_std: p.sensor_noise_std,
            gravity_comp: p.gravity_comp,
        };
        let disturbance = self.disturbance_model()?;
        Ok(SimConfig {
            dt_control: s.dt_control,
            substeps: s.substeps,
            duration: s.duration,
            reference: s.reference,
            initial_position: s.initial_position,
            initial_velocity: s.initial_velocity,
            controller: ControllerConfig {
                kind: self.controller_kind()?,
                alpha: c.alpha,
                u_max: c.u_max,
                beta: c.beta,
                gamma_star: c.gamma_star,
                beta1: c.beta1,
                beta2: c.beta2,
                hysteresis: c.hysteresis,
            },
            plant,
            disturbance,
            noise_seed: s.seed,
            lpf_cutoff: s.lpf_cutoff,
            lpf_substeps: s.lpf_substeps,
            tolerance_band: s.tolerance_band,
            dwell: s.dwell,
        })
    }

    fn disturbance_model(&self) -> Result<DisturbanceModel> {
        let d = &self.disturbance;
        let bound = self.plant.disturbance_bound;
        let mut model = match d.model.as_str() {
            "none" => DisturbanceModel::none(),
            "worst_case" => DisturbanceModel::worst_case(bound),
            "default" => {
                let mut kinds = Vec::new();
                if d.constant != 0.0 {
                    kinds.push(DisturbanceKind::Constant { bias: d.constant });
                }
                if d.cogging_amplitude != 0.0 {
                    kinds.push(DisturbanceKind::Cogging {
                        amplitude: d.cogging_amplitude,
                        period: d.cogging_period,
                    });
                }
                if d.random_bound != 0.0 {
                    kinds.push(DisturbanceKind::RandomBounded {
                        bound: d.random_bound,
                        bandwidth: d.random_bandwidth,
                    });
                }
                DisturbanceModel { kinds, bound, seed: 0 }
            }
            other => {
                return Err(CliError::Parse(format!(
                    "disturbance.model: unknown model `{other}` (expected default, none or worst_case)"
                )))
            }
        };
        model.seed = d.seed;
        Ok(model)
    }

    pub fn tuning_request(&self) -> TuningRequest {
        TuningRequest {
            beta1_fixed: self.tune.beta1,
            resolution: self.tune.grid,
            slack: self.tune.slack,
            j_hat_max: self.tune.j_hat_max,
        }
    }

    /// Simulation template for tuning, with the disturbance bound taken from
    /// `tune.disturbance_ratio` when set.
    pub fn tuning_template(&self) -> Result<SimConfig> {
        let mut c = self.sim_config()?;
        if let Some(r) = self.tune.disturbance_ratio {
            c.plant.disturbance_bound = r * c.plant.input_gain * c.controller.u_max;
        }
        Ok(c)
    }
}

pub fn parse_kind(name: &str) -> Result<ControllerKind> {
    ControllerKind::from_name(name).ok_or_else(|| {
        CliError::Parse(format!(
            "controller.kind: unknown controller `{name}` (expected terminal, sub_optimal or energy_saving)"
        ))
    })
}

/// Sets `section.key` from a `section.key=value` string. The value is read as
/// a TOML literal and falls back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|l| !l.is_empty());
    let leaf = match leaf {
        Some(l) if !parts.is_empty() => l,
        _ => return Err(CliError::Parse(format!("override key `{key}` must be section.field"))),
    };
    let mut node = table;
    for p in parts {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::Parse(format!("override key `{key}`: `{p}` is not a section"))),
        };
    }
    node.insert(leaf.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let f = RunConfigFile::parse("", &[]).unwrap();
        assert_eq!(f.sim_config().unwrap(), SimConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfigFile::parse("[plant]\nmas = 1.0\n", &[]), Err(CliError::Parse(_))));
        assert!(matches!(RunConfigFile::parse("[plantt]\n", &[]), Err(CliError::Parse(_))));
        assert!(RunConfigFile::parse("", &["controller.betaa=0.3".into()]).is_err());
    }

    #[test]
    fn overrides_take_typed_and_string_values() {
        let f = RunConfigFile::parse(
            "",
            &[
                "controller.kind=terminal".into(),
                "controller.u_max=1.5".into(),
                "simulation.substeps=8".into(),
                "disturbance.model=\"none\"".into(),
            ],
        )
        .unwrap();
        let c = f.sim_config().unwrap();
        assert_eq!(c.controller.kind, ControllerKind::Terminal);
        assert_eq!(c.controller.u_max, 1.5);
        assert_eq!(c.substeps, 8);
        assert_eq!(c.disturbance, DisturbanceModel::none());
    }

    #[test]
    fn integer_literal_for_float_field_is_accepted() {
        let f = RunConfigFile::parse("[controller]\nu_max = 1\n", &[]).unwrap();
        assert_eq!(f.controller.u_max, 1.0);
    }

    #[test]
    fn infeasible_pair_names_the_violated_constraint() {
        let err = RunConfigFile::parse("", &["controller.beta2=0.85".into()]).unwrap_err();
        assert!(err.to_string().contains("β₂ < β₁"), "{err}");
    }

    #[test]
    fn malformed_override_is_rejected() {
        assert!(RunConfigFile::parse("", &["controller.beta".into()]).is_err());
        assert!(RunConfigFile::parse("", &["beta=0.1".into()]).is_err());
        assert!(RunConfigFile::parse("", &["controller.beta.x=0.1".into()]).is_err());
    }

    #[test]
    fn tuning_ratio_sets_the_bound() {
        let f = RunConfigFile::parse("[tune]\ndisturbance_ratio = 0.3\n", &[]).unwrap();
        let t = f.tuning_template().unwrap();
        assert!((t.disturbance_in_control_units() / t.controller.u_max - 0.3).abs() < 1e-12);
    }
}

//! Subcommand bodies shared by the binary and the tests.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use smc_bench_core::analysis::{compare_runs, predict_chattering, tune_thresholds_with, ComparisonReport, TuningResult};
use smc_bench_core::engine::{run, ControllerKind, RunOutput, RunSummary, SimConfig};
use smc_bench_core::Error;

use crate::config::{parse_kind, RunConfigFile};
use crate::error::Result;
use crate::io::{summary_kv, write_file, write_run, KeyValues};

/// Process exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::NotConverged => 2,
        }
    }

    fn from_all(flags: &[bool]) -> Self {
        if flags.iter().all(|&f| f) {
            Outcome::Converged
        } else {
            Outcome::NotConverged
        }
    }
}

/// Runs independent simulations on the rayon pool, keeping input order.
pub fn par_sweep(configs: &[SimConfig]) -> Vec<smc_bench_core::Result<RunSummary>> {
    configs.par_iter().map(|c| run(c).map(|o| o.summary)).collect()
}

pub struct SimulateOutput {
    pub run: RunOutput,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn simulate(file: &RunConfigFile, out_dir: &Path) -> Result<(Outcome, SimulateOutput)> {
    let config = file.sim_config()?;
    let out = run(&config)?;
    let (trace_path, summary_path) = write_run(out_dir, &file.output.run_id, &out.trace, &out.summary)?;
    let outcome = Outcome::from_all(&[out.summary.converged()]);
    Ok((
        outcome,
        SimulateOutput {
            run: out,
            trace_path,
            summary_path,
        },
    ))
}

pub struct BenchmarkOutput {
    pub baseline: RunOutput,
    pub candidate: RunOutput,
    pub report: ComparisonReport,
    /// Contents of the `.report` file.
    pub report_kv: KeyValues,
    pub files: Vec<PathBuf>,
}

fn with_kind(base: &SimConfig, kind: ControllerKind) -> SimConfig {
    let mut c = base.clone();
    c.controller.kind = kind;
    c
}

/// Runs the baseline and candidate controllers on the same plant, seed and
/// initial condition, and writes both runs plus the comparison.
pub fn benchmark(file: &RunConfigFile, out_dir: &Path) -> Result<(Outcome, BenchmarkOutput)> {
    let base = file.sim_config()?;
    let a = with_kind(&base, parse_kind(&file.benchmark.baseline)?);
    let b = with_kind(&base, parse_kind(&file.benchmark.candidate)?);
    a.validate()?;
    b.validate()?;
    let (ra, rb) = rayon::join(|| run(&a), || run(&b));
    let (ra, rb) = (ra?, rb?);

    let es = [&a, &b].into_iter().find(|c| c.controller.kind == ControllerKind::EnergySaving);
    let prediction = match es {
        Some(c) => Some(predict_chattering(c.plant.actuator_tau, c.controller.beta1, c.controller.beta2)?),
        None => None,
    };
    let report = compare_runs(&ra.trace, &rb.trace, prediction)?;

    let id = &file.output.run_id;
    let mut files = Vec::new();
    let (t, s) = write_run(out_dir, &format!("{id}.baseline"), &ra.trace, &ra.summary)?;
    files.extend([t, s]);
    let (t, s) = write_run(out_dir, &format!("{id}.candidate"), &rb.trace, &rb.summary)?;
    files.extend([t, s]);
    files.push(write_file(out_dir, &format!("{id}.compare.csv"), &comparison_csv(&report))?);
    let kv = report_kv(&report, a.controller.kind, b.controller.kind);
    files.push(write_file(out_dir, &format!("{id}.report"), &kv.render())?);

    let outcome = Outcome::from_all(&[ra.summary.converged(), rb.summary.converged()]);
    Ok((
        outcome,
        BenchmarkOutput {
            baseline: ra,
            candidate: rb,
            report,
            report_kv: kv,
            files,
        },
    ))
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("t,x_baseline,x_candidate,energy_baseline,energy_candidate\n");
    for s in &report.series {
        out.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", s.t, s.x_a, s.x_b, s.energy_a, s.energy_b));
    }
    out
}

pub fn report_kv(report: &ComparisonReport, a: ControllerKind, b: ControllerKind) -> KeyValues {
    let mut kv = KeyValues::default();
    kv.push("baseline", a.name());
    kv.push("candidate", b.name());
    for (prefix, s) in [("baseline", &report.summary_a), ("candidate", &report.summary_b)] {
        for (k, v) in summary_kv(s).0 {
            kv.push(&format!("{prefix}.{k}"), v);
        }
    }
    kv.num("delta_energy", report.delta_energy);
    kv.opt("delta_convergence_time", report.delta_convergence_time);
    kv.num("delta_steady_state_error", report.delta_steady_state_error);
    kv.num("baseline.residual_sigma_amplitude", report.residual_a.amplitude);
    kv.num("baseline.residual_sigma_omega", report.residual_a.omega);
    kv.num("candidate.residual_sigma_amplitude", report.residual_b.amplitude);
    kv.num("candidate.residual_sigma_omega", report.residual_b.omega);
    if let Some(p) = report.prediction {
        kv.num("predicted_omega", p.omega);
        kv.num("predicted_amplitude_sigma", p.amplitude_sigma);
        kv.num("predicted_amplitude_x", p.amplitude_x);
    }
    kv.push(
        "chattering",
        match report.chattering {
            smc_bench_core::analysis::Detectability::Detectable => "detectable",
            smc_bench_core::analysis::Detectability::NotDetectable => "not_detectable",
        },
    );
    kv
}

pub fn chatter(mu: f64, beta1: f64, beta2: f64) -> Result<KeyValues> {
    let p = predict_chattering(mu, beta1, beta2)?;
    let mut kv = KeyValues::default();
    kv.num("mu", mu);
    kv.num("beta1", beta1);
    kv.num("beta2", beta2);
    kv.num("omega", p.omega);
    kv.num("amplitude_sigma", p.amplitude_sigma);
    kv.num("amplitude_x", p.amplitude_x);
    Ok(kv)
}

pub struct TuneOutput {
    pub result: TuningResult,
    /// Contents of the `.tune.summary` file.
    pub summary: KeyValues,
    pub files: Vec<PathBuf>,
}

/// Grid search over feasible thresholds. An empty constraint set is reported
/// as a non-converged outcome.
pub fn tune(file: &RunConfigFile, out_dir: &Path) -> Result<(Outcome, Option<TuneOutput>)> {
    let template = file.tuning_template()?;
    let request = file.tuning_request();
    let result = match tune_thresholds_with(&template, &request, par_sweep) {
        Ok(r) => r,
        Err(Error::NoImprovingPair) => {
            eprintln!("{}", Error::NoImprovingPair);
            return Ok((Outcome::NotConverged, None));
        }
        Err(e) => return Err(e.into()),
    };
    let id = &file.output.run_id;
    let mut csv = String::from("beta1,beta2,j_emp,energy,j_hat,meets_constraint\n");
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"));
    for c in &result.cells {
        csv.push_str(&format!(
            "{:e},{:e},{},{:e},{},{}\n",
            c.beta1,
            c.beta2,
            opt(c.j_emp),
            c.energy,
            opt(c.j_hat),
            c.meets_constraint
        ));
    }
    let mut kv = KeyValues::default();
    kv.num("disturbance_ratio", template.disturbance_in_control_units() / template.controller.u_max);
    kv.push("grid", request.resolution.to_string());
    kv.num("slack", request.slack);
    kv.num("beta1", result.beta1);
    kv.num("beta2", result.beta2);
    kv.num("j_emp", result.j_emp);
    kv.num("j_hat", result.j_hat);
    kv.num("energy", result.energy);
    kv.push("cells", result.cells.len().to_string());
    let files = vec![
        write_file(out_dir, &format!("{id}.tune.csv"), &csv)?,
        write_file(out_dir, &format!("{id}.tune.summary"), &kv.render())?,
    ];
    Ok((Outcome::Converged, Some(TuneOutput { result, summary: kv, files })))
}

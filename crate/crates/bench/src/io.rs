//! Trace CSV and summary key=value files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use smc_bench_core::engine::{RunSummary, SimTrace, TraceRecord};

use crate::error::{CliError, Result};

/// Summary values carry 9 significant digits.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn trace_csv(trace: &SimTrace) -> String {
    let mut out = TraceRecord::COLUMNS.join(",");
    out.push('\n');
    for r in &trace.records {
        let row: Vec<String> = r.values().iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != TraceRecord::COLUMNS.join(",") {
        return Err(CliError::Parse(format!("unexpected trace header `{header}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut v = [0.0; 12];
            let mut n = 0;
            for field in line.split(',') {
                if n == 12 {
                    break;
                }
                v[n] = field
                    .parse()
                    .map_err(|_| CliError::Parse(format!("trace row {}: bad number `{field}`", i + 1)))?;
                n += 1;
            }
            if n != 12 || line.split(',').count() != 12 {
                return Err(CliError::Parse(format!("trace row {}: expected 12 fields", i + 1)));
            }
            Ok(TraceRecord::from_values(v))
        })
        .collect()
}

/// Ordered key=value pairs, one per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(pub Vec<(String, String)>);

impl KeyValues {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.push(key, fmt_value(value));
    }

    pub fn opt(&mut self, key: &str, value: Option<f64>) {
        self.push(key, value.map_or_else(|| "none".to_string(), fmt_value));
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

pub fn summary_kv(summary: &RunSummary) -> KeyValues {
    let mut kv = KeyValues::default();
    kv.push("converged", summary.converged().to_string());
    kv.opt("convergence_time", summary.convergence_time);
    kv.num("energy", summary.energy);
    kv.num("steady_state_error", summary.steady_state_error);
    kv.num("control_on_fraction", summary.control_on_fraction);
    kv.num("residual_amplitude", summary.residual_amplitude);
    kv.push("chattering_detectable", summary.chattering_detectable.to_string());
    kv.num("duration", summary.duration);
    kv
}

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| CliError::Parse(format!("summary line `{l}` is not key=value")))
        })
        .collect()
}

pub fn parse_summary(text: &str) -> Result<RunSummary> {
    let map = parse_kv(text)?;
    let get = |k: &str| {
        map.get(k)
            .ok_or_else(|| CliError::Parse(format!("summary missing `{k}`")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|_| CliError::Parse(format!("summary `{k}` is not a number")))
    };
    let flag = |k: &str| -> Result<bool> {
        get(k)?
            .parse()
            .map_err(|_| CliError::Parse(format!("summary `{k}` is not a boolean")))
    };
    let convergence_time = match get("convergence_time")?.as_str() {
        "none" => None,
        _ => Some(num("convergence_time")?),
    };
    Ok(RunSummary {
        convergence_time,
        energy: num("energy")?,
        steady_state_error: num("steady_state_error")?,
        control_on_fraction: num("control_on_fraction")?,
        residual_amplitude: num("residual_amplitude")?,
        chattering_detectable: flag("chattering_detectable")?,
        duration: num("duration")?,
    })
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Writes `{run_id}.trace.csv` and `{run_id}.summary`.
pub fn write_run(dir: &Path, run_id: &str, trace: &SimTrace, summary: &RunSummary) -> Result<(PathBuf, PathBuf)> {
    let t = write_file(dir, &format!("{run_id}.trace.csv"), &trace_csv(trace))?;
    let s = write_file(dir, &format!("{run_id}.summary"), &summary_kv(summary).render())?;
    Ok((t, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use smc_bench_core::engine::{run, SimConfig};

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_value(0.1), "1.00000000e-1");
        assert_eq!(fmt_value(520.2378), "5.20237800e2");
        assert_eq!(fmt_value(-3.1e-6), "-3.10000000e-6");
    }

    #[test]
    fn trace_round_trips_exactly() {
        let mut c = SimConfig::default();
        c.duration = 0.02;
        c.dwell = 0.01;
        let out = run(&c).unwrap();
        let text = trace_csv(&out.trace);
        assert!(text.starts_with("t,x_measured,"));
        assert_eq!(parse_trace_csv(&text).unwrap(), out.trace.records);
    }

    #[test]
    fn summary_without_convergence_round_trips() {
        let mut c = SimConfig::default();
        c.duration = 0.05;
        c.dwell = 0.01;
        let out = run(&c).unwrap();
        assert!(!out.summary.converged());
        let back = parse_summary(&summary_kv(&out.summary).render()).unwrap();
        assert_eq!(back.convergence_time, None);
    }

    #[test]
    fn bad_rows_are_rejected() {
        let header = TraceRecord::COLUMNS.join(",");
        assert!(parse_trace_csv("a,b\n").is_err());
        assert!(parse_trace_csv(&format!("{header}\n1,2,3\n")).is_err());
        assert!(parse_kv("nothing here").is_err());
    }
}

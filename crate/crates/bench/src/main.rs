use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smc_bench::commands::{self, Outcome};
use smc_bench::config::RunConfigFile;
use smc_bench::{Result, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "smc-bench", version, about = "Sliding-mode controller benchmark on a voice-coil plant model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config field, e.g. `--set controller.beta2=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (default: config `output.dir`, then the current directory).
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    /// Sensor-noise seed, same as `--set simulation.seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation.
    Simulate(RunArgs),
    /// Run the baseline and candidate controllers and compare them.
    Benchmark(RunArgs),
    /// Print the predicted chattering frequency and amplitude.
    Chatter {
        #[arg(long, default_value_t = 0.0012)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta1: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta2: f64,
    },
    /// Grid-search the energy-saving thresholds.
    Tune {
        #[command(flatten)]
        run: RunArgs,
        /// Grid points per axis (default: config `tune.grid`, which defaults to 21).
        #[arg(long)]
        grid: Option<usize>,
    },
}

impl RunArgs {
    fn load(&self, extra: &[String]) -> Result<(RunConfigFile, PathBuf)> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("simulation.seed={seed}"));
        }
        overrides.extend_from_slice(extra);
        let file = RunConfigFile::load(&self.config, &overrides)?;
        let dir = self
            .out_dir
            .clone()
            .or_else(|| file.output.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((file, dir))
    }
}

fn print_files<'a>(files: impl IntoIterator<Item = &'a Path>) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Simulate(args) => {
            let (file, dir) = args.load(&[])?;
            let (outcome, out) = commands::simulate(&file, &dir)?;
            print!("{}", smc_bench::io::summary_kv(&out.run.summary).render());
            print_files([out.trace_path.as_path(), out.summary_path.as_path()]);
            Ok(outcome)
        }
        Command::Benchmark(args) => {
            let (file, dir) = args.load(&[])?;
            let (outcome, out) = commands::benchmark(&file, &dir)?;
            print!("{}", out.report_kv.render());
            print_files(out.files.iter().map(PathBuf::as_path));
            Ok(outcome)
        }
        Command::Chatter { mu, beta1, beta2 } => {
            print!("{}", commands::chatter(mu, beta1, beta2)?.render());
            Ok(Outcome::Converged)
        }
        Command::Tune { run, grid } => {
            let extra: Vec<String> = grid.map(|g| format!("tune.grid={g}")).into_iter().collect();
            let (file, dir) = run.load(&extra)?;
            let (outcome, out) = commands::tune(&file, &dir)?;
            if let Some(out) = out {
                print!("{}", out.summary.render());
                print_files(out.files.iter().map(PathBuf::as_path));
            }
            Ok(outcome)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

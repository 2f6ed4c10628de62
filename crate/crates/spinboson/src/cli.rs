//! Command-line interface.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use spinboson_core::model::sample_seeded;

use crate::error::{Error, Result};
use crate::output::Format;
use crate::record::EnsembleRecord;
use crate::runner::{run, RunOptions};
use crate::scenario::{ModelSection, Plan, Scenario};

/// Used when neither `--out-dir`, `SPINBOSON_OUT_DIR` nor the scenario names one.
pub const DEFAULT_OUT_DIR: &str = "spinboson-out";

#[derive(Debug, Parser)]
#[command(name = "spinboson", version, about = "Probe-qubit simulations of a damped two-level-fluctuator environment")]
pub struct Cli {
    /// Seed for the TLF draw (replaces the scenario's seeds).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "SPINBOSON_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Run one scenario point at a time.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file.
    Run { scenario: PathBuf },
    /// Check a scenario file and print the resolved parameters.
    Validate { scenario: PathBuf },
    /// Print a seeded TLF ensemble with its sampling ranges.
    Sample {
        #[arg(long, default_value_t = 4)]
        n_tlf: usize,
        #[arg(long, default_value_t = 3.0)]
        ratio_eps: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        tan_theta_bar: f64,
        #[arg(long, default_value_t = 0.0)]
        nbar: f64,
    },
    /// Run the closed-form oracle suite.
    Oracle,
}

fn plan_for(cli: &Cli, path: &std::path::Path) -> Result<Plan> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        scenario.seeds = Some(vec![seed]);
        scenario.model.seed = seed;
    }
    scenario.resolve()
}

#[derive(Serialize)]
struct Ranges {
    eps: [f64; 2],
    delta: [f64; 2],
    gamma: [f64; 2],
}

#[derive(Serialize)]
struct SampleOutput {
    ranges: Ranges,
    ensemble: EnsembleRecord,
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// Runs the parsed command; the caller maps errors to exit codes.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Validate { scenario } => {
            let plan = plan_for(cli, scenario)?;
            let text = format!("# scenario_hash = {}\n# runs = {}\n{}", plan.hash(), plan.points().len(), plan.toml());
            emit(&text);
            Ok(())
        }
        Command::Run { scenario } => {
            let plan = plan_for(cli, scenario)?;
            let out_dir = cli
                .out_dir
                .clone()
                .or_else(|| plan.output.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
            let opts = RunOptions {
                out_dir,
                format: cli.format,
                deterministic: cli.deterministic,
            };
            let outcome = run(&plan, &opts)?;
            println!(
                "{} runs, {} files in {}",
                outcome.points.len(),
                outcome.record.files.len() + 1,
                outcome.dir.display()
            );
            Ok(())
        }
        Command::Sample {
            n_tlf,
            ratio_eps,
            tan_theta_bar,
            nbar,
        } => {
            let section = ModelSection {
                n_tlf: *n_tlf,
                nbar: *nbar,
                ..ModelSection::default()
            };
            let seed = cli.seed.unwrap_or(section.seed);
            let cfg = section.config(seed, *ratio_eps, *tan_theta_bar, 0.0);
            let s = sample_seeded(&cfg).map_err(|e| Error::model("sample", e))?;
            let out = SampleOutput {
                ranges: Ranges {
                    eps: cfg.eps_range().into(),
                    delta: cfg.delta_range().into(),
                    gamma: [s.ensemble.omega_min / 6.0, s.ensemble.omega_min / 2.0],
                },
                ensemble: EnsembleRecord::new(seed, *ratio_eps, *tan_theta_bar, &s.ensemble, &s.warnings),
            };
            match cli.format {
                Format::Csv => emit(&toml::to_string(&out).expect("serializes")),
                Format::Jsonl => emit(&(serde_json::to_string(&out).expect("serializes") + "\n")),
            }
            Ok(())
        }
        Command::Oracle => {
            let checks = crate::oracle::run_suite();
            let mut failed = 0;
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                println!("{verdict}  {:<40} error {:.3e} (tolerance {:.0e})", c.name, c.error, c.tolerance);
                failed += usize::from(!c.passed());
            }
            if failed > 0 {
                return Err(Error::Numerical {
                    context: "oracle".into(),
                    message: format!("{failed} of {} checks failed", checks.len()),
                });
            }
            Ok(())
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phasepnp::harness::{self, presets, ExperimentConfig, SweepAxis};

/// Plug-and-play ADMM phase retrieval experiments.
#[derive(Parser)]
#[command(name = "phasepnp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate ground truth, operator and measurements into the output directory.
    Simulate(Common),
    /// Reconstruct and write the image, history CSV and summary.
    Run(Common),
    /// Scale lambda or r by 2^-l..2^l and record the final SNR of each run.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lambda")]
        axis: SweepAxis,
        /// Sweep half-width l.
        #[arg(long, default_value_t = 5)]
        levels: u32,
        /// Explicit comma-separated factors, replacing --levels.
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
    },
    /// Run the symmetric and asymmetric multiplier schedules side by side.
    CompareSymmetry(Common),
    /// Inspect the shipped parameter presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print preset names.
    List,
    /// Print a preset's JSON.
    Show { name: String },
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name (see `presets list`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key.path=value`, repeatable; values parse as JSON when possible.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(out) = &self.out {
            let out = serde_json::to_string(&out.display().to_string())?;
            overrides.push(format!("output={out}"));
        }
        let cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path, &overrides)
                .with_context(|| format!("loading {}", path.display()))?,
            (None, Some(name)) => presets::load(name, &overrides)?,
            (None, None) => bail!("one of --config or --preset is required"),
        };
        Ok(cfg)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            let scene = harness::cmd_simulate(&cfg)?;
            println!(
                "wrote {} measurements to {}",
                scene.data.len(),
                cfg.output.display()
            );
        }
        Command::Run(c) => {
            let cfg = c.load()?;
            print_json(&harness::cmd_run(&cfg)?)?;
        }
        Command::Sweep {
            common,
            axis,
            levels,
            factors,
        } => {
            let cfg = common.load()?;
            let factors = factors.unwrap_or_else(|| harness::dyadic_factors(levels));
            let report = harness::cmd_sweep(&cfg, axis, &factors)?;
            print!("{}", report.to_csv());
            println!(
                "argmax factor {:e}, endpoints below peak: {}",
                report.rows[report.argmax].factor, report.endpoints_below_peak
            );
        }
        Command::CompareSymmetry(c) => {
            let cfg = c.load()?;
            print_json(&harness::cmd_compare_symmetry(&cfg)?)?;
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for name in presets::names() {
                    println!("{name}");
                }
            }
            PresetAction::Show { name } => print!("{}", presets::json(&name)?),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

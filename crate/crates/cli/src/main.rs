use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use swa_cli::commands::{self, Structure};
use swa_cli::config::{OutputFormat, RunConfig};

/// Shallow-water mobile-to-mobile acoustic channel simulator.
#[derive(Debug, Parser)]
#[command(name = "swa", version, about)]
struct Cli {
    /// Flat TOML file whose keys are the run configuration fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Output file format (overrides `format`).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Override any configuration key, e.g. `--set pmax=3`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenpaths, frequency response and impulse response at d0.
    Static,
    /// Type-II CIR grids of the moving-receiver and moving-transmitter cases.
    Fig3,
    /// Static and co-moving LTI responses.
    Fig4,
    /// Filter a waveform through the configured case.
    Filter {
        /// Input amplitude stream (text, or `.bin` with a `.hdr` sidecar).
        #[arg(long)]
        input: PathBuf,
        /// Sample rate of the input when the file does not declare one (Hz).
        #[arg(long)]
        input_fs: Option<f64>,
        #[arg(long, value_enum, default_value = "type1")]
        structure: Structure,
        /// Number of output samples (default: until the last arrival).
        #[arg(long)]
        out_len: Option<usize>,
        /// Base name of the output file.
        #[arg(long, default_value = "filtered")]
        name: String,
    },
    /// Delay, time-shift and Doppler checks of all cases.
    Analyze,
}

fn run(cli: Cli) -> Result<bool> {
    let mut overrides = cli.overrides;
    if let Some(dir) = &cli.out_dir {
        overrides.push(format!("out_dir={}", toml::Value::String(dir.display().to_string())));
    }
    if let Some(f) = cli.format {
        let name = match f {
            OutputFormat::Text => "text",
            OutputFormat::Binary => "binary",
        };
        overrides.push(format!("format=\"{name}\""));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    log::info!("config hash {}", cfg.hash());
    match cli.command {
        Command::Static => commands::run_static(&cfg).map(|_| true),
        Command::Fig3 => commands::run_fig3(&cfg).map(|_| true),
        Command::Fig4 => commands::run_fig4(&cfg).map(|_| true),
        Command::Filter {
            input,
            input_fs,
            structure,
            out_len,
            name,
        } => commands::run_filter(&cfg, &input, input_fs, structure, out_len, &name).map(|_| true),
        Command::Analyze => commands::run_analyze(&cfg).map(|(_, passed)| passed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

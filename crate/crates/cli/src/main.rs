//! `qtm` — batch runner for the two-transmon thermal machine simulator.
//!
//! Usage: `qtm <command> --config <file> [--out <dir>] [--threads N]`.
//! Verbosity via the QTM_LOG environment variable (error/warn/info/debug).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{parse_config, serialize_config, RunConfig};
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "qtm",
    version,
    about = "Steady-state and driven dynamics of a two-transmon quantum thermal machine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's output_dir; default "out")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points (overrides the config)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Labeled eigenfrequencies of the three-level molecule
    Eigen(RunArgs),
    /// Steady-state populations and heat currents
    Steady(RunArgs),
    /// Heat currents across the temperature-ratio sweep (regime map)
    HeatSweep(RunArgs),
    /// Coefficient of performance against the coupling rate
    CopVsG(RunArgs),
    /// Driven emission spectrum of one collective mode
    Spectrum(RunArgs),
    /// Power transfer between waveguides against the dephasing rate
    Transport(RunArgs),
    /// Global multi-power reflection fit (coupling-rate extraction)
    FitReflection(RunArgs),
    /// Dephasing rate against injected noise power
    FitDephasing(RunArgs),
    /// Mollow-triplet calibration fit
    CalibrateMollow(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eigen(_) => "eigen",
            Command::Steady(_) => "steady",
            Command::HeatSweep(_) => "heat-sweep",
            Command::CopVsG(_) => "cop-vs-g",
            Command::Spectrum(_) => "spectrum",
            Command::Transport(_) => "transport",
            Command::FitReflection(_) => "fit-reflection",
            Command::FitDephasing(_) => "fit-dephasing",
            Command::CalibrateMollow(_) => "calibrate-mollow",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Eigen(a)
            | Command::Steady(a)
            | Command::HeatSweep(a)
            | Command::CopVsG(a)
            | Command::Spectrum(a)
            | Command::Transport(a)
            | Command::FitReflection(a)
            | Command::FitDephasing(a)
            | Command::CalibrateMollow(a) => a,
        }
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let (text, base_dir) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let base = path
                .parent()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            (text, base)
        }
        None => (String::new(), PathBuf::from(".")),
    };
    let mut cfg = parse_config(&text, &base_dir).context("parsing config")?;
    if let Some(threads) = args.threads {
        if threads == 0 {
            anyhow::bail!("--threads must be >= 1");
        }
        cfg.raw.threads = threads;
    }
    if let Some(out) = &args.out {
        cfg.raw.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn run(command: &Command) -> Result<()> {
    let cfg = load_config(command.args())?;
    let out_dir = cfg
        .raw
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;

    let started = Instant::now();
    let outputs = match command {
        Command::Eigen(_) => commands::cmd_eigen(&cfg, &out_dir)?,
        Command::Steady(_) => commands::cmd_steady(&cfg, &out_dir)?,
        Command::HeatSweep(_) => commands::cmd_heat_sweep(&cfg, &out_dir)?,
        Command::CopVsG(_) => commands::cmd_cop_vs_g(&cfg, &out_dir)?,
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg, &out_dir)?,
        Command::Transport(_) => commands::cmd_transport(&cfg, &out_dir)?,
        Command::FitReflection(_) => commands::cmd_fit_reflection(&cfg, &out_dir)?,
        Command::FitDephasing(_) => commands::cmd_fit_dephasing(&cfg, &out_dir)?,
        Command::CalibrateMollow(_) => commands::cmd_calibrate_mollow(&cfg, &out_dir)?,
    };
    let wall = started.elapsed().as_secs_f64();

    let manifest = RunManifest::collect(
        command.name(),
        cfg.seed(),
        cfg.threads(),
        wall,
        serialize_config(&cfg)?,
        &outputs,
    )?;
    let manifest_path = manifest.write(&out_dir)?;
    log::info!(
        "{}: wrote {} outputs + {} in {:.2}s",
        command.name(),
        outputs.len(),
        manifest_path.display(),
        wall
    );
    for p in &outputs {
        println!("{}", p.display());
    }
    println!("{}", manifest_path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QTM_LOG")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtm {}: error: {e:#}", cli.command.name());
            ExitCode::FAILURE
        }
    }
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bose_cli::config::{parse_config, OutputFormat};
use bose_cli::run::{is_operator_file, run, Command};
use bose_cli::CliError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boselab", version, about = "Numerical laboratory for the dilute Bose gas on the unit torus")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Emit the CSV table instead of the JSON report.
    #[arg(long)]
    csv: bool,
    /// Report destination; overrides `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scattering length and Born terms.
    Scattering(Common),
    /// The lattice constant e_Λ.
    Constants(Common),
    /// Closed-form ground-state energy.
    Energy(Common),
    /// Excitation spectrum below a threshold.
    Spectrum(Common),
    /// Small-basis Fock-space checks.
    Simulate(Common),
}

fn write_files(dir: &Path, files: &[(PathBuf, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, common) = match cli.command {
        Cmd::Scattering(c) => (Command::Scattering, c),
        Cmd::Constants(c) => (Command::Constants, c),
        Cmd::Energy(c) => (Command::Energy, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
    };
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let text = fs::read_to_string(&common.config)?;
    let cfg = parse_config(&text)?;
    let start = Instant::now();
    let out = run(command, &cfg, common.seed)?;
    let elapsed = start.elapsed().as_secs_f64();

    let (ops, plots): (Vec<_>, Vec<_>) = out.files.iter().cloned().partition(|(p, _)| is_operator_file(p));
    if let Some(dir) = &cfg.output.plot_dir {
        write_files(dir, &plots)?;
    }
    if let Some(dir) = &cfg.output.operator_dir {
        write_files(dir, &ops)?;
    }
    let body = if common.csv || cfg.output.format == OutputFormat::Csv {
        out.csv.clone()
    } else {
        out.json_with_time(elapsed)
    };
    match common.out.or(cfg.output.path.clone()) {
        Some(path) => fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boselab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

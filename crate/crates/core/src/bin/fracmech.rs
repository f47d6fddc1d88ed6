use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use fracmech::commands::{run, Command};
use fracmech::config::{Overrides, RunConfig};
use fracmech::Error;

#[derive(Parser)]
#[command(name = "fracmech", version, about = "Fractional Ostrogradski mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replaces the configured alpha
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Replaces the configured number of grid samples
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Print Euler-Lagrange expression, momenta and reduced Hamiltonian
    Derive,
    /// Stationary trajectory as CSV plus a residual report
    Solve,
    /// Euclidean kernel normalisation, correlator and gaps as JSON
    Kernel,
    /// Solve for each alpha of the sweep list
    Sweep,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let msg = text
                .lines()
                .find_map(|l| l.strip_prefix("error: "))
                .unwrap_or("usage: fracmech <derive|solve|kernel|sweep> --config <path>");
            return fail(&Error::Config(msg.to_string()));
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn execute(cli: &Cli) -> fracmech::Result<()> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(Overrides { alpha: cli.alpha, grid_n: cli.grid_n })?;
    let dir = cli.out.clone().or_else(|| cfg.out.clone());
    let cmd = match cli.command {
        Cmd::Derive => Command::Derive,
        Cmd::Solve => Command::Solve,
        Cmd::Kernel => Command::Kernel,
        Cmd::Sweep => Command::Sweep,
    };
    let out = run(cmd, &cfg, dir.is_some())?;
    if let Some(d) = &dir {
        out.write_files(d)?;
    }
    print!("{}", out.stdout);
    Ok(())
}

fn fail(e: &Error) -> ExitCode {
    let line = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() });
    eprintln!("{line}");
    ExitCode::from(e.exit_code() as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use patchlab_cli::output::execute;
use patchlab_cli::{RunConfig, Subcommand, EXIT_CONFIG};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Dispersion,
    Resonance,
    Simulate,
    Lifespan,
    ParadiffCheck,
    NormalformCheck,
}

/// Spectral experiments on alpha-SQG vortex patches near the disc.
///
/// Exit codes: 0 all properties hold, 1 a property failed (see failure.json),
/// 2 configuration error.
#[derive(Parser)]
#[command(name = "patchlab", version)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's out_dir, then $PATCHLAB_OUT, then ./patchlab-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps and quadrature.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Command::Dispersion => Subcommand::Dispersion,
        Command::Resonance => Subcommand::Resonance,
        Command::Simulate => Subcommand::Simulate,
        Command::Lifespan => Subcommand::Lifespan,
        Command::ParadiffCheck => Subcommand::ParadiffCheck,
        Command::NormalformCheck => Subcommand::NormalformCheck,
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("configuration error: --workers must be positive");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let dir = cli
        .out
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("PATCHLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("patchlab-out"));
    match execute(cmd, &cfg, &dir) {
        Ok(code) => {
            let verdict = if code == 0 { "pass" } else { "FAIL (see failure.json)" };
            println!("{}: {verdict}; outputs in {}", cmd.name(), dir.display());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nullflow::run::exit_status;
use nullflow::verify::verify_file;
use nullflow::{parse_config, run_to_dir, threads_from_env, with_threads, CliError, ExitStatus, RunConfig};
use nullflow_core::TheoremId;

#[derive(Parser)]
#[command(name = "nullflow", version, about = "Degenerate Ricci-type flow simulator and estimate checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write trajectory, report and plots.
    Run {
        config: PathBuf,
        /// Output directory; overrides `out` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `seed` in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Reject unknown configuration keys instead of warning.
        #[arg(long)]
        strict: bool,
    },
    /// Check one estimate on a trajectory CSV; prints the report as JSON.
    Verify {
        trajectory: PathBuf,
        #[arg(long)]
        theorem: String,
        /// Configuration describing the scenario and estimate parameters.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        strict: bool,
    },
}

fn load(path: &Path, strict: bool) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let (cfg, unknown) = parse_config(&text, strict)?;
    for key in unknown {
        eprintln!("warning: ignoring unknown key `{key}`");
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<ExitStatus, CliError> {
    match command {
        Command::Run { config, out, seed, strict } => {
            let mut cfg = load(&config, strict)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let outcome = run_to_dir(&cfg, &out)?;
            println!("{}", outcome.summary);
            println!("artifacts: {}", out.display());
            Ok(outcome.summary.exit_status())
        }
        Command::Verify { trajectory, theorem, params, strict } => {
            let theorem: TheoremId = theorem.parse()?;
            let cfg = load(&params, strict)?;
            let report = verify_file(&trajectory, theorem, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(exit_status([report.status]))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = with_threads(threads_from_env(), || dispatch(cli.command));
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::Error as u8)
        }
    }
}

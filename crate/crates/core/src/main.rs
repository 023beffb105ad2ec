use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rismod::config::{run_job, JobConfig, JobKind};
use rismod::Error;

/// Link-level simulator for RIS-based PSK, A-PSK and QA-PSK transmitters.
#[derive(Parser)]
#[command(name = "rismod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the labeled constellation of one channel draw (or the mean one).
    Constellation(JobArgs),
    /// Monte Carlo DCMC capacity and its upper bound over an SNR grid.
    Capacity(JobArgs),
    /// Monte Carlo symbol error probability over an SNR grid.
    Sep(JobArgs),
    /// Closed-form SEP approximation and capacity upper bound.
    Theory(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; overrides the config's `output`. Stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UndefinedPhase => 2,
        Error::Numerical(_) => 3,
        Error::Schema(_) | Error::Io(_) => 1,
    }
}

fn run(kind: JobKind, args: JobArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = JobConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }
    let workers = match args.workers {
        Some(0) => return Err(Error::Config("--workers must be >= 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let csv = run_job(kind, &cfg, workers)?;
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Constellation(a) => (JobKind::Constellation, a),
        Command::Capacity(a) => (JobKind::Capacity, a),
        Command::Sep(a) => (JobKind::Sep, a),
        Command::Theory(a) => (JobKind::Theory, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rismod: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shellfem::config::{ProblemSpec, StudyKind};
use shellfem::runner::run_study;

#[derive(Parser)]
#[command(
    name = "shellfem",
    version,
    about = "Mixed and DG finite elements for Naghdi shells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Problem configuration file.
    config: PathBuf,
    /// Worker threads for independent solves (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once with the configured method(s).
    Solve(Common),
    /// Error table over uniformly refined meshes.
    Converge(Common),
    /// Both methods over the configured thicknesses at a fixed mesh.
    Locking(Common),
    /// Classify the asymptotic regime.
    Regime(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Solve(a) => (StudyKind::Solve, a),
        Command::Converge(a) => (StudyKind::Convergence, a),
        Command::Locking(a) => (StudyKind::Locking, a),
        Command::Regime(a) => (StudyKind::Regime, a),
    };
    if let Some(n) = args.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("warning: could not configure {n} worker threads: {e}");
        }
    }
    let result =
        ProblemSpec::from_file(&args.config).and_then(|spec| run_study(&spec, kind, &args.out));
    match result {
        Ok(summary) => {
            println!("{}", summary.message);
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}

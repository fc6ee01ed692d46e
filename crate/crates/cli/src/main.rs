//! `slip`: batch runner for spectral experiments.

mod inputs;
mod run;
mod spec;
mod summary;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spec::{ExperimentSpec, Kind};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "slip", version = summary::BUILD_ID, about = "Spectral inverse problem experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; overrides the spec's output_dir.
    #[arg(long, env = "SLIP_OUT_DIR")]
    out: Option<PathBuf>,
    /// Seed for every randomized input; overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the parallel pool.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Dirichlet eigenpairs.
    Eigs(RunArgs),
    /// Boundary traces of the wave or Schrodinger problem.
    Trace(RunArgs),
    /// Zero density of the boundary-data difference function.
    Zeros(RunArgs),
    /// Potential reconstruction from partial spectral data.
    Reconstruct(RunArgs),
    /// Moment-problem windows.
    Windows(RunArgs),
    /// Interpolation on sparse index sets.
    Interp(RunArgs),
    /// End-to-end verification pipelines.
    Pipeline(RunArgs),
    /// Schema and semantic checks without computation.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn accepts(command: &Command, kind: Kind) -> bool {
    match command {
        Command::Eigs(_) => kind == Kind::Eigs,
        Command::Trace(_) => matches!(kind, Kind::WaveTrace | Kind::SchrodTrace),
        Command::Zeros(_) => kind == Kind::Zeros,
        Command::Reconstruct(_) => kind == Kind::Reconstruct,
        Command::Windows(_) => kind == Kind::Windows,
        Command::Interp(_) => kind == Kind::Interp,
        Command::Pipeline(_) => {
            matches!(
                kind,
                Kind::Theorem1Pipeline | Kind::Theorem2Pipeline | Kind::Theorem4Pipeline
            )
        }
        Command::Validate { .. } => true,
    }
}

fn load(path: &Path) -> Result<ExperimentSpec, ExitCode> {
    let (diags, spec) = spec::validate_file(path);
    for d in &diags {
        eprintln!("{}: {d}", path.display());
    }
    spec.ok_or(ExitCode::from(EXIT_INVALID))
}

fn execute(command: &Command, args: &RunArgs) -> ExitCode {
    let mut spec = match load(&args.spec) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if !accepts(command, spec.kind) {
        eprintln!(
            "{}: kind: {} is not handled by this subcommand",
            args.spec.display(),
            spec.kind
        );
        return ExitCode::from(EXIT_INVALID);
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let out = args
        .out
        .clone()
        .or_else(|| spec.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("slip-out").join(spec.kind.name()));
    match run::run(&spec, &out) {
        Ok(summary) => {
            print!("{}", summary.text());
            if summary.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Validate { spec: path } => match load(path) {
            Ok(s) => {
                println!("{}: valid {} spec", path.display(), s.kind);
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Eigs(a)
        | Command::Trace(a)
        | Command::Zeros(a)
        | Command::Reconstruct(a)
        | Command::Windows(a)
        | Command::Interp(a)
        | Command::Pipeline(a) => execute(&cli.command, a),
    }
}

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relclock::harness::{self, ExperimentMode, HarnessError, OutputFormat, Overrides};

#[derive(Parser)]
#[command(
    name = "relclock",
    version,
    about = "Relational quantum clock experiments on entangled photon pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional probabilities seen by the internal observer.
    PawObserver(RunArgs),
    /// Erased-state fidelity seen by the external super-observer.
    PawSuperobserver(RunArgs),
    /// Two-time conditionals with a clock delay.
    Gppt(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Monte Carlo shots per point.
    #[arg(long)]
    shots: Option<u64>,
    /// Trials per tomography setting.
    #[arg(long)]
    exposure: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Replace the plate list with N equispaced phases on [0, 2π).
    #[arg(long, value_name = "N")]
    equispaced: Option<usize>,
}

fn execute(mode: ExperimentMode, args: RunArgs) -> Result<(), HarnessError> {
    let file = match &args.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let overrides = Overrides {
        shots: args.shots,
        exposure: args.exposure,
        seed: args.seed,
        out: args.out,
        format: args.format.map(|f| match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }),
        equispaced: args.equispaced,
    };
    let config = harness::resolve_config(mode, file.as_deref(), &overrides)?;
    let record = harness::run(&config)?;
    match &config.output_path {
        Some(path) => harness::write_outputs(&record, Path::new(path), config.format),
        None => {
            let text = match config.format {
                OutputFormat::Csv => harness::emit_csv(&record),
                OutputFormat::Json => harness::emit_json(&record),
            };
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| HarnessError::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mode, args) = match cli.command {
        Command::PawObserver(a) => (ExperimentMode::PawObserver, a),
        Command::PawSuperobserver(a) => (ExperimentMode::PawSuperobserver, a),
        Command::Gppt(a) => (ExperimentMode::Gppt, a),
    };
    match execute(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relclock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

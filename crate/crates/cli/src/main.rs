use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fockline_cli::run::build_custom;
use fockline_cli::spec::{Experiment, Format};
use fockline_cli::{execute, parse_spec, CliError, RunSpec};

/// Exact few-photon linear-optics simulation.
#[derive(Debug, Parser)]
#[command(name = "fockline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a spec and write its report.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check a spec and build its circuit without running it.
    Validate {
        spec: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Debug, Args)]
struct Opts {
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the spec's output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress informational messages on standard error.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn load(path: &Path, opts: &Opts) -> Result<RunSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut spec = parse_spec(&text)?;
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(f) = opts.format {
        spec.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    if let Some(out) = &opts.out {
        spec.output = Some(out.to_string_lossy().into_owned());
    }
    spec.validate()?;
    Ok(spec)
}

fn run(path: &Path, opts: &Opts) -> Result<(), CliError> {
    let spec = load(path, opts)?;
    let text = execute(&spec)?;
    match &spec.output {
        Some(out) => {
            fs::write(out, &text).map_err(|source| CliError::Io {
                path: out.into(),
                source,
            })?;
            if !opts.quiet {
                eprintln!("wrote {out}");
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(())
}

fn validate(path: &Path, opts: &Opts) -> Result<(), CliError> {
    let spec = load(path, opts)?;
    match spec.experiment {
        Experiment::Steering => {
            fockline::experiments::build_steering(&spec.steering_config())?
                .circuit
                .compile()?;
        }
        Experiment::Chsh => {}
        Experiment::Custom => {
            let c = spec.custom.as_ref().expect("validated custom spec");
            build_custom(c, spec.bs_convention)?.circuit.compile()?;
        }
    }
    if !opts.quiet {
        eprintln!(
            "{}: ok ({} / {})",
            path.display(),
            spec.experiment.name(),
            spec.task.name()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { spec, opts } => run(spec, opts),
        Command::Validate { spec, opts } => validate(spec, opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

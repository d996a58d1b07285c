use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lfscat_cli::config::{Format, RunConfig};
use lfscat_cli::{output, presets, run, CliError};

#[derive(Parser)]
#[command(name = "lfscat", version, about = "Low-frequency scattering by planar slabs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write its output.
    Run(RunArgs),
    /// Check a configuration without running it.
    Validate(Source),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Path to a JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn load(source: &Source) -> Result<RunConfig, CliError> {
    let loaded = match (&source.config, &source.preset) {
        (Some(path), _) => RunConfig::from_path(path),
        (None, Some(name)) => presets::load(name),
        (None, None) => Err("either --config or --preset is required".into()),
    };
    loaded.map_err(|e| CliError::Validation(vec![e]))
}

fn check(config: &RunConfig) -> Result<(), CliError> {
    let errors = config.validate();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(errors))
    }
}

fn run_command(args: RunArgs) -> Result<(), CliError> {
    let mut config = load(&args.source)?;
    if let Some(tol) = args.tol {
        config.numerics.quadrature.rel_tol = tol;
    }
    if let Some(t) = args.threads {
        config.threads = Some(t);
    }
    if let Some(f) = args.format {
        config.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(out) = args.out {
        config.output.path = Some(out);
    }
    check(&config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let result = pool.install(|| run::execute(&config))?;
    let text = output::render(&result, config.output.format);
    match &config.output.path {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Validate(source) => load(&source).and_then(|c| check(&c)).map(|()| println!("ok")),
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

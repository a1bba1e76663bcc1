//! Thin command-line front end: load a config, run the pipeline, write the
//! report bundle. Exit codes: 0 success, 2 configuration error, 3 numeric
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlr::config::load_config;
use qlr::runner;

#[derive(Parser)]
#[command(
    name = "qlr",
    about = "Linear-response contextuality certification pipelines",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for summary and series files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for per-grid-point fan-out (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Directory for summary and series files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Response-vs-bound gap certification over a coupling sweep.
    Certify(RunArgs),
    /// Two-stroke engine work extraction and its noncontextual ceiling.
    Engine(RunArgs),
    /// Phase-estimation Fisher information against the noncontextual bound.
    Metrology(RunArgs),
    /// Zeno survival curves, noncontextual and quantum.
    Zeno(RunArgs),
    /// Brute-force bound oracle over sampled ontological models.
    #[command(name = "om-oracle")]
    OmOracle(RunArgs),
    /// Deterministic invariant suite.
    Selftest(SelftestArgs),
}

fn install_pool(threads: Option<usize>) -> Result<(), qlr::Error> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| qlr::Error::BadParameters {
                reason: format!("thread pool: {e}"),
            })?;
    }
    Ok(())
}

fn run_kind(args: &RunArgs, expected: &str) -> Result<(), qlr::Error> {
    install_pool(args.threads)?;
    let config = load_config(&args.config)?;
    if config.kind_name() != expected {
        return Err(qlr::Error::Validation {
            field: "kind".into(),
            message: format!(
                "config is `{}` but the `{expected}` subcommand was invoked",
                config.kind_name()
            ),
        });
    }
    let bundle = runner::run_to_dir(&config, &args.out_dir)?;
    println!(
        "wrote {} and {}",
        args.out_dir.join(&bundle.summary_name).display(),
        args.out_dir.join(&bundle.series_name).display()
    );
    print!("{}", bundle.summary);
    Ok(())
}

fn run_selftest(args: &SelftestArgs) -> Result<(), qlr::Error> {
    install_pool(args.threads)?;
    let bundle = runner::selftest()?;
    bundle.write(&args.out_dir)?;
    println!(
        "wrote {} and {}",
        args.out_dir.join(&bundle.summary_name).display(),
        args.out_dir.join(&bundle.series_name).display()
    );
    print!("{}", bundle.summary);
    if !bundle.summary.contains("all_pass = true") {
        return Err(qlr::Error::CrossCheck {
            detail: "selftest reported failures".into(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Certify(a) => run_kind(a, "certify"),
        Command::Engine(a) => run_kind(a, "engine"),
        Command::Metrology(a) => run_kind(a, "metrology"),
        Command::Zeno(a) => run_kind(a, "zeno"),
        Command::OmOracle(a) => run_kind(a, "om_oracle"),
        Command::Selftest(a) => run_selftest(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use lightfluid_cli::{run, sweep, CliError, RunFile, RunOptions, CATALOG};

/// Default output root when `--out` is not given.
const OUT_ENV: &str = "LIGHTFLUID_OUT";

#[derive(Parser)]
#[command(name = "lightfluid", version, about = "Run fluid-of-light and atomic-vapor experiments", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML configuration.
    Run {
        config: PathBuf,
        /// Output directory [default: $LIGHTFLUID_OUT/<config name>, else runs/<config name>]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Treat warnings as errors.
        #[arg(long)]
        strict: bool,
        /// Also write gnuplot .dat mirrors of the tables.
        #[arg(long)]
        dat: bool,
    },
    /// Run every point of the `[sweep]` grid of a configuration.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        dat: bool,
    },
    /// List the available experiments.
    ListExperiments,
}

fn default_out(config: &Path) -> PathBuf {
    let stem = config.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    root.join(stem)
}

fn fail(error: &CliError) -> ExitCode {
    let report = error.report();
    eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for e in CATALOG {
                println!("{:<22} {}  [{}]", e.name, e.about, e.example);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            seed,
            strict,
            dat,
        } => {
            let file = match RunFile::load(&config) {
                Ok(f) => f,
                Err(e) => return fail(&e),
            };
            let dir = out.unwrap_or_else(|| default_out(&config));
            match run(&file, &dir, RunOptions { seed, strict, dat }) {
                Ok(report) => match &report.error {
                    None => {
                        println!("{}", dir.display());
                        for (k, v) in &report.manifest.summary {
                            println!("  {k} = {v:.6e}");
                        }
                        for w in &report.manifest.warnings {
                            println!("  warning: {w}");
                        }
                        ExitCode::SUCCESS
                    }
                    Some(e) => fail(e),
                },
                Err(e) => fail(&e),
            }
        }
        Command::Sweep {
            config,
            out,
            jobs,
            seed,
            strict,
            dat,
        } => {
            let file = match RunFile::load(&config) {
                Ok(f) => f,
                Err(e) => return fail(&e),
            };
            let dir = out.unwrap_or_else(|| default_out(&config));
            match sweep(&file, &dir, RunOptions { seed, strict, dat }, jobs) {
                Ok(report) => {
                    let done = report.points.iter().filter(|p| p.exit_code == 0).count();
                    let skipped = report.points.iter().filter(|p| p.skipped).count();
                    println!(
                        "{}: {done}/{} points ok ({skipped} resumed)",
                        dir.join(lightfluid_cli::sweep::SUMMARY).display(),
                        report.points.len()
                    );
                    for p in report.points.iter().filter(|p| p.exit_code != 0) {
                        if let Some(e) = p.manifest.as_ref().and_then(|m| m.error.as_ref()) {
                            eprintln!("{}", serde_json::to_string(e).expect("error report serializes"));
                        }
                    }
                    ExitCode::from(report.exit_code as u8)
                }
                Err(e) => fail(&e),
            }
        }
    }
}

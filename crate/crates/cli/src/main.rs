use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use holder_cli::{dispatch, parse_config, Command, Overrides, EXIT_CONFIG};

/// Numerical laboratory for Hölder functions, their graphs and level sets.
///
/// Every run reads an optional JSON config, applies the flags on top, and
/// writes `summary.json`, CSV tables and SVG plots to a directory named by
/// the subcommand and the config hash.
#[derive(Parser)]
#[command(name = "holder", version)]
struct Cli {
    /// May be omitted when the config file names one.
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON run config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Root directory for run records.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "HOLDER_THREADS")]
    threads: Option<usize>,

    /// Exponent of the embedding and of the default function.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Base of the default function.
    #[arg(long, global = true)]
    base: Option<u32>,

    /// Set any config key, e.g. `--set estimator.x=0.25`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Print the fully resolved config and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let overrides = Overrides {
        subcommand: cli.command,
        seed: cli.seed,
        out: cli.out,
        alpha: cli.alpha,
        base: cli.base,
        set: cli.set,
    };
    let config = match parse_config(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if cli.dump_config {
        let _ = writeln!(std::io::stdout(), "{}", config.to_json());
        return ExitCode::SUCCESS;
    }
    match dispatch(&config) {
        Ok(outcome) => {
            // A closed pipe downstream is not an error of the run.
            let _ = writeln!(std::io::stdout(), "{}", outcome.display);
            eprintln!("record: {}", outcome.directory.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

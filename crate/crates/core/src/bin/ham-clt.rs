use clap::{Parser, ValueEnum};
use ham_clt::runner::{self, Overrides, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Constants,
    Variance,
    Bounds,
    Simulate,
    Clt,
}

/// Verification runs for CLTs of the hyperbolic Anderson model.
///
/// The worker-thread count is read from HAM_CLT_THREADS; it never changes results.
#[derive(Debug, Parser)]
#[command(name = "ham-clt", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated radii, e.g. 4,8,16,32,64.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Number of solution samples for simulate and clt.
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { runner::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let sub = match cli.command {
        Command::Constants => Subcommand::Constants,
        Command::Variance => Subcommand::Variance,
        Command::Bounds => Subcommand::Bounds,
        Command::Simulate => Subcommand::Simulate,
        Command::Clt => Subcommand::Clt,
    };
    let overrides = Overrides { seed: cli.seed, radii: cli.radii, out: cli.out, samples: cli.samples };
    let outcome = ham_clt::mc::with_pool(|| runner::run(sub, &cli.config, &overrides));
    if outcome.exit_code == runner::EXIT_OK {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    for p in &outcome.outputs {
        println!("wrote {}", p.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}

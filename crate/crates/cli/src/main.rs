use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dproute_cli::{CliError, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "dproute",
    version,
    about = "Routing bias under Gaussian edge-weight release"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the ground-truth graph in the text edge-list format.
    Generate(Common),
    /// Run the Monte-Carlo experiment and write record, aggregate and trend files.
    Simulate(Common),
    /// Evaluate the deviation bounds for one node pair over a beta grid.
    Bounds(Common),
    /// Run `simulate` over the Cartesian product of the config's sweep lists.
    Sweep(Common),
}

/// Flags shared by all subcommands; each one overrides the config file.
#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Noise standard deviation as a percentage of the graph's reference weight.
    #[arg(long, conflicts_with = "sigma")]
    noise_pct: Option<f64>,
    /// Absolute noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::load(&self.config)?;
        config.apply(&Overrides {
            seed: self.seed,
            trials: self.trials,
            noise_pct: self.noise_pct,
            sigma: self.sigma,
            output_dir: self.output_dir.clone(),
        });
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(c) => {
            let path = dproute_cli::generate(&c.load()?)?;
            println!("graph={}", path.display());
        }
        Command::Simulate(c) => {
            let out = dproute_cli::simulate(&c.load()?)?;
            println!("out_dir={}", out.dir.display());
            println!("sigma={}", out.sigma);
            for t in &out.trend.categories {
                println!(
                    "category {}: records={} p_unchanged={:?} p_over_100={:?}",
                    t.category, t.records, t.p_unchanged, t.p_over_100
                );
            }
        }
        Command::Bounds(c) => {
            let reports = dproute_cli::bounds(&c.load()?)?;
            let vacuous = reports.iter().filter(|r| r.is_vacuous()).count();
            println!("betas={} vacuous={}", reports.len(), vacuous);
        }
        Command::Sweep(c) => {
            let runs = dproute_cli::sweep(&c.load()?)?;
            println!("runs={}", runs.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

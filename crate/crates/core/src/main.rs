use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photon_engine::cli::runner::run_file;
use photon_engine::cli::selfcheck::{run_selfcheck, SelfcheckOptions};
use photon_engine::cli::CliError;

#[derive(Parser)]
#[command(name = "photon-engine", version, about = "Superradiant photonic engine simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// RNG seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for parallel sweeps and trajectories.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the invariant and reference suite.
    Selfcheck {
        /// Inject rate_down < rate_up into the stability check.
        #[arg(long, hide = true)]
        perturb_rates: bool,
        /// Trajectories per phase mode.
        #[arg(long, default_value_t = 1000)]
        trajectories: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Print the version.
    Version,
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
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
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return fail(CliError::Config(format!("--threads: {e}")));
                }
            }
            match run_file(&config, out, seed) {
                Ok(dir) => {
                    println!("{}", dir.join("summary.json").display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Selfcheck {
            perturb_rates,
            trajectories,
            seed,
        } => {
            let opts = SelfcheckOptions {
                swap_rates: perturb_rates,
                n_trajectories: trajectories,
                histogram_trajectories: trajectories,
                seed,
            };
            let results = run_selfcheck(&opts);
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Version => {
            println!("photon-engine {}", photon_engine::VERSION);
            ExitCode::SUCCESS
        }
    }
}

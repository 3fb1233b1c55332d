use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gsqg::analysis::commutator_g;
use gsqg::harness::experiment::{matrix_csv, run_experiment};
use gsqg::harness::{build_ic, parse_config, verify_suite, InitialCondition, VerifyOptions};
use gsqg::{inverse_transform, Grid};

#[derive(Parser)]
#[command(name = "gsqg", version, about = "Operator splitting for 2D active scalar equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the convergence experiment described by a JSON config.
    Run { config: PathBuf },
    /// Run the acceptance checks and print one line per check.
    Verify {
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Print an initial condition as a CSV matrix of physical samples.
    Ic {
        preset: String,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Print G^α(θ, θ) for the two-mode preset as a CSV matrix.
    Commutator {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
}

fn run(cli: Cli) -> gsqg::Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|source| gsqg::Error::Io {
                path: config.display().to_string(),
                source,
            })?;
            let config = parse_config(&text)?;
            let report = run_experiment(&config)?;
            for r in &report.reports {
                for fit in &r.fitted_order {
                    eprintln!("{} H^{}: {:?}", r.scheme, fit.norm_order, fit.outcome);
                }
            }
            eprintln!("wrote {}", config.output_dir.display());
            Ok(true)
        }
        Command::Verify { grid } => {
            let checks = verify_suite(&VerifyOptions {
                grid_n: grid,
                tamper_multiplier: false,
            })?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {} failed", checks.len(), failed);
            Ok(failed == 0)
        }
        Command::Ic { preset, grid } => {
            let ic: InitialCondition = preset.parse()?;
            let field = build_ic(&ic, &Grid::new(grid)?)?;
            print!("{}", matrix_csv(&inverse_transform(&field)?));
            Ok(true)
        }
        Command::Commutator { alpha, grid } => {
            let theta = build_ic(&InitialCondition::TwoMode, &Grid::new(grid)?)?;
            let g = commutator_g(&theta, &theta, alpha)?;
            print!("{}", matrix_csv(&inverse_transform(&g)?));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! `qlbe`: batch runner for quantum linear Boltzmann equation scenarios.

mod config;
mod format;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use scenario::{RunError, Scenario};

const CONFIG_HELP: &str = "\
CONFIGURATION (TOML; every key optional unless noted, unknown keys are rejected)
  [masses]      particle = 1.0         test particle mass M
                molecule = 1.0         gas molecule mass m
  [gas]         beta = 1.0             inverse temperature; an array gives one component each
                density = 1.0          number density; scalar or one per beta
  [amplitude]   model = \"constant\"     \"constant\" or \"gaussian\"
                f0 = 0.5               forward amplitude
                width                  gaussian width in transfer (required for gaussian)
                sigma = 4 pi f0^2      total cross section
  [collision]   tau                    intercollision time (required unless derive_tau)
                derive_tau = false     tau = sqrt(pi beta m) / (sigma n_g)
                coupling = 2 pi / m*^2 rate prefactor is coupling / tau
  [grid]        n = 64                 momentum grid points
                dp = 0.25              grid spacing
                shifts = [-4..4]       momentum transfers in units of dp (nonzero)
  [quadrature]  k_order = 64           Gauss-Hermite nodes over gas momenta
                radial_order = 48      mapped Gauss-Legendre nodes for |Q|
                perp_order = 24        Gauss-Hermite nodes per transverse axis
                tol = 1e-4             relative change accepted between orders p, p+4
                window_periods = 64    energy window of the [delta_tau']^2 integral
                nodes_per_period = 32
  [evolution]   dt = auto              auto: 0.1 / spectral bound of the generator
                n_steps = 1000
                record_every = 10
                positivity_tol = 1e-8
                edge_population_tol = 1e-6
                include_hamiltonian = true
  [initial]     kind = \"gaussian\"      gaussian, diagonal, mixed or superposition
                center = 0.0
                width = 0.5
  [decohere]    ladder = [tau, 2 tau, 4 tau]
                pair = symmetric indices 9 points apart
  [units]       energy, time, length   report conversion factors (all or none)

OUTPUT (CSV in --out; each file starts with '# ' lines echoing the resolved configuration)
  constants   constants.csv
  evolve      evolve.csv, evolve_diagonal.csv
  decohere    decohere.csv, decohere_rates.csv
  additivity  additivity.csv
  limits      limits.csv

ENVIRONMENT
  QLBE_WORKERS   worker threads for tau ladders (default: available parallelism)

EXIT CODES
  0 success, 1 I/O failure, 2 configuration error, 3 run invalidated by a monitor, 4 quadrature accuracy failure";

#[derive(Debug, Parser)]
#[command(name = "qlbe", version, about = "Quantum linear Boltzmann equation with finite intercollision time", after_help = CONFIG_HELP)]
struct Args {
    /// Scenario to run.
    #[arg(value_enum)]
    scenario: Scenario,

    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Directory for CSV artifacts.
    #[arg(long, default_value = "qlbe-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = config::load(&args.config)
        .map_err(RunError::from)
        .and_then(|cfg| scenario::run(args.scenario, &cfg, &args.out));
    match result {
        Ok(outcome) => {
            println!("qlbe {}", args.scenario.name());
            for line in &outcome.summary {
                println!("  {line}");
            }
            for path in &outcome.artifacts {
                println!("  wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("qlbe {}: {err}", args.scenario.name());
            ExitCode::from(err.exit_code())
        }
    }
}

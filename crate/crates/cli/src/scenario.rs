//! Scenario dispatch and artifact emission.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use qlbe_core::diffusion::{
    cp_check, cp_threshold_tau, dpp_quadrature, dxx_coefficient_quadrature, dxx_from_tau, AngularTreatment,
};
use qlbe_core::evolution::{decoherence_run, evolve, DecoherenceRun, STABILITY_GUARD};
use qlbe_core::generator::additivity_defect;
use qlbe_core::{
    DensityMatrix, EvolutionConfig, GasComponent, Generator, GeneratorVariant, Liouvillian, QlbeError,
    TauConstraintReport,
};

use crate::config::{ConfigError, InitialKind, ScenarioConfig};
use crate::format::{fmt_bool, fmt_f64, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    /// Friction, momentum and position diffusion, complete-positivity check.
    Constants,
    /// Density-matrix evolution with observables.
    Evolve,
    /// Coherence decay of a two-momentum superposition along a tau ladder.
    Decohere,
    /// Gas-additivity defects of the linear and square-root generators.
    Additivity,
    /// Intercollision-time constraint report.
    Limits,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Constants => "constants",
            Scenario::Evolve => "evolve",
            Scenario::Decohere => "decohere",
            Scenario::Additivity => "additivity",
            Scenario::Limits => "limits",
        }
    }
}

/// Environment variable holding the worker count for tau ladders.
pub const WORKERS_ENV: &str = "QLBE_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] QlbeError),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 configuration, 3 run invalidated, 4 accuracy, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(QlbeError::RunInvalidated { .. }) => 3,
            RunError::Core(QlbeError::Accuracy(_)) => 4,
            RunError::Core(_) => 2,
            RunError::Io(_) => 1,
        }
    }
}

pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn single_component(cfg: &ScenarioConfig, scenario: &str) -> Result<GasComponent, RunError> {
    match cfg.gas.components() {
        [c] => Ok(*c),
        many => Err(ConfigError::Key {
            key: "gas.beta".into(),
            message: format!("the {scenario} scenario needs one gas component, got {}", many.len()),
        }
        .into()),
    }
}

pub fn run(scenario: Scenario, cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, RunError> {
    std::fs::create_dir_all(out)?;
    match scenario {
        Scenario::Constants => constants(cfg, out),
        Scenario::Evolve => evolve_scenario(cfg, out),
        Scenario::Decohere => decohere(cfg, out),
        Scenario::Additivity => additivity(cfg, out),
        Scenario::Limits => limits(cfg, out),
    }
}

fn constants(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, RunError> {
    let gas = single_component(cfg, "constants")?;
    let md = dpp_quadrature(&gas, &cfg.amplitude, &cfg.masses, &cfg.diffusion)?;
    let d_xx = dxx_from_tau(md.d_pp, cfg.tau, &cfg.masses)?;
    let expansion =
        dxx_coefficient_quadrature(&gas, &cfg.amplitude, &cfg.masses, cfg.tau, &cfg.diffusion, AngularTreatment::Symmetric)?;
    let cp = cp_check(d_xx, md.d_pp, gas.beta, &cfg.masses);
    let threshold = cp_threshold_tau(gas.beta);

    let mut table = Table::new(&[
        "tau",
        "beta",
        "eta",
        "d_pp",
        "d_xx",
        "d_xx_expansion",
        "cp_satisfied",
        "cp_margin",
        "cp_threshold_tau",
    ]);
    table.push(vec![
        fmt_f64(cfg.tau),
        fmt_f64(gas.beta),
        fmt_f64(md.eta),
        fmt_f64(md.d_pp),
        fmt_f64(d_xx),
        fmt_f64(expansion),
        fmt_bool(cp.satisfied),
        fmt_f64(cp.margin),
        fmt_f64(threshold),
    ]);
    let path = table.write(out, "constants.csv", "constants", &cfg.resolved)?;
    Ok(Outcome {
        artifacts: vec![path],
        summary: vec![
            format!("eta = {:.6e}, D_pp = {:.6e}", md.eta, md.d_pp),
            format!("D_xx = {d_xx:.6e} (expansion route {expansion:.6e})"),
            format!(
                "complete positivity {} (margin {:.3e}; threshold tau = {threshold:.6e})",
                if cp.satisfied { "holds" } else { "violated" },
                cp.margin
            ),
        ],
    })
}

fn initial_state(cfg: &ScenarioConfig) -> Result<DensityMatrix, QlbeError> {
    let grid = cfg.grid;
    match cfg.initial {
        InitialKind::Gaussian => DensityMatrix::gaussian_packet(grid, cfg.initial_center, cfg.initial_width),
        InitialKind::Diagonal => {
            let w = cfg.initial_width;
            let pops: Vec<f64> = grid
                .values()
                .iter()
                .map(|p| (-(p - cfg.initial_center).powi(2) / (2.0 * w * w)).exp())
                .collect();
            DensityMatrix::diagonal(grid, &pops)
        }
        InitialKind::Mixed => Ok(DensityMatrix::maximally_mixed(grid)),
        InitialKind::Superposition => DensityMatrix::two_point_superposition(grid, cfg.pair.0, cfg.pair.1),
    }
}

fn evolution_config(cfg: &ScenarioConfig, op: &impl Liouvillian) -> EvolutionConfig {
    EvolutionConfig {
        dt: cfg.dt.unwrap_or_else(|| STABILITY_GUARD / op.spectral_bound().max(f64::MIN_POSITIVE)),
        n_steps: cfg.n_steps,
        positivity_tol: cfg.positivity_tol,
        edge_population_tol: cfg.edge_population_tol,
        record_every: cfg.record_every,
    }
}

fn evolve_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, RunError> {
    let generator = Generator::new(&cfg.generator(), cfg.grid)?;
    let rho0 = initial_state(cfg)?;
    let evo = evolution_config(cfg, &generator);
    let run = evolve(&rho0, &evo, &generator)?;
    let s = &run.series;

    let mut table = Table::new(&["time", "trace_error", "coherence_l1", "mean_p", "var_p", "min_eig", "edge_pop"]);
    for r in 0..s.len() {
        table.push(
            [s.times[r], s.trace_error[r], s.coherence_l1[r], s.mean_p[r], s.var_p[r], s.min_eigenvalue[r], s.edge_population[r]]
                .map(fmt_f64)
                .to_vec(),
        );
    }
    let mut columns = vec!["time".to_string()];
    columns.extend((0..cfg.grid.len()).map(|i| format!("p_{i}")));
    let mut diag = Table {
        columns,
        rows: Vec::new(),
    };
    for (t, d) in s.times.iter().zip(&s.diagonals) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(d.iter().map(|x| fmt_f64(*x)));
        diag.push(row);
    }
    let mut resolved = cfg.resolved.clone();
    if cfg.dt.is_none() {
        resolved.insert("evolution.dt".into(), format!("{} (auto)", fmt_f64(evo.dt)));
    }
    let a = table.write(out, "evolve.csv", "evolve", &resolved)?;
    let b = diag.write(out, "evolve_diagonal.csv", "evolve", &resolved)?;
    let last = s.len() - 1;
    Ok(Outcome {
        artifacts: vec![a, b],
        summary: vec![
            format!("{} steps of dt = {:.6e} ({} records)", cfg.n_steps, evo.dt, s.len()),
            format!(
                "final: trace error {:.3e}, coherence_l1 {:.6e}, <P> {:.6e}, var P {:.6e}",
                s.trace_error[last], s.coherence_l1[last], s.mean_p[last], s.var_p[last]
            ),
            format!(
                "min eigenvalue over records {:.3e}, max edge population {:.3e}",
                s.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min),
                s.edge_population.iter().copied().fold(0.0, f64::max)
            ),
        ],
    })
}

fn workers() -> Result<usize, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(ConfigError::Key {
                key: WORKERS_ENV.into(),
                message: format!("expected a positive integer, got \"{v}\""),
            }),
        },
    }
}

fn decohere(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers()?)
        .build()
        .map_err(|e| ConfigError::Key {
            key: WORKERS_ENV.into(),
            message: e.to_string(),
        })?;
    let base = cfg.generator();
    let runs: Vec<Result<DecoherenceRun, QlbeError>> = pool.install(|| {
        cfg.ladder
            .par_iter()
            .map(|&tau| decoherence_run(&base.with_tau(tau), cfg.grid, cfg.pair, |gen, _| evolution_config(cfg, gen)))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut series = Table::new(&["tau", "time", "coherence_l1", "trace_error", "min_eig", "edge_pop"]);
    let mut rates = Table::new(&["tau", "initial_rate", "fitted_rate"]);
    for run in &runs {
        let s = &run.series;
        for r in 0..s.len() {
            series.push(
                [run.tau, s.times[r], s.coherence_l1[r], s.trace_error[r], s.min_eigenvalue[r], s.edge_population[r]]
                    .map(fmt_f64)
                    .to_vec(),
            );
        }
        rates.push([run.tau, run.initial_rate, run.rate].map(fmt_f64).to_vec());
    }
    let a = series.write(out, "decohere.csv", "decohere", &cfg.resolved)?;
    let b = rates.write(out, "decohere_rates.csv", "decohere", &cfg.resolved)?;
    let mut by_tau: Vec<(f64, f64)> = runs.iter().map(|r| (r.tau, r.rate)).collect();
    by_tau.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ordered = by_tau.windows(2).all(|w| w[1].1 >= w[0].1);
    let mut summary: Vec<String> = runs
        .iter()
        .map(|r| format!("tau = {:.6e}: fitted rate {:.6e} (initial {:.6e})", r.tau, r.rate, r.initial_rate))
        .collect();
    summary.push(format!(
        "fitted rates nondecreasing along the ladder: {}",
        if ordered { "yes" } else { "no" }
    ));
    Ok(Outcome {
        artifacts: vec![a, b],
        summary,
    })
}

fn additivity(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, RunError> {
    if cfg.gas.components().len() != 2 {
        return Err(ConfigError::Key {
            key: "gas.beta".into(),
            message: format!(
                "the additivity scenario needs two gas components, got {}",
                cfg.gas.components().len()
            ),
        }
        .into());
    }
    let base = cfg.generator();
    let mut table = Table::new(&["variant", "diagonal_defect", "coherence_defect"]);
    let mut summary = Vec::new();
    for (name, variant) in [("linear", GeneratorVariant::Linear), ("sqrt", GeneratorVariant::Sqrt)] {
        let d = additivity_defect(&base, &cfg.grid, variant)?;
        table.push(vec![name.to_string(), fmt_f64(d.diagonal), fmt_f64(d.coherence)]);
        summary.push(format!(
            "{name}: diagonal defect {:.3e}, coherence defect {:.3e}",
            d.diagonal, d.coherence
        ));
    }
    let path = table.write(out, "additivity.csv", "additivity", &cfg.resolved)?;
    Ok(Outcome {
        artifacts: vec![path],
        summary,
    })
}

fn limits(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, RunError> {
    let gas = single_component(cfg, "limits")?;
    let mut report = TauConstraintReport::from_tau(cfg.tau, gas.beta)?;
    if gas.density > 0.0 {
        report.density_ratio = Some((gas.mass / gas.beta).sqrt() / (cfg.amplitude.sigma_total * gas.density));
    }
    let mut table = Table::new(&[
        "tau",
        "beta",
        "tau_kt",
        "threshold",
        "satisfied",
        "at_boundary",
        "density_ratio",
        "implied_constant",
        "density_form",
        "tau_reported",
        "temperature_reported",
    ]);
    table.push(vec![
        fmt_f64(report.tau),
        fmt_f64(report.beta),
        fmt_f64(report.tau_kt),
        fmt_f64(report.threshold),
        fmt_bool(report.satisfied),
        fmt_bool(report.at_boundary),
        fmt_f64(report.density_ratio.unwrap_or(f64::NAN)),
        fmt_f64(report.implied_constant),
        fmt_f64(report.density_form().unwrap_or(f64::NAN)),
        fmt_f64(cfg.units.time(report.tau)),
        fmt_f64(cfg.units.temperature(report.beta)),
    ]);
    let path = table.write(out, "limits.csv", "limits", &cfg.resolved)?;
    let mut summary = vec![format!(
        "tau k_B T = {:.6e} vs sqrt(3)/4 = {:.6e}: {}",
        report.tau_kt,
        report.threshold,
        if report.at_boundary {
            "at the boundary"
        } else if report.satisfied {
            "satisfied"
        } else {
            "violated"
        }
    )];
    if let Some(form) = report.density_form() {
        summary.push(format!(
            "sqrt(m k_B T) / (sigma n_g) = {:.6e}; with constant {:.6e} the density form gives {form:.6e} (>= 1 when satisfied)",
            report.density_ratio.unwrap_or(f64::NAN),
            report.implied_constant
        ));
    }
    Ok(Outcome {
        artifacts: vec![path],
        summary,
    })
}

//! Fixed-step time evolution of the QLBE, observable recording, and the
//! classical linear Boltzmann equation on the same grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{contract, domain, require_positive, QlbeError, Result};
use crate::gas::mb_density_sq;
use crate::generator::{coherence_decay_rate, on_shell_gas_momentum, Generator, GeneratorConfig, Liouvillian};
use crate::grid::{CMatrix, DensityMatrix, MomentumGrid};

/// Largest allowed `dt * spectral_bound` for an explicit step.
pub const STABILITY_GUARD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub positivity_tol: f64,
    pub edge_population_tol: f64,
    pub record_every: usize,
}

impl EvolutionConfig {
    pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-8;
    pub const DEFAULT_EDGE_POPULATION_TOL: f64 = 1e-6;

    pub fn new(dt: f64, n_steps: usize) -> Self {
        Self {
            dt,
            n_steps,
            positivity_tol: Self::DEFAULT_POSITIVITY_TOL,
            edge_population_tol: Self::DEFAULT_EDGE_POPULATION_TOL,
            record_every: 1,
        }
    }

    pub fn record_every(self, stride: usize) -> Self {
        Self {
            record_every: stride,
            ..self
        }
    }

    pub fn edge_population_tol(self, tol: f64) -> Self {
        Self {
            edge_population_tol: tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("time step dt", self.dt)?;
        if self.record_every == 0 {
            return Err(domain("record_every must be at least 1"));
        }
        if !(self.positivity_tol >= 0.0) || !(self.edge_population_tol >= 0.0) {
            return Err(domain("monitor tolerances must be non-negative"));
        }
        Ok(())
    }
}

/// Observables recorded along a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub trace_error: Vec<f64>,
    pub coherence_l1: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub var_p: Vec<f64>,
    pub min_eigenvalue: Vec<f64>,
    pub edge_population: Vec<f64>,
    pub diagonals: Vec<Vec<f64>>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(&mut self, time: f64, rho: &DensityMatrix) {
        self.times.push(time);
        self.trace_error.push((rho.trace() - Complex64::new(1.0, 0.0)).norm());
        self.coherence_l1.push(rho.coherence_l1());
        self.mean_p.push(rho.mean_momentum());
        self.var_p.push(rho.momentum_variance());
        self.min_eigenvalue.push(rho.min_eigenvalue());
        self.edge_population.push(rho.edge_population());
        self.diagonals.push(rho.diagonal_populations());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub series: ObservableSeries,
    pub final_state: DensityMatrix,
}

pub fn check_stability(op: &impl Liouvillian, dt: f64) -> Result<()> {
    require_positive("time step dt", dt)?;
    let product = dt * op.spectral_bound();
    if product > STABILITY_GUARD * (1.0 + 4.0 * f64::EPSILON) {
        return Err(QlbeError::Configuration(format!(
            "dt * |L| = {product:.3e} exceeds the stability guard {STABILITY_GUARD}; use dt <= {:.6e}",
            STABILITY_GUARD / op.spectral_bound()
        )));
    }
    Ok(())
}

fn rk4(op: &impl Liouvillian, r: &CMatrix, dt: f64) -> CMatrix {
    let h = Complex64::new(dt, 0.0);
    let half = Complex64::new(0.5 * dt, 0.0);
    let k1 = op.apply(r);
    let k2 = op.apply(&(r + &k1 * half));
    let k3 = op.apply(&(r + &k2 * half));
    let k4 = op.apply(&(r + &k3 * h));
    let sum = k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4;
    let next = r + sum * (h / 6.0);
    (&next + next.adjoint()) * Complex64::new(0.5, 0.0)
}

/// One classical fourth-order Runge–Kutta step, re-hermitized.
pub fn step(rho: &DensityMatrix, op: &impl Liouvillian, dt: f64) -> Result<DensityMatrix> {
    if rho.grid() != op.grid() {
        return Err(contract("density matrix and generator use different grids"));
    }
    check_stability(op, dt)?;
    DensityMatrix::from_raw(*rho.grid(), rk4(op, rho.elements(), dt))
}

/// Repeated [`step`] with positivity and edge-population monitors checked on
/// every recorded step.
pub fn evolve(rho0: &DensityMatrix, cfg: &EvolutionConfig, op: &impl Liouvillian) -> Result<Evolution> {
    cfg.validate()?;
    if rho0.grid() != op.grid() {
        return Err(contract("density matrix and generator use different grids"));
    }
    check_stability(op, cfg.dt)?;
    let grid = *rho0.grid();
    let mut series = ObservableSeries::default();
    let mut current = rho0.clone();
    series.record(0.0, &current);
    monitor(&series, cfg)?;
    for n in 1..=cfg.n_steps {
        current = DensityMatrix::from_raw(grid, rk4(op, current.elements(), cfg.dt))?;
        if n % cfg.record_every == 0 {
            series.record(n as f64 * cfg.dt, &current);
            monitor(&series, cfg)?;
        }
    }
    Ok(Evolution {
        series,
        final_state: current,
    })
}

fn monitor(series: &ObservableSeries, cfg: &EvolutionConfig) -> Result<()> {
    let last = series.len() - 1;
    let time = series.times[last];
    let min_eig = series.min_eigenvalue[last];
    if min_eig < -cfg.positivity_tol {
        return Err(QlbeError::RunInvalidated {
            time,
            reason: format!("minimum eigenvalue {min_eig:e} below -{:e}", cfg.positivity_tol),
        });
    }
    let edge = series.edge_population[last];
    if edge > cfg.edge_population_tol {
        return Err(QlbeError::RunInvalidated {
            time,
            reason: format!("edge population {edge:e} above {:e}", cfg.edge_population_tol),
        });
    }
    Ok(())
}

/// Population transfer rates `R(P_i -> P_i + s dP)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub grid: MomentumGrid,
    pub shifts: Vec<i64>,
    /// `rates[a][i]` is the rate for `shifts[a]` out of grid point `i`.
    pub rates: Vec<Vec<f64>>,
}

impl RateTable {
    pub fn rate(&self, i: usize, shift: i64) -> f64 {
        self.shifts
            .iter()
            .position(|&s| s == shift)
            .map_or(0.0, |a| self.rates[a][i])
    }

    pub fn out_rate(&self, i: usize) -> f64 {
        self.rates.iter().map(|r| r[i]).sum()
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Largest total out-rate plus largest total in-rate, the analogue of
    /// [`Liouvillian::spectral_bound`].
    pub fn spectral_bound(&self) -> f64 {
        let n = self.grid.len();
        let mut gain = vec![0.0; n];
        for (a, &s) in self.shifts.iter().enumerate() {
            for i in 0..n {
                if let Some(t) = self.grid.shifted(i, s) {
                    gain[t] += self.rates[a][i];
                }
            }
        }
        let loss = (0..n).map(|i| self.out_rate(i)).fold(0.0, f64::max);
        loss + gain.into_iter().fold(0.0, f64::max)
    }

    /// `max |R - R_ref| / max R_ref` over every grid point and shift of `reference`.
    pub fn relative_gap(&self, reference: &RateTable) -> Result<f64> {
        if self.grid != reference.grid {
            return Err(contract("rate tables use different grids"));
        }
        let scale = reference.max_rate();
        if scale == 0.0 {
            return Err(domain("reference rate table is identically zero"));
        }
        let mut worst: f64 = 0.0;
        for (a, &s) in reference.shifts.iter().enumerate() {
            for i in 0..self.grid.len() {
                worst = worst.max((self.rate(i, s) - reference.rates[a][i]).abs());
            }
        }
        Ok(worst / scale)
    }

    /// `dp/dt` of the gain–loss master equation.
    pub fn derivative(&self, p: &[f64]) -> Vec<f64> {
        let mut dp = vec![0.0; p.len()];
        for (a, &s) in self.shifts.iter().enumerate() {
            for (i, &pi) in p.iter().enumerate() {
                if let Some(t) = self.grid.shifted(i, s) {
                    let flow = self.rates[a][i] * pi;
                    dp[t] += flow;
                    dp[i] -= flow;
                }
            }
        }
        dp
    }
}

/// On-shell (classical) transition rates of the linear Boltzmann equation.
///
/// `R(P -> P + Q) = (coupling / 2 pi) sum_c n_c rho_c(k_root) |f|^2 (m / |Q|) dQ`
/// with `k_root = (M*/2M) Q + (m/M) P`. This is the `tau -> infinity` limit of
/// the generator diagonal, obtained from `delta_tau^2 -> (tau / 2 pi) delta`
/// and the Jacobian `|dE*_fi / dk| = |Q| / m`.
pub fn classical_lbe_rates(grid: &MomentumGrid, cfg: &GeneratorConfig) -> Result<RateTable> {
    if cfg.shifts.contains(&0) {
        return Err(domain("zero momentum transfer has no on-shell rate"));
    }
    cfg.validate(grid)?;
    let m = cfg.masses.molecule();
    let prefactor = cfg.coupling() / (2.0 * PI) * grid.spacing();
    let rates = cfg
        .shifts
        .iter()
        .map(|&s| {
            let q = s as f64 * grid.spacing();
            let f2 = cfg.amplitude.at_transfer_sq(q * q).norm_sqr();
            (0..grid.len())
                .map(|i| {
                    if grid.shifted(i, s).is_none() {
                        return 0.0;
                    }
                    let k = on_shell_gas_momentum(grid.momentum(i), q, &cfg.masses);
                    let gas: f64 = cfg
                        .gas
                        .components()
                        .iter()
                        .map(|c| c.density * mb_density_sq(k * k, c, 1))
                        .sum();
                    prefactor * gas * f2 * m / q.abs()
                })
                .collect()
        })
        .collect();
    Ok(RateTable {
        grid: *grid,
        shifts: cfg.shifts.clone(),
        rates,
    })
}

/// Population transfer rates read off the generator diagonal.
pub fn quantum_diagonal_rates(generator: &Generator, shifts: &[i64]) -> RateTable {
    let grid = *generator.grid();
    RateTable {
        grid,
        shifts: shifts.to_vec(),
        rates: shifts
            .iter()
            .map(|&s| (0..grid.len()).map(|i| generator.transition_rate(i, s)).collect())
            .collect(),
    }
}

/// Recorded distributions of a classical run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSeries {
    pub times: Vec<f64>,
    pub distributions: Vec<Vec<f64>>,
}

/// Fourth-order Runge–Kutta stepping of the gain–loss master equation.
pub fn classical_evolve(
    p0: &[f64],
    rates: &RateTable,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<ClassicalSeries> {
    if p0.len() != rates.grid.len() {
        return Err(contract("initial distribution length differs from grid size"));
    }
    if p0.iter().any(|p| !(*p >= 0.0)) {
        return Err(domain("initial probabilities must be non-negative"));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(domain(format!("initial probabilities sum to {total}, expected 1")));
    }
    require_positive("time step dt", dt)?;
    if record_every == 0 {
        return Err(domain("record_every must be at least 1"));
    }
    let bound = rates.spectral_bound();
    if dt * bound > STABILITY_GUARD {
        return Err(QlbeError::Configuration(format!(
            "dt * |W| = {:.3e} exceeds the stability guard {STABILITY_GUARD}",
            dt * bound
        )));
    }
    let axpy = |p: &[f64], k: &[f64], h: f64| -> Vec<f64> { p.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let mut p = p0.to_vec();
    let mut series = ClassicalSeries {
        times: vec![0.0],
        distributions: vec![p.clone()],
    };
    for n in 1..=n_steps {
        let k1 = rates.derivative(&p);
        let k2 = rates.derivative(&axpy(&p, &k1, 0.5 * dt));
        let k3 = rates.derivative(&axpy(&p, &k2, 0.5 * dt));
        let k4 = rates.derivative(&axpy(&p, &k3, dt));
        for i in 0..p.len() {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        if n % record_every == 0 {
            series.times.push(n as f64 * dt);
            series.distributions.push(p.clone());
        }
    }
    Ok(series)
}

/// Largest absolute difference between recorded quantum populations and the
/// classical distributions at matching times.
pub fn compare_diagonal(quantum: &ObservableSeries, classical: &ClassicalSeries) -> Result<f64> {
    if quantum.len() != classical.times.len() {
        return Err(contract(format!(
            "series have {} and {} records",
            quantum.len(),
            classical.times.len()
        )));
    }
    let mut worst: f64 = 0.0;
    for (r, (tq, tc)) in quantum.times.iter().zip(&classical.times).enumerate() {
        if (tq - tc).abs() > 1e-12 * tq.abs().max(1.0) {
            return Err(contract(format!("record {r} is at t = {tq} and t = {tc}")));
        }
        let (dq, dc) = (&quantum.diagonals[r], &classical.distributions[r]);
        if dq.len() != dc.len() {
            return Err(contract("series use different grids"));
        }
        for (a, b) in dq.iter().zip(dc) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Exponential decay rate from a least-squares fit of `ln(values)` over the
/// first e-fold of the series.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(contract("decay fit needs matching, non-empty series"));
    }
    let v0 = values[0];
    require_positive("initial value of the decaying series", v0)?;
    let cutoff = v0 / std::f64::consts::E;
    let used = values.iter().take_while(|v| **v >= cutoff && **v > 0.0).count();
    if used < 2 {
        return Err(QlbeError::Accuracy(
            "fewer than two records inside the first e-fold; shorten the record stride".into(),
        ));
    }
    let (ts, ys): (Vec<f64>, Vec<f64>) = times[..used]
        .iter()
        .zip(&values[..used])
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    let n = used as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - t_mean) * (y - y_mean)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Coherence decay of a two-momentum superposition at one intercollision time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceRun {
    pub tau: f64,
    pub series: ObservableSeries,
    /// Instantaneous decay rate of `coherence_l1` at `t = 0`.
    pub initial_rate: f64,
    /// Rate fitted over the first e-fold.
    pub rate: f64,
}

/// Dissipator-only evolution of `(|i> + |j>)/sqrt(2)` and its fitted
/// `coherence_l1` decay rate.
///
/// `settings` receives the dissipator and the initial decay rate and returns
/// the step size, step count and monitors for the run.
pub fn decoherence_run(
    cfg: &GeneratorConfig,
    grid: MomentumGrid,
    pair: (usize, usize),
    settings: impl FnOnce(&Generator, f64) -> EvolutionConfig,
) -> Result<DecoherenceRun> {
    let dissipative = GeneratorConfig {
        include_hamiltonian: false,
        ..cfg.clone()
    };
    let generator = Generator::new(&dissipative, grid)?;
    let rho0 = DensityMatrix::two_point_superposition(grid, pair.0, pair.1)?;
    let initial_rate = coherence_decay_rate(&generator, rho0.elements());
    let evo = settings(&generator, initial_rate);
    let run = evolve(&rho0, &evo, &generator)?;
    let rate = fit_decay_rate(&run.series.times, &run.series.coherence_l1)?;
    Ok(DecoherenceRun {
        tau: cfg.tau,
        series: run.series,
        initial_rate,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{GasComponent, GasMixture, ScatteringAmplitude};
    use crate::generator::LindbladChannel;
    use crate::kinematics::Masses;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn config(tau: f64, shifts: Vec<i64>) -> GeneratorConfig {
        GeneratorConfig {
            masses: Masses::new(1.0, 1.0).unwrap(),
            gas: GasMixture::single(GasComponent::new(1.0, 1.0, 1.0).unwrap()),
            amplitude: ScatteringAmplitude::constant(0.5, 1.0).unwrap(),
            tau,
            k_order: 40,
            shifts,
            include_hamiltonian: true,
            coupling: None,
        }
    }

    #[test]
    fn zero_generator_is_identity() {
        let grid = MomentumGrid::new(8, 0.5).unwrap();
        let rho = DensityMatrix::gaussian_packet(grid, 0.2, 0.4).unwrap();
        let next = step(&rho, &Generator::zero(grid), 0.3).unwrap();
        let diff = (next.elements() - rho.elements()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn hamiltonian_leaves_diagonal_state() {
        let grid = MomentumGrid::new(8, 0.5).unwrap();
        let m = Masses::new(1.0, 1.0).unwrap();
        let gen = Generator::from_channels(grid, &[], Some(&m)).unwrap();
        let rho = DensityMatrix::diagonal(grid, &[1.0, 2.0, 3.0, 4.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let next = step(&rho, &gen, 0.01).unwrap();
        assert_eq!(next.elements(), rho.elements());
    }

    #[test]
    fn stability_guard_rejects_large_steps() {
        let grid = MomentumGrid::new(8, 0.5).unwrap();
        let gen = Generator::new(&config(1.0, vec![-1, 1]), grid).unwrap();
        let dt = 2.0 * STABILITY_GUARD / gen.spectral_bound();
        let rho = DensityMatrix::maximally_mixed(grid);
        assert!(matches!(step(&rho, &gen, dt), Err(QlbeError::Configuration(_))));
    }

    #[test]
    fn two_level_coherence_decay() {
        // Only shift +1 on a 4-point grid: nothing feeds rho_01, which therefore
        // decays as exp(-(G_0 + G_1) t / 2) with G_i the channel loss rates.
        let grid = MomentumGrid::new(4, 1.0).unwrap();
        let channel = LindbladChannel {
            gas_momentum: None,
            shift: 1,
            weight: 0.7,
            factors: [1.0, 0.6, 0.3, 0.9].map(|x| Complex64::new(x, 0.0)).to_vec(),
            component: None,
        };
        let gen = Generator::from_channels(grid, &[channel], None).unwrap();
        let gamma = 0.5 * (0.7 * 1.0 + 0.7 * 0.36);
        let dt = 0.05 / gen.spectral_bound();
        let steps = (1.0 / (gamma * dt)).ceil() as usize;
        let rho0 = DensityMatrix::two_point_superposition(grid, 0, 1).unwrap();
        let run = evolve(&rho0, &EvolutionConfig::new(dt, steps).edge_population_tol(1.0), &gen).unwrap();
        for (t, d) in run.series.times.iter().zip(&run.series.diagonals) {
            assert!(d.iter().all(|p| *p > -1e-15));
            let _ = t;
        }
        let r01 = run.final_state.elements()[(0, 1)].re;
        let t = steps as f64 * dt;
        assert!(gamma * t >= 1.0);
        assert!((r01 - 0.5 * (-gamma * t).exp()).abs() < 1e-6 * 0.5 * (-gamma * t).exp());
    }

    #[test]
    fn zero_steps_records_initial_state() {
        let grid = MomentumGrid::new(8, 0.5).unwrap();
        let rho = DensityMatrix::maximally_mixed(grid);
        let run = evolve(&rho, &EvolutionConfig::new(0.1, 0).edge_population_tol(1.0), &Generator::zero(grid)).unwrap();
        assert_eq!(run.series.len(), 1);
        assert_eq!(run.final_state, rho);
    }

    #[test]
    fn maximally_mixed_keeps_trace() {
        let grid = MomentumGrid::new(16, 0.25).unwrap();
        let gen = Generator::new(&config(2.0, vec![-2, -1, 1, 2]), grid).unwrap();
        let dt = STABILITY_GUARD / gen.spectral_bound();
        let rho = DensityMatrix::maximally_mixed(grid);
        let evo = EvolutionConfig::new(dt, 1000).record_every(100).edge_population_tol(1.0);
        let run = evolve(&rho, &evo, &gen).unwrap();
        assert!(run.series.trace_error.iter().all(|e| *e < 1e-10));
        assert!(run.final_state.hermiticity_defect() < 1e-13);
    }

    #[test]
    fn monitors_abort_runs() {
        let grid = MomentumGrid::new(8, 0.5).unwrap();
        let rho = DensityMatrix::maximally_mixed(grid);
        let err = evolve(&rho, &EvolutionConfig::new(0.1, 5), &Generator::zero(grid)).unwrap_err();
        assert!(matches!(err, QlbeError::RunInvalidated { time, .. } if time == 0.0));

        // population pumped to the upper edge
        let channel = LindbladChannel {
            gas_momentum: None,
            shift: 1,
            weight: 1.0,
            factors: vec![Complex64::new(1.0, 0.0); 8],
            component: None,
        };
        let gen = Generator::from_channels(grid, &[channel], None).unwrap();
        let start = DensityMatrix::two_point_superposition(grid, 3, 4).unwrap();
        let err = evolve(&start, &EvolutionConfig::new(0.05, 400).record_every(10), &gen).unwrap_err();
        assert!(matches!(err, QlbeError::RunInvalidated { time, .. } if time > 0.0));
    }

    #[test]
    fn classical_rate_table_basics() {
        let grid = MomentumGrid::new(12, 0.5).unwrap();
        let cfg = config(1.0, vec![-2, 1, 3]);
        let table = classical_lbe_rates(&grid, &cfg).unwrap();
        for (a, &s) in table.shifts.iter().enumerate() {
            for i in 0..grid.len() {
                match grid.shifted(i, s) {
                    Some(_) => assert!(table.rates[a][i] > 0.0),
                    None => assert_eq!(table.rates[a][i], 0.0),
                }
            }
        }
        assert!(matches!(
            classical_lbe_rates(&grid, &config(1.0, vec![0, 1])),
            Err(QlbeError::Domain(_))
        ));
        // equal masses, P = 0: k_root = Q
        let m = Masses::new(1.0, 1.0).unwrap();
        assert_eq!(on_shell_gas_momentum(0.0, 0.75, &m), 0.75);
    }

    #[test]
    fn quantum_rates_approach_classical_rates() {
        let grid = MomentumGrid::new(16, 0.25).unwrap();
        let base = GeneratorConfig {
            k_order: 120,
            ..config(2.0, vec![-3, -1, 2, 4])
        };
        let classical = classical_lbe_rates(&grid, &base).unwrap();
        let mut previous = f64::INFINITY;
        for tau in [2.0, 4.0, 8.0] {
            let gen = Generator::new(&base.with_tau(tau), grid).unwrap();
            let gap = quantum_diagonal_rates(&gen, &base.shifts).relative_gap(&classical).unwrap();
            assert!(gap < previous, "tau {tau}: gap {gap} >= {previous}");
            previous = gap;
        }
    }

    #[test]
    fn classical_evolution_rules() {
        let grid = MomentumGrid::new(12, 0.5).unwrap();
        let cfg = config(1.0, vec![-2, -1, 1, 2]);
        let rates = classical_lbe_rates(&grid, &cfg).unwrap();
        let dt = 0.05 / rates.spectral_bound();

        let zero = RateTable {
            rates: vec![vec![0.0; 12]; 4],
            ..rates.clone()
        };
        let mut p0 = vec![0.0; 12];
        p0[3] = 0.25;
        p0[8] = 0.75;
        let flat = classical_evolve(&p0, &zero, dt, 10, 1).unwrap();
        assert!(flat.distributions.iter().all(|d| d == &p0));

        let mut sym = vec![0.0; 12];
        sym[4] = 0.5;
        sym[7] = 0.5;
        let run = classical_evolve(&sym, &rates, dt, 200, 50).unwrap();
        for d in &run.distributions {
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12 * 200.0);
            for i in 0..12 {
                assert!((d[i] - d[11 - i]).abs() < 1e-13);
            }
        }
        assert!(classical_evolve(&[-0.1; 12], &rates, dt, 1, 1).is_err());
    }

    #[test]
    fn classical_long_time_reaches_detailed_balance() {
        // Oracle: null vector of the rate matrix, solved directly.
        let grid = MomentumGrid::new(24, 0.25).unwrap();
        let cfg = config(1.0, vec![-4, -3, -2, -1, 1, 2, 3, 4]);
        let rates = classical_lbe_rates(&grid, &cfg).unwrap();
        let n = grid.len();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for (a, &s) in rates.shifts.iter().enumerate() {
            for i in 0..n {
                if let Some(t) = grid.shifted(i, s) {
                    w[(t, i)] += rates.rates[a][i];
                    w[(i, i)] -= rates.rates[a][i];
                }
            }
        }
        for j in 0..n {
            w[(0, j)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(n);
        rhs[0] = 1.0;
        let fixed = w.lu().solve(&rhs).unwrap();
        let second = |p: &[f64]| -> f64 { p.iter().enumerate().map(|(i, x)| x * grid.momentum(i).powi(2)).sum() };
        let fixed_p2 = second(fixed.as_slice());

        let mut p0 = vec![0.0; n];
        p0[11] = 0.5;
        p0[12] = 0.5;
        let max_out = (0..n).map(|i| rates.out_rate(i)).fold(0.0, f64::max);
        let dt = 0.04 / max_out;
        let steps = (300.0 / (rates.max_rate() * dt)) as usize;
        let run = classical_evolve(&p0, &rates, dt, steps, steps).unwrap();
        let last = run.distributions.last().unwrap();
        assert_relative_eq!(second(last), fixed_p2, max_relative = 1e-7);
        // M = m in 1D: collisions exchange momenta, so the fixed point is thermal
        let m_particle = cfg.masses.particle();
        assert_relative_eq!(fixed_p2 / m_particle, 1.0, max_relative = 0.05);
    }

    #[test]
    fn compare_diagonal_rules() {
        let grid = MomentumGrid::new(8, 0.5).unwrap();
        let rho = DensityMatrix::diagonal(grid, &[0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let run = evolve(&rho, &EvolutionConfig::new(0.1, 0).edge_population_tol(1.0), &Generator::zero(grid)).unwrap();
        let same = ClassicalSeries {
            times: vec![0.0],
            distributions: vec![rho.diagonal_populations()],
        };
        assert_eq!(compare_diagonal(&run.series, &same).unwrap(), 0.0);
        let orthogonal = ClassicalSeries {
            times: vec![0.0],
            distributions: vec![vec![0.0, 0.0, 0.0, 0.0, 0.9, 0.1, 0.0, 0.0]],
        };
        assert_eq!(compare_diagonal(&run.series, &orthogonal).unwrap(), 0.9);
        let mismatched = ClassicalSeries {
            times: vec![0.0, 0.1],
            distributions: vec![vec![0.0; 8], vec![0.0; 8]],
        };
        assert!(matches!(compare_diagonal(&run.series, &mismatched), Err(QlbeError::ContractViolation(_))));
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-0.8 * t).exp()).collect();
        assert_relative_eq!(fit_decay_rate(&times, &values).unwrap(), 0.8, max_relative = 1e-12);
        assert!(fit_decay_rate(&[0.0, 1.0], &[1.0, 0.01]).is_err());
    }
}

//! Lindblad generator of the finite-intercollision-time QLBE on a 1D momentum
//! grid, and a square-root-kernel reference generator.
//!
//! A collision channel is labelled by a gas momentum node `k` and a transfer
//! `Q = s dP`. Its Lindblad operator acts as
//!
//! ```text
//! V |P> = f(k*_f, k*_i) delta_tau(E*_fi) |P + Q>
//! ```
//!
//! with the relative momenta and energy balance evaluated at `(k, P, Q)`.
//! Shifts that leave the grid map to zero, so `V^dagger V` is diagonal and
//! only counts on-grid targets. This keeps the Lindblad trace identity exact
//! on the truncated space.
//!
//! The rate prefactor is `coupling / tau` with the default coupling
//! `2 pi / m*^2`; channel weights additionally carry the quadrature weight of
//! `k`, the component density and `dQ`. In one dimension the prefactor does
//! not have the units of the three-dimensional expression, which is why the
//! coupling is exposed as a plain constant.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{contract, domain, require_positive, QlbeError, Result};
use crate::gas::{gas_quadrature, mixture_density_sq, GasMixture, ScatteringAmplitude};
use crate::grid::{CMatrix, DensityMatrix, MomentumGrid};
use crate::kinematics::{com_momenta_1d, delta_tau_unchecked, Masses};

/// Anything that maps a density matrix to its time derivative.
pub trait Liouvillian {
    fn grid(&self) -> &MomentumGrid;

    /// `d rho / dt` for the given state.
    fn apply(&self, rho: &CMatrix) -> CMatrix;

    /// Upper bound on the element-wise operator norm, used by the step-size guard.
    fn spectral_bound(&self) -> f64;
}

/// One collision channel: a shift by `Q` composed with a diagonal factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    /// Gas momentum node; `None` when the gas is absorbed into the operator.
    pub gas_momentum: Option<f64>,
    /// Transfer as an integer number of grid spacings.
    pub shift: i64,
    /// Non-negative rate factor.
    pub weight: f64,
    /// Diagonal factor `D(P_i)` on every grid point.
    pub factors: Vec<Complex64>,
    /// Index of the gas component this channel came from.
    pub component: Option<usize>,
}

impl LindbladChannel {
    pub fn transfer(&self, grid: &MomentumGrid) -> f64 {
        self.shift as f64 * grid.spacing()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub masses: Masses,
    pub gas: GasMixture,
    pub amplitude: ScatteringAmplitude,
    pub tau: f64,
    /// Gauss–Hermite order of the gas-momentum quadrature.
    pub k_order: usize,
    /// Transfers in units of the grid spacing.
    pub shifts: Vec<i64>,
    pub include_hamiltonian: bool,
    /// Overrides the default coupling `2 pi / m*^2`.
    pub coupling: Option<f64>,
}

impl GeneratorConfig {
    pub fn validate(&self, grid: &MomentumGrid) -> Result<()> {
        require_positive("intercollision time tau", self.tau)?;
        if self.gas.molecule_mass() != self.masses.molecule() {
            return Err(contract(format!(
                "gas molecule mass {} differs from kinematic molecule mass {}",
                self.gas.molecule_mass(),
                self.masses.molecule()
            )));
        }
        if self.k_order < 2 {
            return Err(domain(format!("gas quadrature order must be >= 2, got {}", self.k_order)));
        }
        for &s in &self.shifts {
            if s == 0 || s.unsigned_abs() as usize >= grid.len() {
                return Err(QlbeError::Configuration(format!(
                    "shift {s} is not a nonzero on-grid transfer for N = {}",
                    grid.len()
                )));
            }
        }
        if let Some(c) = self.coupling {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(domain(format!("coupling must be non-negative, got {c}")));
            }
        }
        Ok(())
    }

    /// Coupling constant; the rate prefactor is `coupling / tau`.
    pub fn coupling(&self) -> f64 {
        self.coupling
            .unwrap_or_else(|| 2.0 * PI / self.masses.reduced().powi(2))
    }

    pub fn prefactor(&self) -> f64 {
        self.coupling() / self.tau
    }

    pub fn with_gas(&self, gas: GasMixture) -> Self {
        Self { gas, ..self.clone() }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..self.clone() }
    }
}

/// Diagonal factor `f(k*_f, k*_i) delta_tau(E*_fi)` of the channel `(k, Q)`
/// at particle momentum `p`.
pub fn channel_factor(cfg: &GeneratorConfig, k: f64, p: f64, q: f64) -> Complex64 {
    let (k_i, k_f, e) = com_momenta_1d(k, p, q, &cfg.masses);
    cfg.amplitude.at_transfer_sq((k_f - k_i).powi(2)) * delta_tau_unchecked(e, cfg.tau)
}

/// Gas momentum that puts `(P, Q)` on shell in one dimension,
/// `(M*/2M) Q + (m/M) P`.
pub fn on_shell_gas_momentum(p: f64, q: f64, masses: &Masses) -> f64 {
    masses.total() / (2.0 * masses.particle()) * q + masses.molecule() / masses.particle() * p
}

/// Channels of the finite-time QLBE: one per gas component, gas node and shift.
pub fn build_channels(cfg: &GeneratorConfig, grid: &MomentumGrid) -> Result<Vec<LindbladChannel>> {
    cfg.validate(grid)?;
    let prefactor = cfg.prefactor();
    let momenta = grid.values();
    let mut channels = Vec::new();
    for (ci, comp) in cfg.gas.components().iter().enumerate() {
        if comp.density == 0.0 {
            continue;
        }
        for node in gas_quadrature(comp, 1, cfg.k_order)? {
            let k = node.k[0];
            for &s in &cfg.shifts {
                let q = s as f64 * grid.spacing();
                let factors = momenta.iter().map(|&p| channel_factor(cfg, k, p, q)).collect();
                channels.push(LindbladChannel {
                    gas_momentum: Some(k),
                    shift: s,
                    weight: prefactor * node.weight * comp.density * grid.spacing(),
                    factors,
                    component: Some(ci),
                });
            }
        }
    }
    Ok(channels)
}

/// Square-root-kernel reference channels, one per shift.
///
/// The gas enters the operator through `sqrt(n rho_mix(k~(P, Q)))`, where
/// `k~` is the on-shell gas momentum, so coherences between `P` and `P'`
/// pick up the geometric mean of two gas weights. Diagonal rates coincide
/// with the on-shell classical rates. This is a schematic probe of the
/// square-root structure, not a reproduction of any particular equation.
pub fn build_sqrt_variant_channels(
    cfg: &GeneratorConfig,
    grid: &MomentumGrid,
) -> Result<Vec<LindbladChannel>> {
    cfg.validate(grid)?;
    let momenta = grid.values();
    let m = cfg.masses.molecule();
    let weight = cfg.coupling() / (2.0 * PI) * grid.spacing();
    Ok(cfg
        .shifts
        .iter()
        .map(|&s| {
            let q = s as f64 * grid.spacing();
            let amp = cfg.amplitude.at_transfer_sq(q * q) * (m / q.abs()).sqrt();
            let factors = momenta
                .iter()
                .map(|&p| {
                    let k = on_shell_gas_momentum(p, q, &cfg.masses);
                    amp * mixture_density_sq(k * k, &cfg.gas, 1).sqrt()
                })
                .collect();
            LindbladChannel {
                gas_momentum: None,
                shift: s,
                weight,
                factors,
                component: None,
            }
        })
        .collect())
}

fn check_channels(channels: &[LindbladChannel], grid: &MomentumGrid) -> Result<()> {
    for ch in channels {
        if ch.factors.len() != grid.len() {
            return Err(contract(format!(
                "channel has {} factors, grid has {} points",
                ch.factors.len(),
                grid.len()
            )));
        }
        if !(ch.weight >= 0.0) {
            return Err(domain(format!("channel weight must be non-negative, got {}", ch.weight)));
        }
        if ch.shift.unsigned_abs() as usize >= grid.len() {
            return Err(QlbeError::Configuration(format!("shift {} leaves the grid", ch.shift)));
        }
    }
    Ok(())
}

/// `sum_c w_c (V_c rho V_c^dagger - 1/2 {V_c^dagger V_c, rho})`, channel by channel.
pub fn apply_dissipator(channels: &[LindbladChannel], rho: &DensityMatrix) -> Result<CMatrix> {
    let grid = rho.grid();
    check_channels(channels, grid)?;
    let n = grid.len();
    let r = rho.elements();
    let mut out = CMatrix::zeros(n, n);
    let mut loss = vec![0.0; n];
    for ch in channels {
        for j in 0..n {
            let Some(jt) = grid.shifted(j, ch.shift) else { continue };
            let dj = ch.factors[j].conj();
            loss[j] += ch.weight * ch.factors[j].norm_sqr();
            for i in 0..n {
                let Some(it) = grid.shifted(i, ch.shift) else { continue };
                out[(it, jt)] += ch.factors[i] * dj * r[(i, j)] * ch.weight;
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] -= r[(i, j)] * (0.5 * (loss[i] + loss[j]));
        }
    }
    Ok(out)
}

/// `-i [P^2 / 2M, rho]`.
pub fn apply_hamiltonian(rho: &DensityMatrix, masses: &Masses) -> CMatrix {
    let grid = rho.grid();
    let energies: Vec<f64> = grid
        .values()
        .iter()
        .map(|p| p * p / (2.0 * masses.particle()))
        .collect();
    hamiltonian_term(&energies, rho.elements())
}

fn hamiltonian_term(energies: &[f64], r: &CMatrix) -> CMatrix {
    let n = energies.len();
    CMatrix::from_fn(n, n, |i, j| r[(i, j)] * Complex64::new(0.0, -(energies[i] - energies[j])))
}

#[derive(Debug, Clone, PartialEq)]
struct ShiftBlock {
    shift: i64,
    // kernel[(i, j)] = sum_c w_c D_c(P_i) conj(D_c(P_j)) for source indices
    kernel: CMatrix,
}

/// Channels folded into one kernel per shift.
///
/// `V rho V^dagger` only rescales and shifts matrix elements, so all channels
/// sharing a shift combine into one kernel. Application then costs
/// `O(|shifts| N^2)` whatever the gas quadrature order.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    grid: MomentumGrid,
    blocks: Vec<ShiftBlock>,
    loss: Vec<f64>,
    energies: Option<Vec<f64>>,
}

impl Generator {
    pub fn from_channels(
        grid: MomentumGrid,
        channels: &[LindbladChannel],
        hamiltonian: Option<&Masses>,
    ) -> Result<Self> {
        check_channels(channels, &grid)?;
        let n = grid.len();
        let mut blocks: Vec<ShiftBlock> = Vec::new();
        let mut loss = vec![0.0; n];
        for ch in channels {
            let pos = match blocks.iter().position(|b| b.shift == ch.shift) {
                Some(pos) => pos,
                None => {
                    blocks.push(ShiftBlock {
                        shift: ch.shift,
                        kernel: CMatrix::zeros(n, n),
                    });
                    blocks.len() - 1
                }
            };
            let kernel = &mut blocks[pos].kernel;
            for j in 0..n {
                if grid.shifted(j, ch.shift).is_none() {
                    continue;
                }
                let dj = ch.factors[j].conj() * ch.weight;
                loss[j] += ch.weight * ch.factors[j].norm_sqr();
                for i in 0..n {
                    if grid.shifted(i, ch.shift).is_some() {
                        kernel[(i, j)] += ch.factors[i] * dj;
                    }
                }
            }
        }
        let energies = hamiltonian.map(|m| {
            grid.values()
                .iter()
                .map(|p| p * p / (2.0 * m.particle()))
                .collect()
        });
        Ok(Self {
            grid,
            blocks,
            loss,
            energies,
        })
    }

    /// Finite-time QLBE generator for `cfg`.
    pub fn new(cfg: &GeneratorConfig, grid: MomentumGrid) -> Result<Self> {
        let channels = build_channels(cfg, &grid)?;
        let h = cfg.include_hamiltonian.then_some(&cfg.masses);
        Self::from_channels(grid, &channels, h)
    }

    /// Square-root-kernel reference generator for `cfg`.
    pub fn sqrt_variant(cfg: &GeneratorConfig, grid: MomentumGrid) -> Result<Self> {
        let channels = build_sqrt_variant_channels(cfg, &grid)?;
        let h = cfg.include_hamiltonian.then_some(&cfg.masses);
        Self::from_channels(grid, &channels, h)
    }

    /// Generator that does nothing.
    pub fn zero(grid: MomentumGrid) -> Self {
        Self {
            grid,
            blocks: Vec::new(),
            loss: vec![0.0; grid.len()],
            energies: None,
        }
    }

    pub fn has_hamiltonian(&self) -> bool {
        self.energies.is_some()
    }

    /// Total out-scattering rate `<P_i| sum w V^dagger V |P_i>`.
    pub fn loss_rates(&self) -> &[f64] {
        &self.loss
    }

    /// Rate of the population transfer `P_i -> P_i + s dP`.
    pub fn transition_rate(&self, i: usize, shift: i64) -> f64 {
        self.blocks
            .iter()
            .find(|b| b.shift == shift)
            .filter(|_| self.grid.shifted(i, shift).is_some())
            .map_or(0.0, |b| b.kernel[(i, i)].re)
    }

    /// Kernel element `sum_c w_c D_c(P_i) conj(D_c(P_j))` for a shift.
    pub fn kernel(&self, shift: i64, i: usize, j: usize) -> Complex64 {
        self.blocks
            .iter()
            .find(|b| b.shift == shift)
            .map_or(Complex64::new(0.0, 0.0), |b| b.kernel[(i, j)])
    }

    pub fn shifts(&self) -> Vec<i64> {
        self.blocks.iter().map(|b| b.shift).collect()
    }

    pub fn apply_to(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        if rho.grid() != &self.grid {
            return Err(contract("density matrix and generator use different grids"));
        }
        Ok(self.apply(rho.elements()))
    }
}

impl Liouvillian for Generator {
    fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    fn apply(&self, r: &CMatrix) -> CMatrix {
        let n = self.grid.len();
        let mut out = match &self.energies {
            Some(e) => hamiltonian_term(e, r),
            None => CMatrix::zeros(n, n),
        };
        for block in &self.blocks {
            let s = block.shift;
            let (lo, hi) = if s > 0 { (0, n - s as usize) } else { ((-s) as usize, n) };
            for j in lo..hi {
                let jt = (j as i64 + s) as usize;
                for i in lo..hi {
                    let it = (i as i64 + s) as usize;
                    out[(it, jt)] += block.kernel[(i, j)] * r[(i, j)];
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] -= r[(i, j)] * (0.5 * (self.loss[i] + self.loss[j]));
            }
        }
        out
    }

    fn spectral_bound(&self) -> f64 {
        // |L(rho)_ab| <= (|w_ab| + (G_a + G_b)/2 + (in_a + in_b)/2) max|rho|
        let n = self.grid.len();
        let omega = self.energies.as_ref().map_or(0.0, |e| {
            let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        });
        let mut gain = vec![0.0; n];
        for block in &self.blocks {
            for i in 0..n {
                if let Some(t) = self.grid.shifted(i, block.shift) {
                    gain[t] += block.kernel[(i, i)].re;
                }
            }
        }
        let max_loss = self.loss.iter().copied().fold(0.0, f64::max);
        let max_gain = gain.iter().copied().fold(0.0, f64::max);
        omega + max_loss + max_gain
    }
}

/// Which generator an additivity check builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorVariant {
    Linear,
    Sqrt,
}

/// Largest matrix-element deviation of `L_mix - (L_1 + L_2)` over the probe
/// basis, split by output sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditivityDefect {
    pub diagonal: f64,
    pub coherence: f64,
}

impl AdditivityDefect {
    pub fn max(&self) -> f64 {
        self.diagonal.max(self.coherence)
    }
}

/// Hermitian matrix units: `E_ii`, `E_ij + E_ji` and `i (E_ij - E_ji)`.
pub fn hermitian_probe_basis(n: usize) -> Vec<CMatrix> {
    let one = Complex64::new(1.0, 0.0);
    let im = Complex64::new(0.0, 1.0);
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            let mut a = CMatrix::zeros(n, n);
            if i == j {
                a[(i, i)] = one;
                basis.push(a);
            } else {
                a[(i, j)] = one;
                a[(j, i)] = one;
                basis.push(a);
                let mut b = CMatrix::zeros(n, n);
                b[(i, j)] = im;
                b[(j, i)] = -im;
                basis.push(b);
            }
        }
    }
    basis
}

/// Gas-additivity defect of the dissipator for a two-component gas.
///
/// Only the gas (dissipative) part is compared; the free Hamiltonian would be
/// counted twice in `L_1 + L_2`.
pub fn additivity_defect(
    cfg: &GeneratorConfig,
    grid: &MomentumGrid,
    variant: GeneratorVariant,
) -> Result<AdditivityDefect> {
    let comps = cfg.gas.components();
    if comps.len() != 2 {
        return Err(domain(format!(
            "additivity check needs exactly two gas components, got {}",
            comps.len()
        )));
    }
    let dissipative = GeneratorConfig {
        include_hamiltonian: false,
        ..cfg.clone()
    };
    let build = |c: &GeneratorConfig| match variant {
        GeneratorVariant::Linear => Generator::new(c, *grid),
        GeneratorVariant::Sqrt => Generator::sqrt_variant(c, *grid),
    };
    let mixed = build(&dissipative)?;
    let first = build(&dissipative.with_gas(GasMixture::single(comps[0])))?;
    let second = build(&dissipative.with_gas(GasMixture::single(comps[1])))?;

    let mut defect = AdditivityDefect {
        diagonal: 0.0,
        coherence: 0.0,
    };
    for probe in hermitian_probe_basis(grid.len()) {
        let diff = mixed.apply(&probe) - first.apply(&probe) - second.apply(&probe);
        for j in 0..grid.len() {
            for i in 0..grid.len() {
                let v = diff[(i, j)].norm();
                if i == j {
                    defect.diagonal = defect.diagonal.max(v);
                } else {
                    defect.coherence = defect.coherence.max(v);
                }
            }
        }
    }
    Ok(defect)
}

/// Instantaneous relative decay rate `-(dC/dt) / C` of the off-diagonal l1
/// norm `C = sum_{i != j} |rho_ij|` under `op`.
///
/// Elements that are zero contribute `|d rho_ij / dt|`, the one-sided
/// derivative of the absolute value.
pub fn coherence_decay_rate(op: &impl Liouvillian, rho: &CMatrix) -> f64 {
    let rate = op.apply(rho);
    let n = rho.nrows();
    let mut c = 0.0;
    let mut dc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let x = rho[(i, j)];
            let dx = rate[(i, j)];
            let mag = x.norm();
            c += mag;
            dc += if mag > 0.0 { (x.conj() * dx).re / mag } else { dx.norm() };
        }
    }
    if c == 0.0 {
        0.0
    } else {
        -dc / c
    }
}

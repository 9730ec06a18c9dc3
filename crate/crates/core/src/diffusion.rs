//! Friction and diffusion constants of the diffusion limit, the
//! complete-positivity bound on position diffusion, and the resulting
//! constraint on the intercollision time.
//!
//! The Brownian particle (mass `M`) is heavy compared with the molecules
//! (mass `m`). The quadratures below use the three-dimensional gas.

use std::f64::consts::PI;

use crate::error::{contract, domain, require_positive, QlbeError, Result};
use crate::gas::{amplitude_eval, GasComponent, ScatteringAmplitude};
use crate::kinematics::{delta_tau_prime_sq_integral, intercollision_time, Masses};
use crate::quadrature::{gauss_hermite, gauss_legendre, semi_infinite_legendre, NodeRule};

/// Node counts and tolerances for the diffusion-limit quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionQuadrature {
    /// Mapped Gauss–Legendre nodes for `|Q|`.
    pub radial_order: usize,
    /// Gauss–Hermite nodes per axis of the transverse gas momentum.
    pub perp_order: usize,
    /// Largest accepted relative change between orders `p` and `p + 4`.
    pub tol: f64,
    /// Oscillation periods kept inside the energy window of `[delta_tau']^2`.
    pub window_periods: usize,
    pub nodes_per_period: usize,
}

impl Default for DiffusionQuadrature {
    fn default() -> Self {
        Self {
            radial_order: 48,
            perp_order: 24,
            tol: 1e-4,
            window_periods: 64,
            nodes_per_period: 32,
        }
    }
}

/// How the direction of `Q` is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularTreatment {
    /// Isotropic reduction: `int dOmega = 4 pi`, `Q_a Q_b -> delta_ab Q^2 / 3`.
    #[default]
    Symmetric,
    /// Gauss–Legendre in `cos(theta)` times a uniform azimuthal rule.
    Quadrature { polar: usize, azimuthal: usize },
}

/// Momentum diffusion and friction, `beta eta = D_pp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumDiffusion {
    pub d_pp: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConstants {
    pub eta: f64,
    pub d_pp: f64,
    pub d_xx: f64,
    pub cp_satisfied: bool,
    /// `D_xx - (beta / 4M)^2 D_pp`.
    pub cp_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpVerdict {
    pub satisfied: bool,
    pub margin: f64,
}

fn check_inputs(gas: &GasComponent, masses: &Masses, quad: &DiffusionQuadrature) -> Result<()> {
    require_positive("molecule mass m", gas.mass)?;
    require_positive("inverse temperature beta", gas.beta)?;
    if !(gas.density >= 0.0) || !gas.density.is_finite() {
        return Err(domain(format!("gas density must be non-negative, got {}", gas.density)));
    }
    if (gas.mass - masses.molecule()).abs() > 1e-12 * masses.molecule() {
        return Err(contract(format!(
            "gas molecule mass {} differs from the collision masses ({})",
            gas.mass,
            masses.molecule()
        )));
    }
    if quad.radial_order < 2 || quad.perp_order < 2 {
        return Err(domain("quadrature orders must be >= 2"));
    }
    if !(quad.tol > 0.0) {
        return Err(domain("quadrature tolerance must be positive"));
    }
    Ok(())
}

struct Direction {
    n: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
    weight: f64,
}

fn direction(n: [f64; 3], weight: f64) -> Direction {
    // any unit vector not parallel to n seeds the transverse basis
    let seed = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let e1 = cross(n, seed);
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = [e1[0] / norm, e1[1] / norm, e1[2] / norm];
    Direction {
        n,
        e1,
        e2: cross(n, e1),
        weight,
    }
}

/// Directions of `Q` with weights for `int dOmega w(n) g`.
fn directions(angular: AngularTreatment, weight: impl Fn([f64; 3]) -> f64, symmetric: f64) -> Result<Vec<Direction>> {
    match angular {
        AngularTreatment::Symmetric => Ok(vec![direction([0.0, 0.0, 1.0], symmetric)]),
        AngularTreatment::Quadrature { polar, azimuthal } => {
            if azimuthal == 0 {
                return Err(domain("azimuthal node count must be positive"));
            }
            let mu_rule = gauss_legendre(polar)?;
            let dphi = 2.0 * PI / azimuthal as f64;
            let mut out = Vec::with_capacity(polar * azimuthal);
            for (mu, w_mu) in mu_rule.iter() {
                let s = (1.0 - mu * mu).sqrt();
                for j in 0..azimuthal {
                    let phi = (j as f64 + 0.5) * dphi;
                    let n = [s * phi.cos(), s * phi.sin(), mu];
                    out.push(direction(n, w_mu * dphi * weight(n)));
                }
            }
            Ok(out)
        }
    }
}

/// `int_0^inf dQ Q^3 int dOmega w(n) int d^2k_perp rho_g(k_perp + Q/2) |f(k_perp - Q/2, k_perp + Q/2)|^2`.
fn cubic_moment(
    gas: &GasComponent,
    f: &ScatteringAmplitude,
    radial_order: usize,
    perp_order: usize,
    dirs: &[Direction],
) -> Result<f64> {
    let (m, beta) = (gas.mass, gas.beta);
    let radial = semi_infinite_legendre(radial_order, (8.0 * m / beta).sqrt())?;
    let perp = transverse_rule(gas, perp_order)?;
    let parallel_norm = (beta / (2.0 * PI * m)).sqrt();
    let mut total = 0.0;
    for (q, w_q) in radial.iter() {
        let along = parallel_norm * (-beta * q * q / (8.0 * m)).exp();
        if along == 0.0 {
            continue;
        }
        let mut shell = 0.0;
        for dir in dirs {
            let mut inner = 0.0;
            for (&(a, b), &w) in perp.0.iter().zip(&perp.1) {
                let k_perp: [f64; 3] = std::array::from_fn(|c| a * dir.e1[c] + b * dir.e2[c]);
                let k_f: [f64; 3] = std::array::from_fn(|c| k_perp[c] - 0.5 * q * dir.n[c]);
                let k_i: [f64; 3] = std::array::from_fn(|c| k_perp[c] + 0.5 * q * dir.n[c]);
                inner += w * amplitude_eval(f, &k_f, &k_i).norm_sqr();
            }
            shell += dir.weight * inner;
        }
        total += w_q * q.powi(3) * along * shell;
    }
    Ok(total)
}

type PlaneRule = (Vec<(f64, f64)>, Vec<f64>);

/// Tensor Gauss–Hermite rule for the 2D Maxwell–Boltzmann marginal.
fn transverse_rule(gas: &GasComponent, order: usize) -> Result<PlaneRule> {
    let rule: NodeRule = gauss_hermite(order)?;
    let scale = (2.0 * gas.mass / gas.beta).sqrt();
    let axis: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (scale * x, w / PI.sqrt())).collect();
    let mut nodes = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for &(a, wa) in &axis {
        for &(b, wb) in &axis {
            nodes.push((a, b));
            weights.push(wa * wb);
        }
    }
    Ok((nodes, weights))
}

fn converged(name: &str, coarse: f64, fine: f64, tol: f64) -> Result<f64> {
    let scale = fine.abs().max(coarse.abs());
    if scale > 0.0 && (fine - coarse).abs() > tol * scale {
        return Err(QlbeError::Accuracy(format!(
            "{name} quadrature not converged: {coarse:e} vs {fine:e} between orders (relative tolerance {tol:e})"
        )));
    }
    Ok(fine)
}

/// Momentum diffusion `D_pp = (n/6m) int d^3Q Q int d^2k_perp rho_g |f|^2`
/// and friction `eta = D_pp / beta`.
///
/// For a constant amplitude the integral has the closed form
/// `D_pp = (32/3) sqrt(2 pi) n |f0|^2 sqrt(m) beta^{-3/2}`.
pub fn dpp_quadrature(
    gas: &GasComponent,
    f: &ScatteringAmplitude,
    masses: &Masses,
    quad: &DiffusionQuadrature,
) -> Result<MomentumDiffusion> {
    dpp_with_angular(gas, f, masses, quad, AngularTreatment::Symmetric)
}

pub fn dpp_with_angular(
    gas: &GasComponent,
    f: &ScatteringAmplitude,
    masses: &Masses,
    quad: &DiffusionQuadrature,
    angular: AngularTreatment,
) -> Result<MomentumDiffusion> {
    check_inputs(gas, masses, quad)?;
    if gas.density == 0.0 {
        return Ok(MomentumDiffusion { d_pp: 0.0, eta: 0.0 });
    }
    let dirs = directions(angular, |_| 1.0, 4.0 * PI)?;
    let prefactor = gas.density / (6.0 * gas.mass);
    let coarse = prefactor * cubic_moment(gas, f, quad.radial_order, quad.perp_order, &dirs)?;
    let fine = prefactor * cubic_moment(gas, f, quad.radial_order + 4, quad.perp_order + 4, &dirs)?;
    let d_pp = converged("D_pp", coarse, fine, quad.tol)?;
    Ok(MomentumDiffusion {
        d_pp,
        eta: d_pp / gas.beta,
    })
}

/// `D_pp` for a constant amplitude in closed form.
pub fn dpp_constant_amplitude(gas: &GasComponent, f0_abs_sq: f64) -> f64 {
    32.0 / 3.0 * (2.0 * PI).sqrt() * gas.density * f0_abs_sq * gas.mass.sqrt() * gas.beta.powf(-1.5)
}

/// Position diffusion `D_xx = (tau / M)^2 D_pp / 3`.
pub fn dxx_from_tau(d_pp: f64, tau: f64, masses: &Masses) -> Result<f64> {
    require_positive("intercollision time tau", tau)?;
    Ok(tau * tau * d_pp / (3.0 * masses.particle().powi(2)))
}

/// Position diffusion from the coefficient of `P rho P` in the second-order
/// expansion of the generator around `P = 0`.
///
/// The gas density and the amplitude are frozen at `k_par = Q/2`; the
/// remaining `int [delta_tau'(E_fi)]^2 dk_par` is done numerically in energy
/// with the Jacobian `dk_par = (m/Q) dE_fi`. The heavy-particle limit
/// replaces the reduced mass by `m`.
pub fn dxx_coefficient_quadrature(
    gas: &GasComponent,
    f: &ScatteringAmplitude,
    masses: &Masses,
    tau: f64,
    quad: &DiffusionQuadrature,
    angular: AngularTreatment,
) -> Result<f64> {
    check_inputs(gas, masses, quad)?;
    require_positive("intercollision time tau", tau)?;
    let inner = delta_tau_prime_sq_integral(tau, quad.window_periods, quad.nodes_per_period)?.value();
    if gas.density == 0.0 {
        return Ok(0.0);
    }
    // component of Q along the probed momentum axis (z)
    let dirs = directions(angular, |n| n[2] * n[2], 4.0 * PI / 3.0)?;
    let (m, big_m) = (gas.mass, masses.particle());
    // (1/2) D_xx = (2 pi n / (tau m^2 M^2)) int d^3Q Q_z^2 (m/Q) inner S(Q)
    let prefactor = 2.0 * 2.0 * PI * gas.density / (tau * m * m * big_m * big_m) * m * inner;
    let coarse = prefactor * cubic_moment(gas, f, quad.radial_order, quad.perp_order, &dirs)?;
    let fine = prefactor * cubic_moment(gas, f, quad.radial_order + 4, quad.perp_order + 4, &dirs)?;
    converged("D_xx", coarse, fine, quad.tol)
}

/// Complete-positivity bound `D_xx >= (beta / 4M)^2 D_pp`.
pub fn cp_check(d_xx: f64, d_pp: f64, beta: f64, masses: &Masses) -> CpVerdict {
    let margin = d_xx - (beta / (4.0 * masses.particle())).powi(2) * d_pp;
    CpVerdict {
        satisfied: margin >= 0.0,
        margin,
    }
}

/// Intercollision time at which `D_xx = (tau/M)^2 D_pp / 3` meets the bound.
pub fn cp_threshold_tau(beta: f64) -> f64 {
    3.0_f64.sqrt() * beta / 4.0
}

/// Bisection for the `tau` where [`cp_check`] on [`dxx_from_tau`] flips.
pub fn locate_cp_threshold(d_pp: f64, beta: f64, masses: &Masses, bracket: (f64, f64), rel_tol: f64) -> Result<f64> {
    require_positive("momentum diffusion D_pp", d_pp)?;
    require_positive("relative tolerance", rel_tol)?;
    let (mut lo, mut hi) = bracket;
    require_positive("lower bracket", lo)?;
    if !(hi > lo) {
        return Err(domain("bracket must satisfy 0 < lo < hi"));
    }
    let ok = |tau: f64| -> Result<bool> { Ok(cp_check(dxx_from_tau(d_pp, tau, masses)?, d_pp, beta, masses).satisfied) };
    if ok(lo)? || !ok(hi)? {
        return Err(domain("bracket does not enclose the complete-positivity flip"));
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `D_pp`, `eta`, `D_xx` at a given `tau`, with the complete-positivity verdict.
pub fn diffusion_constants(
    gas: &GasComponent,
    f: &ScatteringAmplitude,
    masses: &Masses,
    tau: f64,
    quad: &DiffusionQuadrature,
) -> Result<DiffusionConstants> {
    let md = dpp_quadrature(gas, f, masses, quad)?;
    let d_xx = dxx_from_tau(md.d_pp, tau, masses)?;
    let cp = cp_check(d_xx, md.d_pp, gas.beta, masses);
    Ok(DiffusionConstants {
        eta: md.eta,
        d_pp: md.d_pp,
        d_xx,
        cp_satisfied: cp.satisfied,
        cp_margin: cp.margin,
    })
}

/// `tau k_B T` against its lower bound `sqrt(3)/4`, and the equivalent
/// density-form comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauConstraintReport {
    pub tau: f64,
    pub beta: f64,
    pub tau_kt: f64,
    pub threshold: f64,
    pub satisfied: bool,
    pub at_boundary: bool,
    /// `sqrt(m k_B T) / (sigma n_g)`, when the gas is specified.
    pub density_ratio: Option<f64>,
    /// Constant `c` for which `c sqrt(m k_B T) >= sigma n_g` restates the bound
    /// once `tau = sqrt(pi beta m) / (sigma n_g)`.
    pub implied_constant: f64,
}

impl TauConstraintReport {
    pub const THRESHOLD: f64 = 0.433_012_701_892_219_3;
    const BOUNDARY_RTOL: f64 = 1e-12;

    pub fn from_tau(tau: f64, beta: f64) -> Result<Self> {
        require_positive("intercollision time tau", tau)?;
        require_positive("inverse temperature beta", beta)?;
        let threshold = 3.0_f64.sqrt() / 4.0;
        let tau_kt = tau / beta;
        Ok(Self {
            tau,
            beta,
            tau_kt,
            threshold,
            satisfied: tau_kt >= threshold,
            at_boundary: (tau_kt - threshold).abs() <= Self::BOUNDARY_RTOL * threshold,
            density_ratio: None,
            implied_constant: 4.0 * (PI / 3.0).sqrt(),
        })
    }

    /// `implied_constant * density_ratio`, which is `>= 1` exactly when the bound holds.
    pub fn density_form(&self) -> Option<f64> {
        self.density_ratio.map(|r| self.implied_constant * r)
    }
}

pub fn tau_constraint_report(gas: &GasComponent, sigma: f64, masses: &Masses) -> Result<TauConstraintReport> {
    require_positive("gas density n_g", gas.density)?;
    if (gas.mass - masses.molecule()).abs() > 1e-12 * masses.molecule() {
        return Err(contract("gas molecule mass differs from the collision masses"));
    }
    let tau = intercollision_time(gas.beta, gas.mass, sigma, gas.density)?;
    let mut report = TauConstraintReport::from_tau(tau, gas.beta)?;
    report.density_ratio = Some((gas.mass / gas.beta).sqrt() / (sigma * gas.density));
    Ok(report)
}

//! Two-body collision kinematics, the finite-time energy delta function and
//! the intercollision time.
//!
//! Conventions: `P` is the particle momentum *before* the collision, the gas
//! molecule goes `k -> k - Q` and the particle `P -> P + Q`. The centre-of-mass
//! energy balance is taken as initial minus final relative kinetic energy,
//!
//! ```text
//! E*_fi = ((k*_i)^2 - (k*_f)^2) / (2 m*)
//! ```
//!
//! which in the heavy-particle limit reduces to `Q.(k - Q/2)/m - Q.P/M`.
//! Only `|delta_tau|` and `delta_tau^2` enter the generator and `delta_tau` is
//! even, so nothing downstream depends on this sign.

use std::f64::consts::PI;

use crate::error::{contract, domain, require_positive, Result};
use crate::quadrature::composite_legendre;

/// Particle and molecule masses with the derived two-body masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Masses {
    particle: f64,
    molecule: f64,
}

impl Masses {
    pub fn new(particle: f64, molecule: f64) -> Result<Self> {
        require_positive("particle mass M", particle)?;
        require_positive("molecule mass m", molecule)?;
        Ok(Self { particle, molecule })
    }

    /// Particle mass `M`.
    pub fn particle(&self) -> f64 {
        self.particle
    }

    /// Molecule mass `m`.
    pub fn molecule(&self) -> f64 {
        self.molecule
    }

    /// Total mass `M* = M + m`.
    pub fn total(&self) -> f64 {
        self.particle + self.molecule
    }

    /// Reduced mass `m* = M m / (M + m)`.
    pub fn reduced(&self) -> f64 {
        self.particle * self.molecule / self.total()
    }
}

/// Relative (centre-of-mass) momenta before and after one collision, and
/// the relative energy balance.
#[derive(Debug, Clone, PartialEq)]
pub struct ComFrame {
    pub k_star_i: Vec<f64>,
    pub k_star_f: Vec<f64>,
    pub e_star_fi: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Centre-of-mass momenta for gas momentum `k`, particle momentum `p` and
/// transfer `q`. All three vectors must have dimension 1 or 3.
pub fn com_momenta(k: &[f64], p: &[f64], q: &[f64], masses: &Masses) -> Result<ComFrame> {
    let d = k.len();
    if !(d == 1 || d == 3) || p.len() != d || q.len() != d {
        return Err(contract(format!(
            "momentum vectors must share dimension 1 or 3, got {}, {}, {}",
            k.len(),
            p.len(),
            q.len()
        )));
    }
    let total = masses.total();
    let a = masses.particle() / total;
    let b = masses.molecule() / total;
    let k_star_i: Vec<f64> = k.iter().zip(p).map(|(k, p)| a * k - b * p).collect();
    let k_star_f: Vec<f64> = k_star_i.iter().zip(q).map(|(k, q)| k - q).collect();
    // (k_i^2 - k_f^2) = q.(2 k_i - q), which avoids cancellation for small q.
    let two_ki_minus_q: Vec<f64> = k_star_i.iter().zip(q).map(|(k, q)| 2.0 * k - q).collect();
    let e_star_fi = dot(q, &two_ki_minus_q) / (2.0 * masses.reduced());
    Ok(ComFrame {
        k_star_i,
        k_star_f,
        e_star_fi,
    })
}

/// One-dimensional specialisation of [`com_momenta`]: `(k*_i, k*_f, E*_fi)`.
pub fn com_momenta_1d(k: f64, p: f64, q: f64, masses: &Masses) -> (f64, f64, f64) {
    let total = masses.total();
    let k_i = (masses.particle() * k - masses.molecule() * p) / total;
    let k_f = k_i - q;
    let e = q * (2.0 * k_i - q) / (2.0 * masses.reduced());
    (k_i, k_f, e)
}

/// Post-collision particle momentum along `Q` fixed by energy conservation,
/// `(M/m) k_par - (M/m - 1) |Q| / 2`.
pub fn p_parallel_after(k_par: f64, q_mag: f64, masses: &Masses) -> Result<f64> {
    if !(q_mag > 0.0) {
        return Err(domain(format!(
            "momentum transfer magnitude must be positive, got {q_mag}"
        )));
    }
    let ratio = masses.particle() / masses.molecule();
    Ok(ratio * k_par - (ratio - 1.0) * q_mag / 2.0)
}

/// Below this `|tau E|` the smoothened delta function is evaluated by series.
pub const DELTA_TAU_SERIES_CUTOFF: f64 = 1e-4;

// sin(x)/x through x^8.
fn sinc_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
}

// d/dx (sin(x)/x) through x^9.
fn sinc_prime_series(x: f64) -> f64 {
    let x2 = x * x;
    -x / 3.0 + x * x2 / 30.0 - x * x2 * x2 / 840.0 + x * x2 * x2 * x2 / 45360.0
        - x * x2 * x2 * x2 * x2 / 3991680.0
}

/// Smoothened energy delta function `sin(tau E / 2) / (pi E)`.
pub fn delta_tau(energy: f64, tau: f64) -> Result<f64> {
    require_positive("intercollision time tau", tau)?;
    Ok(delta_tau_unchecked(energy, tau))
}

#[inline]
pub(crate) fn delta_tau_unchecked(energy: f64, tau: f64) -> f64 {
    if (tau * energy).abs() < DELTA_TAU_SERIES_CUTOFF {
        tau / (2.0 * PI) * sinc_series(0.5 * tau * energy)
    } else {
        (0.5 * tau * energy).sin() / (PI * energy)
    }
}

/// Energy derivative of [`delta_tau`].
pub fn delta_tau_prime(energy: f64, tau: f64) -> Result<f64> {
    require_positive("intercollision time tau", tau)?;
    Ok(delta_tau_prime_unchecked(energy, tau))
}

#[inline]
pub(crate) fn delta_tau_prime_unchecked(energy: f64, tau: f64) -> f64 {
    let x = 0.5 * tau * energy;
    let scale = tau * tau / (4.0 * PI);
    // The closed form loses digits to cancellation well before the
    // delta_tau cutoff, so the derivative switches to its series earlier.
    if x.abs() < 1e-2 {
        scale * sinc_prime_series(x)
    } else {
        scale * (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Mean time between collisions, `sqrt(pi beta m) / (sigma n_g)`.
pub fn intercollision_time(beta: f64, molecule_mass: f64, sigma: f64, density: f64) -> Result<f64> {
    require_positive("inverse temperature beta", beta)?;
    require_positive("molecule mass m", molecule_mass)?;
    require_positive("total cross section sigma", sigma)?;
    require_positive("gas density n_g", density)?;
    Ok((PI * beta * molecule_mass).sqrt() / (sigma * density))
}

/// Windowed integral over the whole energy axis: quadrature inside
/// `|E| <= window` plus an asymptotic tail estimate outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowedIntegral {
    pub window: f64,
    pub body: f64,
    pub tail: f64,
}

impl WindowedIntegral {
    pub fn value(&self) -> f64 {
        self.body + self.tail
    }
}

fn check_window(periods: usize, nodes_per_period: usize) -> Result<()> {
    if periods == 0 {
        return Err(domain("window must span at least one period"));
    }
    if nodes_per_period < 8 {
        return Err(crate::QlbeError::Accuracy(format!(
            "{nodes_per_period} nodes per period cannot resolve the delta_tau oscillation (need >= 8)"
        )));
    }
    Ok(())
}

/// `int delta_tau(E, tau) dE` over the real line (exactly 1).
///
/// The window closes after `periods` full oscillations of `sin(tau E / 2)`,
/// where the sine vanishes and the cosine is 1. The tail outside the window
/// uses the asymptotic expansion of the sine integral; its neglected terms are
/// bounded by `120 / (pi X^6)` with `X = 2 pi periods`.
pub fn delta_tau_integral(tau: f64, periods: usize, nodes_per_period: usize) -> Result<WindowedIntegral> {
    require_positive("intercollision time tau", tau)?;
    check_window(periods, nodes_per_period)?;
    let half_period = 2.0 * PI / tau;
    let segments = 2 * periods;
    let body = 2.0
        * composite_legendre(segments, half_period, nodes_per_period / 2, |e| {
            delta_tau_unchecked(e, tau)
        })?;
    let x = 2.0 * PI * periods as f64;
    let x2 = x * x;
    let tail = 2.0 / (PI * x) * (1.0 - 2.0 / x2 + 24.0 / (x2 * x2));
    Ok(WindowedIntegral {
        window: segments as f64 * half_period,
        body,
        tail,
    })
}

/// `int [delta_tau'(E, tau)]^2 dE` over the real line (exactly `tau^3 / (24 pi)`).
///
/// Same window as [`delta_tau_integral`]. The tail is
/// `tau^3 / (8 pi^2) * (1/X - 1/(6 X^3))` for both sides together, with
/// neglected terms of order `tau^3 / X^5`.
pub fn delta_tau_prime_sq_integral(
    tau: f64,
    periods: usize,
    nodes_per_period: usize,
) -> Result<WindowedIntegral> {
    require_positive("intercollision time tau", tau)?;
    check_window(periods, nodes_per_period)?;
    let half_period = 2.0 * PI / tau;
    let segments = 2 * periods;
    let body = 2.0
        * composite_legendre(segments, half_period, nodes_per_period / 2, |e| {
            delta_tau_prime_unchecked(e, tau).powi(2)
        })?;
    let x = 2.0 * PI * periods as f64;
    let tail = tau.powi(3) / (8.0 * PI * PI) * (1.0 / x - 1.0 / (6.0 * x * x * x));
    Ok(WindowedIntegral {
        window: segments as f64 * half_period,
        body,
        tail,
    })
}

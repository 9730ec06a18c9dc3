//! Unit conventions.
//!
//! Every kernel in this crate works in natural units with `hbar = k_B = 1`.
//! Masses, momenta, energies and times are plain `f64` values in one
//! consistent system; physical scales are applied only when a report is
//! written.

/// Scale factors from natural units to the units a report should use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConversions {
    /// One natural energy unit expressed in report units.
    pub energy: f64,
    /// One natural time unit expressed in report units.
    pub time: f64,
    /// One natural length unit expressed in report units.
    pub length: f64,
}

/// Natural-unit system with optional report conversions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitSystem {
    pub conversions: Option<ReportConversions>,
}

impl UnitSystem {
    /// Reduced Planck constant used internally.
    pub const HBAR: f64 = 1.0;
    /// Boltzmann constant used internally.
    pub const K_B: f64 = 1.0;

    pub fn natural() -> Self {
        Self { conversions: None }
    }

    pub fn with_conversions(conversions: ReportConversions) -> Self {
        Self {
            conversions: Some(conversions),
        }
    }

    pub fn energy(&self, value: f64) -> f64 {
        self.conversions.map_or(value, |c| value * c.energy)
    }

    pub fn time(&self, value: f64) -> f64 {
        self.conversions.map_or(value, |c| value * c.time)
    }

    pub fn length(&self, value: f64) -> f64 {
        self.conversions.map_or(value, |c| value * c.length)
    }

    /// Momentum carries `hbar / length`, i.e. `energy * time / length`.
    pub fn momentum(&self, value: f64) -> f64 {
        self.conversions
            .map_or(value, |c| value * c.energy * c.time / c.length)
    }

    /// Temperature for an inverse temperature `beta`, in report energy units.
    pub fn temperature(&self, beta: f64) -> f64 {
        self.energy(1.0 / (Self::K_B * beta))
    }
}

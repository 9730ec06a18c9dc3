//! Numerics for the quantum linear Boltzmann equation (QLBE) of a test
//! particle in a dilute gas, with the energy-conservation delta function
//! smoothened by a finite intercollision time `tau`.
//!
//! * [`kinematics`]: two-body collision kinematics, `delta_tau`, `tau`.
//! * [`gas`]: Maxwell–Boltzmann components, mixtures, scattering amplitudes.
//! * [`generator`]: Lindblad channels on a 1D momentum grid and their action.
//! * [`evolution`]: fixed-step time evolution, observables, classical LBE.
//! * [`diffusion`]: friction and diffusion constants of the diffusion limit.
//!
//! All quantities are in natural units, `hbar = k_B = 1`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod evolution;
pub mod gas;
pub mod generator;
pub mod grid;
pub mod kinematics;
pub mod quadrature;
pub mod units;

pub use diffusion::{DiffusionConstants, DiffusionQuadrature, TauConstraintReport};
pub use error::{QlbeError, Result};
pub use evolution::{EvolutionConfig, ObservableSeries, RateTable};
pub use gas::{AmplitudeModel, GasComponent, GasMixture, ScatteringAmplitude};
pub use generator::{Generator, GeneratorConfig, GeneratorVariant, LindbladChannel, Liouvillian};
pub use grid::{CMatrix, DensityMatrix, MomentumGrid};
pub use kinematics::{ComFrame, Masses};
pub use units::UnitSystem;

pub use num_complex::Complex64;

/// Version of this library, echoed in artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

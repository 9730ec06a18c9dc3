//! One-dimensional momentum grid and the particle density matrix on it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{contract, domain, require_positive, Result};

/// Complex square matrix in the momentum basis.
pub type CMatrix = DMatrix<Complex64>;

/// Uniform grid `P_i = (i - (N - 1)/2) dP`, symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    n: usize,
    dp: f64,
}

impl MomentumGrid {
    pub const MIN_POINTS: usize = 2;

    pub fn new(n: usize, dp: f64) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(domain(format!("grid needs at least {} points, got {n}", Self::MIN_POINTS)));
        }
        require_positive("grid spacing dP", dp)?;
        Ok(Self { n, dp })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.dp
    }

    #[inline]
    pub fn momentum(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.n as f64 - 1.0)) * self.dp
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.momentum(i)).collect()
    }

    /// Index reached from `i` by an integer shift, if it stays on the grid.
    #[inline]
    pub fn shifted(&self, i: usize, shift: i64) -> Option<usize> {
        let j = i as i64 + shift;
        (j >= 0 && (j as usize) < self.n).then_some(j as usize)
    }

    /// Grid index closest to momentum `p` (ties go to the lower index).
    pub fn nearest_index(&self, p: f64) -> usize {
        let x = p / self.dp + 0.5 * (self.n as f64 - 1.0);
        (x.round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Particle state `<P|rho|P'> dP` on a momentum grid; the trace is one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    grid: MomentumGrid,
    elements: CMatrix,
}

/// Tolerances checked when a density matrix is constructed from raw data.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Validated construction: hermitian, unit trace and positive semidefinite.
    pub fn new(grid: MomentumGrid, elements: CMatrix) -> Result<Self> {
        let rho = Self::from_raw(grid, elements)?;
        let herm = rho.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(domain(format!("density matrix is not hermitian (defect {herm:e})")));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(domain(format!("density matrix trace is {trace}, expected 1")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(domain(format!("density matrix has eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    /// Shape-checked construction without the physical checks, for states
    /// produced by the integrator.
    pub fn from_raw(grid: MomentumGrid, elements: CMatrix) -> Result<Self> {
        if elements.nrows() != grid.len() || elements.ncols() != grid.len() {
            return Err(contract(format!(
                "matrix is {}x{}, grid has {} points",
                elements.nrows(),
                elements.ncols(),
                grid.len()
            )));
        }
        Ok(Self { grid, elements })
    }

    pub fn maximally_mixed(grid: MomentumGrid) -> Self {
        let n = grid.len();
        let elements = CMatrix::from_diagonal_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
        Self { grid, elements }
    }

    /// Diagonal state from non-negative populations (renormalised).
    pub fn diagonal(grid: MomentumGrid, populations: &[f64]) -> Result<Self> {
        if populations.len() != grid.len() {
            return Err(contract("population vector length differs from grid size"));
        }
        if populations.iter().any(|p| !(*p >= 0.0)) {
            return Err(domain("populations must be non-negative"));
        }
        let total: f64 = populations.iter().sum();
        require_positive("total population", total)?;
        let n = grid.len();
        let mut elements = CMatrix::zeros(n, n);
        for (i, p) in populations.iter().enumerate() {
            elements[(i, i)] = Complex64::new(p / total, 0.0);
        }
        Ok(Self { grid, elements })
    }

    /// Pure state `|psi><psi|` from (unnormalised) amplitudes.
    pub fn pure(grid: MomentumGrid, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(contract("amplitude vector length differs from grid size"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        require_positive("state norm", norm)?;
        let n = grid.len();
        let elements = CMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj() / norm);
        Ok(Self { grid, elements })
    }

    /// Equal-weight superposition of two grid momenta `(|i> + |j>)/sqrt(2)`.
    pub fn two_point_superposition(grid: MomentumGrid, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= grid.len() || j >= grid.len() {
            return Err(domain(format!("superposition needs two distinct grid indices, got {i}, {j}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); grid.len()];
        amps[i] = Complex64::new(1.0, 0.0);
        amps[j] = Complex64::new(1.0, 0.0);
        Self::pure(grid, &amps)
    }

    /// Gaussian wave packet centred at `center` with momentum width `width`.
    pub fn gaussian_packet(grid: MomentumGrid, center: f64, width: f64) -> Result<Self> {
        require_positive("packet width", width)?;
        let amps: Vec<Complex64> = grid
            .values()
            .iter()
            .map(|p| Complex64::new((-(p - center).powi(2) / (4.0 * width * width)).exp(), 0.0))
            .collect();
        Self::pure(grid, &amps)
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix {
        self.elements
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    pub fn diagonal_populations(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.elements[(i, i)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.elements)
    }

    /// `sum_{i != j} |rho_ij|`.
    pub fn coherence_l1(&self) -> f64 {
        coherence_l1(&self.elements)
    }

    pub fn mean_momentum(&self) -> f64 {
        let pops = self.diagonal_populations();
        pops.iter().enumerate().map(|(i, p)| p * self.grid.momentum(i)).sum()
    }

    pub fn momentum_variance(&self) -> f64 {
        let mean = self.mean_momentum();
        let pops = self.diagonal_populations();
        pops.iter()
            .enumerate()
            .map(|(i, p)| p * (self.grid.momentum(i) - mean).powi(2))
            .sum()
    }

    /// Population on the two outermost grid points.
    pub fn edge_population(&self) -> f64 {
        let n = self.grid.len();
        self.elements[(0, 0)].re + self.elements[(n - 1, n - 1)].re
    }

    /// Smallest eigenvalue of the hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn coherence_l1(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_is_symmetric() {
        let g = MomentumGrid::new(6, 0.5).unwrap();
        let v = g.values();
        assert_eq!(v[0], -1.25);
        assert_eq!(v[5], 1.25);
        for i in 0..6 {
            assert_eq!(v[i], -v[5 - i]);
        }
        let odd = MomentumGrid::new(5, 1.0).unwrap();
        assert_eq!(odd.momentum(2), 0.0);
        assert_eq!(odd.nearest_index(0.4), 2);
        assert_eq!(odd.nearest_index(-10.0), 0);
        assert_eq!(odd.nearest_index(10.0), 4);
    }

    #[test]
    fn grid_validation_and_shifts() {
        assert!(MomentumGrid::new(1, 1.0).is_err());
        assert!(MomentumGrid::new(8, 0.0).is_err());
        let g = MomentumGrid::new(4, 1.0).unwrap();
        assert_eq!(g.shifted(0, -1), None);
        assert_eq!(g.shifted(0, 3), Some(3));
        assert_eq!(g.shifted(1, 3), None);
    }

    #[test]
    fn constructors_give_valid_states() {
        let g = MomentumGrid::new(8, 0.25).unwrap();
        for rho in [
            DensityMatrix::maximally_mixed(g),
            DensityMatrix::two_point_superposition(g, 3, 4).unwrap(),
            DensityMatrix::gaussian_packet(g, 0.1, 0.3).unwrap(),
            DensityMatrix::diagonal(g, &[1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 1.0, 1.0]).unwrap(),
        ] {
            let checked = DensityMatrix::new(g, rho.elements().clone()).unwrap();
            assert_relative_eq!(checked.trace().re, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn superposition_observables() {
        let g = MomentumGrid::new(4, 1.0).unwrap();
        let rho = DensityMatrix::two_point_superposition(g, 1, 2).unwrap();
        assert_relative_eq!(rho.coherence_l1(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(rho.mean_momentum(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(rho.momentum_variance(), 0.25, max_relative = 1e-15);
        assert!(rho.min_eigenvalue().abs() < 1e-14);
        assert_eq!(rho.edge_population(), 0.0);
        assert!(DensityMatrix::two_point_superposition(g, 1, 1).is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        let g = MomentumGrid::new(4, 1.0).unwrap();
        let mut m = CMatrix::from_diagonal_element(4, 4, Complex64::new(0.25, 0.0));
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(g, m.clone()).is_err());
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(g, m.clone()).is_ok());
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(DensityMatrix::new(g, m).is_err());
        let negative = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        assert!(DensityMatrix::new(g, negative).is_err());
        assert!(DensityMatrix::from_raw(g, CMatrix::zeros(3, 3)).is_err());
    }
}

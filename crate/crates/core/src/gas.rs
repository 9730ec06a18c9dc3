//! Maxwell–Boltzmann gas components, additive mixtures and scattering
//! amplitude models.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{contract, domain, require_positive, QlbeError, Result};
use crate::quadrature::gauss_hermite;

/// One thermal gas component: molecule mass, inverse temperature and density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasComponent {
    pub mass: f64,
    pub beta: f64,
    pub density: f64,
}

impl GasComponent {
    pub fn new(mass: f64, beta: f64, density: f64) -> Result<Self> {
        require_positive("molecule mass m", mass)?;
        require_positive("inverse temperature beta", beta)?;
        if !(density >= 0.0 && density.is_finite()) {
            return Err(domain(format!("gas density must be non-negative, got {density}")));
        }
        Ok(Self { mass, beta, density })
    }

    /// Momentum variance per axis, `m / beta`.
    pub fn thermal_variance(&self) -> f64 {
        self.mass / self.beta
    }
}

fn check_dimension(k: &[f64], d: usize) -> Result<()> {
    if !(d == 1 || d == 3) {
        return Err(domain(format!("dimension must be 1 or 3, got {d}")));
    }
    if k.len() != d {
        return Err(contract(format!("momentum has {} components, expected {d}", k.len())));
    }
    Ok(())
}

/// Maxwell–Boltzmann momentum density `(beta / 2 pi m)^{d/2} exp(-beta k^2 / 2m)`.
pub fn mb_density(k: &[f64], comp: &GasComponent, d: usize) -> Result<f64> {
    check_dimension(k, d)?;
    let k2: f64 = k.iter().map(|x| x * x).sum();
    Ok(mb_density_sq(k2, comp, d))
}

#[inline]
pub(crate) fn mb_density_sq(k2: f64, comp: &GasComponent, d: usize) -> f64 {
    let norm = (comp.beta / (2.0 * PI * comp.mass)).powf(d as f64 / 2.0);
    norm * (-comp.beta * k2 / (2.0 * comp.mass)).exp()
}

/// A gas made of thermal components sharing one molecular mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GasMixture {
    components: Vec<GasComponent>,
}

impl GasMixture {
    pub fn new(components: Vec<GasComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| domain("a gas mixture needs at least one component"))?;
        if let Some(odd) = components.iter().find(|c| c.mass != first.mass) {
            return Err(QlbeError::UnsupportedMixture(format!(
                "molecule masses differ ({} vs {})",
                first.mass, odd.mass
            )));
        }
        Ok(Self { components })
    }

    pub fn single(component: GasComponent) -> Self {
        Self {
            components: vec![component],
        }
    }

    pub fn components(&self) -> &[GasComponent] {
        &self.components
    }

    pub fn molecule_mass(&self) -> f64 {
        self.components[0].mass
    }

    /// Total number density.
    pub fn density(&self) -> f64 {
        self.components.iter().map(|c| c.density).sum()
    }
}

/// Number-weighted momentum density `sum_c n_c rho_c(k)`.
pub fn mixture_density(k: &[f64], mix: &GasMixture, d: usize) -> Result<f64> {
    check_dimension(k, d)?;
    let k2: f64 = k.iter().map(|x| x * x).sum();
    Ok(mixture_density_sq(k2, mix, d))
}

#[inline]
pub(crate) fn mixture_density_sq(k2: f64, mix: &GasMixture, d: usize) -> f64 {
    mix.components
        .iter()
        .map(|c| c.density * mb_density_sq(k2, c, d))
        .sum()
}

/// Off-shell extensions of the scattering amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeModel {
    /// `f = f0` everywhere.
    Constant { f0: Complex64 },
    /// `f = f0 exp(-|k_f - k_i|^2 / (2 w^2))`.
    Gaussian { f0: Complex64, width: f64 },
}

/// Scattering amplitude together with the total cross section used for the
/// intercollision time. The cross section is an independent input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitude {
    pub model: AmplitudeModel,
    pub sigma_total: f64,
}

impl ScatteringAmplitude {
    pub fn constant(f0: f64, sigma_total: f64) -> Result<Self> {
        Self::new(
            AmplitudeModel::Constant {
                f0: Complex64::new(f0, 0.0),
            },
            sigma_total,
        )
    }

    pub fn gaussian(f0: f64, width: f64, sigma_total: f64) -> Result<Self> {
        require_positive("amplitude width w", width)?;
        Self::new(
            AmplitudeModel::Gaussian {
                f0: Complex64::new(f0, 0.0),
                width,
            },
            sigma_total,
        )
    }

    pub fn new(model: AmplitudeModel, sigma_total: f64) -> Result<Self> {
        require_positive("total cross section sigma", sigma_total)?;
        if let AmplitudeModel::Gaussian { width, .. } = model {
            require_positive("amplitude width w", width)?;
        }
        Ok(Self { model, sigma_total })
    }

    /// Amplitude evaluated on its own, by squared transfer `|k_f - k_i|^2`.
    #[inline]
    pub(crate) fn at_transfer_sq(&self, q2: f64) -> Complex64 {
        match self.model {
            AmplitudeModel::Constant { f0 } => f0,
            AmplitudeModel::Gaussian { f0, width } => f0 * (-q2 / (2.0 * width * width)).exp(),
        }
    }

    pub fn f0(&self) -> Complex64 {
        match self.model {
            AmplitudeModel::Constant { f0 } | AmplitudeModel::Gaussian { f0, .. } => f0,
        }
    }
}

/// Cross section `4 pi |f0|^2` of an isotropic constant amplitude in three
/// dimensions.
pub fn constant_amplitude_cross_section(f0: Complex64) -> f64 {
    4.0 * PI * f0.norm_sqr()
}

/// Scattering amplitude between final and initial relative momenta.
pub fn amplitude_eval(f: &ScatteringAmplitude, k_f_star: &[f64], k_i_star: &[f64]) -> Complex64 {
    let q2: f64 = k_f_star
        .iter()
        .zip(k_i_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    f.at_transfer_sq(q2)
}

/// Quadrature node over gas momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct GasNode {
    pub k: Vec<f64>,
    pub weight: f64,
}

/// Gauss–Hermite nodes for `int dk rho_g(k) g(k)`; weights sum to one.
///
/// In three dimensions the rule is the tensor product of the 1D rule.
pub fn gas_quadrature(comp: &GasComponent, d: usize, order: usize) -> Result<Vec<GasNode>> {
    if order < 2 {
        return Err(domain(format!("gas quadrature order must be >= 2, got {order}")));
    }
    if !(d == 1 || d == 3) {
        return Err(domain(format!("dimension must be 1 or 3, got {d}")));
    }
    let rule = gauss_hermite(order)?;
    let scale = (2.0 * comp.thermal_variance()).sqrt();
    let norm = PI.sqrt();
    let axis: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (scale * x, w / norm)).collect();
    let nodes = match d {
        1 => axis.iter().map(|&(k, w)| GasNode { k: vec![k], weight: w }).collect(),
        _ => {
            let mut out = Vec::with_capacity(order.pow(3));
            for &(kx, wx) in &axis {
                for &(ky, wy) in &axis {
                    for &(kz, wz) in &axis {
                        out.push(GasNode {
                            k: vec![kx, ky, kz],
                            weight: wx * wy * wz,
                        });
                    }
                }
            }
            out
        }
    };
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn comp(beta: f64, density: f64) -> GasComponent {
        GasComponent::new(1.5, beta, density).unwrap()
    }

    #[test]
    fn component_validation() {
        assert!(GasComponent::new(1.0, 1.0, 0.0).is_ok());
        assert!(GasComponent::new(1.0, -1.0, 1.0).is_err());
        assert!(GasComponent::new(0.0, 1.0, 1.0).is_err());
        assert!(GasComponent::new(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn density_at_origin() {
        let c = comp(2.0, 1.0);
        let expected = (2.0 / (2.0 * PI * 1.5)).powf(1.5);
        assert_relative_eq!(mb_density(&[0.0; 3], &c, 3).unwrap(), expected, max_relative = 1e-15);
        assert!(mb_density(&[0.0, 0.0], &c, 2).is_err());
        assert!(mb_density(&[0.0], &c, 3).is_err());
    }

    #[test]
    fn density_normalised_and_second_moment() {
        // Oracle: high-order Gauss-Hermite quadrature in the scaled variable,
        // independent of gas_quadrature.
        let c = comp(0.7, 1.0);
        let rule = gauss_hermite(80).unwrap();
        let s = (2.0 * c.mass / c.beta).sqrt();
        let norm = rule.integrate(|x| mb_density(&[s * x], &c, 1).unwrap() * (x * x).exp() * s);
        assert!((norm - 1.0).abs() < 1e-10);
        let second = rule.integrate(|x| (s * x).powi(2) * mb_density(&[s * x], &c, 1).unwrap() * (x * x).exp() * s);
        assert_relative_eq!(second, c.mass / c.beta, max_relative = 1e-10);

        let mut norm3 = 0.0;
        let mut second3 = 0.0;
        let small = gauss_hermite(20).unwrap();
        for (x, wx) in small.iter() {
            for (y, wy) in small.iter() {
                for (z, wz) in small.iter() {
                    let k = [s * x, s * y, s * z];
                    let w = wx * wy * wz * (x * x + y * y + z * z).exp() * s.powi(3);
                    let rho = mb_density(&k, &c, 3).unwrap();
                    norm3 += w * rho;
                    second3 += w * rho * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
                }
            }
        }
        assert!((norm3 - 1.0).abs() < 1e-10);
        assert_relative_eq!(second3, 3.0 * c.mass / c.beta, max_relative = 1e-10);
    }

    #[test]
    fn mixture_rules() {
        let a = comp(1.0, 0.8);
        let identical = GasMixture::new(vec![a, a]).unwrap();
        let k = [0.3, -0.1, 0.5];
        assert_relative_eq!(
            mixture_density(&k, &identical, 3).unwrap(),
            2.0 * 0.8 * mb_density(&k, &a, 3).unwrap(),
            max_relative = 1e-15
        );
        let single = GasMixture::single(a);
        assert_eq!(
            mixture_density(&k, &single, 3).unwrap(),
            0.8 * mb_density(&k, &a, 3).unwrap()
        );
        let heavier = GasComponent::new(2.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            GasMixture::new(vec![a, heavier]),
            Err(QlbeError::UnsupportedMixture(_))
        ));
        assert!(GasMixture::new(vec![]).is_err());
    }

    #[test]
    fn two_temperature_mixture_between_pure_gases() {
        let hot = comp(1.0, 1.0);
        let cold = comp(4.0, 1.0);
        let mix = GasMixture::new(vec![hot, cold]).unwrap();
        let origin = [0.0];
        let value = mixture_density(&origin, &mix, 1).unwrap();
        // direct two-term sum
        let hot_pure = 2.0 * mb_density(&origin, &hot, 1).unwrap();
        let cold_pure = 2.0 * mb_density(&origin, &cold, 1).unwrap();
        assert_relative_eq!(value, 0.5 * (hot_pure + cold_pure), max_relative = 1e-15);
        assert!(hot_pure < value && value < cold_pure);
    }

    #[test]
    fn amplitude_models() {
        let c = ScatteringAmplitude::constant(0.3, 1.0).unwrap();
        assert_eq!(amplitude_eval(&c, &[1.0, 2.0, 3.0], &[-4.0, 0.0, 1.0]), Complex64::new(0.3, 0.0));
        let g = ScatteringAmplitude::gaussian(0.3, 0.7, 1.0).unwrap();
        assert_eq!(amplitude_eval(&g, &[0.2], &[0.2]), Complex64::new(0.3, 0.0));
        let value = amplitude_eval(&g, &[0.7, 0.0, 0.0], &[0.0, 0.0, 0.0]);
        assert_relative_eq!(value.re, 0.3 * (-0.5f64).exp(), max_relative = 1e-15);
        assert!(ScatteringAmplitude::gaussian(1.0, 0.0, 1.0).is_err());
        assert!(ScatteringAmplitude::constant(1.0, 0.0).is_err());
        assert_relative_eq!(
            constant_amplitude_cross_section(Complex64::new(0.5, 0.0)),
            PI,
            max_relative = 1e-15
        );
    }

    #[test]
    fn two_point_quadrature() {
        let c = comp(3.0, 1.0);
        let nodes = gas_quadrature(&c, 1, 2).unwrap();
        let sd = (c.mass / c.beta).sqrt();
        assert_relative_eq!(nodes[0].k[0], -sd, max_relative = 1e-12);
        assert_relative_eq!(nodes[1].k[0], sd, max_relative = 1e-12);
        assert_relative_eq!(nodes[0].weight, 0.5, max_relative = 1e-12);
        assert_relative_eq!(nodes[1].weight, 0.5, max_relative = 1e-12);
        assert!(gas_quadrature(&c, 1, 1).is_err());
        assert!(gas_quadrature(&c, 2, 4).is_err());
    }

    #[test]
    fn quadrature_moments() {
        let c = comp(0.4, 1.0);
        for order in [4, 9, 40] {
            let nodes = gas_quadrature(&c, 1, order).unwrap();
            let total: f64 = nodes.iter().map(|n| n.weight).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(nodes.iter().all(|n| n.weight > 0.0));
            let second: f64 = nodes.iter().map(|n| n.weight * n.k[0] * n.k[0]).sum();
            assert_relative_eq!(second, c.mass / c.beta, max_relative = 1e-10);
        }
        let nodes = gas_quadrature(&c, 3, 4).unwrap();
        assert_eq!(nodes.len(), 64);
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let second: f64 = nodes.iter().map(|n| n.weight * n.k.iter().map(|x| x * x).sum::<f64>()).sum();
        assert_relative_eq!(second, 3.0 * c.mass / c.beta, max_relative = 1e-10);
    }

    proptest! {
        #[test]
        fn mixture_linear_in_components(
            b1 in 0.1f64..5.0, b2 in 0.1f64..5.0, n1 in 0.0f64..3.0, n2 in 0.0f64..3.0, k in -4.0f64..4.0,
        ) {
            let c1 = comp(b1, n1);
            let c2 = comp(b2, n2);
            let zero = comp(1.0, 0.0);
            let ab = GasMixture::new(vec![c1, c2]).unwrap();
            let ba = GasMixture::new(vec![c2, c1]).unwrap();
            let with_zero = GasMixture::new(vec![c1, zero, c2]).unwrap();
            let v = mixture_density(&[k], &ab, 1).unwrap();
            prop_assert!((v - mixture_density(&[k], &ba, 1).unwrap()).abs() <= 1e-15 * v.max(1e-300));
            prop_assert_eq!(v, mixture_density(&[k], &with_zero, 1).unwrap());
        }

        #[test]
        fn mb_density_isotropic(kx in -3.0f64..3.0, ky in -3.0f64..3.0, kz in -3.0f64..3.0) {
            let c = comp(1.2, 1.0);
            let r = (kx * kx + ky * ky + kz * kz).sqrt();
            let a = mb_density(&[kx, ky, kz], &c, 3).unwrap();
            let b = mb_density(&[0.0, 0.0, r], &c, 3).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }

        #[test]
        fn gaussian_amplitude_hermitian_under_swap(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.1f64..3.0) {
            let g = ScatteringAmplitude::gaussian(0.8, w, 1.0).unwrap();
            prop_assert_eq!(amplitude_eval(&g, &[a], &[b]), amplitude_eval(&g, &[b], &[a]).conj());
        }
    }
}

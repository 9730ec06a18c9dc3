//! Quadrature rules shared by the gas model and the diffusion-limit module.
//!
//! Node and weight generation is delegated to `gauss-quad`; this module adapts
//! the rules to the intervals and weight functions used here.

use std::num::NonZeroUsize;

use gauss_quad::{hermite::GaussHermite, legendre::GaussLegendre};

use crate::error::{domain, Result};

/// A fixed set of nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

fn degree(n: usize) -> Result<NonZeroUsize> {
    NonZeroUsize::new(n).ok_or_else(|| domain("quadrature order must be at least 1"))
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<NodeRule> {
    let rule = GaussLegendre::new(degree(n)?);
    let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
    Ok(NodeRule { nodes, weights })
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<NodeRule> {
    let base = gauss_legendre(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Ok(NodeRule {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| half * w).collect(),
    })
}

/// Gauss–Hermite rule for the weight `exp(-x^2)` on the real line.
pub fn gauss_hermite(n: usize) -> Result<NodeRule> {
    let rule = GaussHermite::new(degree(n)?);
    let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
    Ok(NodeRule { nodes, weights })
}

/// Gauss–Legendre rule for `[0, inf)` through the map `q = scale * t / (1 - t)`.
///
/// The returned weights include the Jacobian `scale / (1 - t)^2`.
pub fn semi_infinite_legendre(n: usize, scale: f64) -> Result<NodeRule> {
    if !(scale > 0.0) {
        return Err(domain(format!("map scale must be positive, got {scale}")));
    }
    let base = gauss_legendre_on(n, 0.0, 1.0)?;
    let (nodes, weights) = base
        .iter()
        .map(|(t, w)| {
            let one_minus = 1.0 - t;
            (scale * t / one_minus, w * scale / (one_minus * one_minus))
        })
        .unzip();
    Ok(NodeRule { nodes, weights })
}

/// Composite Gauss–Legendre integral of `f` over `[0, segments * width]`.
///
/// Each segment of length `width` gets its own `nodes_per_segment`-point rule.
pub fn composite_legendre(
    segments: usize,
    width: f64,
    nodes_per_segment: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64> {
    let rule = gauss_legendre_on(nodes_per_segment, 0.0, width)?;
    let mut total = 0.0;
    for s in 0..segments {
        let offset = s as f64 * width;
        total += rule.integrate(|x| f(offset + x));
    }
    Ok(total)
}

//! Discrete representations of the gaussian detuning distribution
//! `F(Δ) = T₂*/√(2π) · exp(-(T₂*Δ)²/2)`.
//!
//! Two schemes are provided. Gauss-Hermite nodes integrate polynomial moments
//! exactly and are the right choice when the pulse bandwidth exceeds the line
//! width. A uniform midpoint grid is needed in the opposite regime, where the
//! medium response is dominated by the near-resonant atoms and the free
//! polarization must dephase smoothly over the whole time window.

use alloc::{format, vec, vec::Vec};
use core::f64::consts::PI;

use crate::{Error, Result};

/// Default Gauss-Hermite node count.
pub const DEFAULT_DETUNING_NODES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum QuadratureScheme {
    #[default]
    GaussHermite,
    /// Equal spacing over `±span_sigmas` standard deviations of `F`.
    UniformMidpoint { span_sigmas: f64 },
}

/// Detuning nodes (ns⁻¹) with normalized weights, in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningDistribution {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DetuningDistribution {
    /// Builds a distribution from explicit parts. Weights must be finite,
    /// non-negative and sum to one within 1e-12.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::invalid(
                "detuning distribution",
                "nodes and weights must be non-empty and equal length",
            ));
        }
        if nodes.iter().chain(&weights).any(|v| !v.is_finite()) || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("detuning distribution", "non-finite node or negative weight"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("detuning distribution", format!("weights sum to {total}")));
        }
        Ok(DetuningDistribution { nodes, weights })
    }

    /// A single resonant node of unit weight (sharp-line medium).
    pub fn resonant() -> Self {
        DetuningDistribution { nodes: vec![0.0], weights: vec![1.0] }
    }

    pub fn new(t2_star: f64, n_nodes: usize, scheme: QuadratureScheme) -> Result<Self> {
        match scheme {
            QuadratureScheme::GaussHermite => gaussian_detuning_quadrature(t2_star, n_nodes),
            QuadratureScheme::UniformMidpoint { span_sigmas } => uniform_detuning_grid(t2_star, n_nodes, span_sigmas),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Largest node magnitude.
    pub fn max_abs(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// `Σ wᵢ f(Δᵢ)`, summed in node order.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.iter().map(|(d, w)| w * f(d)).sum()
    }
}

fn check_node_count(n_nodes: usize) -> Result<()> {
    if n_nodes < 2 || !n_nodes.is_multiple_of(2) {
        return Err(Error::invalid("detuning node count", format!("{n_nodes} must be even and >= 2")));
    }
    Ok(())
}

fn check_t2(t2_star: f64) -> Result<()> {
    if !(t2_star > 0.0 && t2_star.is_finite()) {
        return Err(Error::invalid("t2_star", format!("{t2_star} must be positive")));
    }
    Ok(())
}

/// Gauss-Hermite quadrature mapped onto `F(Δ)`: nodes `Δ = √2·x/T₂*`,
/// weights `w/√π`. Exact for polynomial integrands up to degree `2n-1`.
pub fn gaussian_detuning_quadrature(t2_star: f64, n_nodes: usize) -> Result<DetuningDistribution> {
    check_t2(t2_star)?;
    check_node_count(n_nodes)?;
    let (x, w) = gauss_hermite(n_nodes);
    let scale = core::f64::consts::SQRT_2 / t2_star;
    let norm = 1.0 / libm::sqrt(PI);
    Ok(DetuningDistribution {
        nodes: x.iter().map(|&x| x * scale).collect(),
        weights: w.iter().map(|&w| w * norm).collect(),
    })
}

/// Uniform midpoint grid over `±span_sigmas/T₂*` with gaussian weights
/// renormalized to one. Node spacing sets the rephasing time `2π/δ`, which must
/// exceed the simulated window.
pub fn uniform_detuning_grid(t2_star: f64, n_nodes: usize, span_sigmas: f64) -> Result<DetuningDistribution> {
    check_t2(t2_star)?;
    check_node_count(n_nodes)?;
    if !(span_sigmas > 0.0 && span_sigmas.is_finite()) {
        return Err(Error::invalid("span_sigmas", format!("{span_sigmas} must be positive")));
    }
    let half = span_sigmas / t2_star;
    let step = 2.0 * half / n_nodes as f64;
    let half_n = n_nodes / 2;
    // Build the positive half and mirror it so ±Δ pairs are exact negatives.
    let positive: Vec<f64> = (0..half_n).map(|i| (i as f64 + 0.5) * step).collect();
    let raw: Vec<f64> = positive
        .iter()
        .map(|d| {
            let s = t2_star * d;
            libm::exp(-0.5 * s * s)
        })
        .collect();
    let total = 2.0 * raw.iter().sum::<f64>();
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for i in (0..half_n).rev() {
        nodes.push(-positive[i]);
        weights.push(raw[i] / total);
    }
    for i in 0..half_n {
        nodes.push(positive[i]);
        weights.push(raw[i] / total);
    }
    Ok(DetuningDistribution { nodes, weights })
}

/// Physicists' Gauss-Hermite nodes and weights for weight `exp(-x²)`, in
/// ascending order, by Newton iteration on the orthonormal recurrence.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const MAX_ITER: usize = 100;
    let pim4 = libm::pow(PI, -0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => libm::sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -1.0 / 6.0),
            1 => z - 1.14 * libm::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..MAX_ITER {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * libm::sqrt(2.0 / (jf + 1.0)) * p2 - libm::sqrt(jf / (jf + 1.0)) * p3;
            }
            pp = libm::sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

//! Closed-form results: the piecewise sech solution for a finite inverted
//! medium, its group velocity and advance, the gain coefficient, and the
//! superfluorescence delay law.

use core::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::params::{MediumSpec, PhysicalParams, PulseSpec, SPEED_OF_LIGHT};
use crate::quadrature::{gaussian_detuning_quadrature, DetuningDistribution, DEFAULT_DETUNING_NODES};
use crate::{Error, Result};

pub fn sech(x: f64) -> f64 {
    1.0 / libm::cosh(x)
}

/// Input envelope at retarded time `t`, zero outside a hard cutoff.
pub fn sech_envelope(t: f64, spec: &PulseSpec) -> f64 {
    let s = t - spec.peak_time;
    if let Some(w) = spec.cutoff_half_width {
        if s.abs() > w * spec.tau {
            return 0.0;
        }
    }
    spec.peak_amplitude * sech(s / spec.tau)
}

/// How the detuning integral `∫F(Δ)dΔ/(Δ²+τ⁻²)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityMode {
    /// Long-T₂* limit: the integral is `τ²`.
    #[default]
    Limit,
    /// Gauss-Hermite quadrature with the default node count.
    Quadrature,
}

/// The detuning integral `I = ∫F(Δ)dΔ/(Δ²+τ⁻²)`, ns².
pub fn gain_integral(p: &PhysicalParams, mode: VelocityMode) -> f64 {
    match mode {
        VelocityMode::Limit => p.tau * p.tau,
        VelocityMode::Quadrature => {
            let dist = gaussian_detuning_quadrature(p.t2_star, DEFAULT_DETUNING_NODES)
                .expect("default quadrature is valid for validated parameters");
            gain_integral_with(p, &dist)
        }
    }
}

pub fn gain_integral_with(p: &PhysicalParams, dist: &DetuningDistribution) -> f64 {
    let inv_tau2 = 1.0 / (p.tau * p.tau);
    dist.integrate(|d| 1.0 / (d * d + inv_tau2))
}

/// `1/c - 1/v_g = gI/(2c)` in ns/cm: peak advance accumulated per unit length.
pub fn advance_rate(p: &PhysicalParams, integral: f64) -> f64 {
    p.g * integral / (2.0 * SPEED_OF_LIGHT)
}

/// Signed ratio `v_g/c`. Negative inside a strongly inverted medium.
pub fn group_velocity(p: &PhysicalParams, mode: VelocityMode) -> Result<f64> {
    group_velocity_from_integral(p, gain_integral(p, mode))
}

pub fn group_velocity_with(p: &PhysicalParams, dist: &DetuningDistribution) -> Result<f64> {
    group_velocity_from_integral(p, gain_integral_with(p, dist))
}

fn group_velocity_from_integral(p: &PhysicalParams, integral: f64) -> Result<f64> {
    let c_over_vg = 1.0 - 0.5 * p.g * integral;
    if c_over_vg.abs() < 1e-12 {
        return Err(Error::DivergingGroupVelocity(c_over_vg));
    }
    Ok(1.0 / c_over_vg)
}

/// Inverse Beer length `α = √(π/2)·g·T₂*/c`, cm⁻¹.
pub fn beers_alpha(p: &PhysicalParams) -> f64 {
    libm::sqrt(PI / 2.0) * p.g * p.t2_star / SPEED_OF_LIGHT
}

/// `(φ₀, φ₁)` in the long-T₂* limit.
pub fn phase_offsets(m: &MediumSpec, p: &PhysicalParams) -> (f64, f64) {
    AnalyticSolution::new(m, p, VelocityMode::Limit).phase_offsets()
}

/// Piecewise sech solution at lab position `x` and time `t`, limit-mode `v_g`.
pub fn analytic_field(x: f64, t: f64, m: &MediumSpec, p: &PhysicalParams) -> f64 {
    AnalyticSolution::new(m, p, VelocityMode::Limit).field(x, t)
}

/// Atomic amplitudes `(c₁, c₂)` inside the medium, limit-mode `v_g`.
pub fn analytic_amplitudes(x: f64, t: f64, m: &MediumSpec, p: &PhysicalParams) -> Result<(C64, C64)> {
    AnalyticSolution::new(m, p, VelocityMode::Limit).amplitudes(x, t)
}

/// Exact piecewise sech pulse for a uniform inverted medium between `x0` and
/// `x1`. The vacuum branches travel at `c`; the medium branch travels at `v_g`.
/// Phase offsets are fixed by continuity at both faces, so any choice of `v_g`
/// yields a continuous solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSolution {
    medium: MediumSpec,
    tau: f64,
    /// `1/c - 1/v_g`, ns/cm.
    rate: f64,
}

impl AnalyticSolution {
    pub fn new(m: &MediumSpec, p: &PhysicalParams, mode: VelocityMode) -> Self {
        Self::from_integral(m, p, gain_integral(p, mode))
    }

    /// Uses the medium's own discrete detuning distribution, which makes the
    /// medium branch the exact soliton of the discretized equations.
    pub fn with_distribution(m: &MediumSpec, p: &PhysicalParams, dist: &DetuningDistribution) -> Self {
        Self::from_integral(m, p, gain_integral_with(p, dist))
    }

    fn from_integral(m: &MediumSpec, p: &PhysicalParams, integral: f64) -> Self {
        AnalyticSolution { medium: *m, tau: p.tau, rate: advance_rate(p, integral) }
    }

    pub fn medium(&self) -> &MediumSpec {
        &self.medium
    }

    /// `1/v_g` in ns/cm.
    pub fn inverse_group_velocity(&self) -> f64 {
        1.0 / SPEED_OF_LIGHT - self.rate
    }

    /// Peak advance over the whole medium, ns.
    pub fn advance(&self) -> f64 {
        self.rate * self.medium.length()
    }

    pub fn phase_offsets(&self) -> (f64, f64) {
        (-self.rate * self.medium.x0, self.rate * self.medium.length())
    }

    /// Values of the three branches at `(x, t)` regardless of which one
    /// applies there.
    pub fn branch_values(&self, x: f64, t: f64) -> [f64; 3] {
        let (phi0, phi1) = self.phase_offsets();
        let amp = 2.0 / self.tau;
        [
            amp * sech((t - x / SPEED_OF_LIGHT) / self.tau),
            amp * sech(self.medium_argument(x, t, phi0)),
            amp * sech((t - x / SPEED_OF_LIGHT + phi1) / self.tau),
        ]
    }

    fn medium_argument(&self, x: f64, t: f64, phi0: f64) -> f64 {
        (t - x * self.inverse_group_velocity() + phi0) / self.tau
    }

    pub fn field(&self, x: f64, t: f64) -> f64 {
        let [before, inside, after] = self.branch_values(x, t);
        if x < self.medium.x0 {
            before
        } else if x <= self.medium.x1 {
            inside
        } else {
            after
        }
    }

    /// Field at position `x` and retarded time `t - x/c`.
    pub fn field_retarded(&self, x: f64, retarded: f64) -> f64 {
        self.field(x, retarded + x / SPEED_OF_LIGHT)
    }

    pub fn amplitudes(&self, x: f64, t: f64) -> Result<(C64, C64)> {
        if !self.medium.contains(x) {
            return Err(Error::OutsideMedium { x, x0: self.medium.x0, x1: self.medium.x1 });
        }
        let u = self.medium_argument(x, t, self.phase_offsets().0);
        Ok((C64::new(0.0, sech(u)), C64::new(-libm::tanh(u), 0.0)))
    }
}

/// Peak advance `τ_adv = L·g·τ²/(2c)`, ns.
pub fn advance_time(length: f64, p: &PhysicalParams) -> f64 {
    length * p.g * p.tau * p.tau / (2.0 * SPEED_OF_LIGHT)
}

/// Characteristic length `L₀ = (2πNλ)^(-1/2)`, cm.
pub fn superfluorescence_length(p: &PhysicalParams) -> f64 {
    1.0 / libm::sqrt(2.0 * PI * p.density * p.wavelength)
}

/// Mean superfluorescence delay `⟨τ_D⟩ = (3c/4gL)·ln²(L/L₀)`, ns. Infinite
/// for an empty medium.
pub fn sf_delay_mean(length: f64, p: &PhysicalParams) -> Result<f64> {
    if !(p.density > 0.0 && p.wavelength > 0.0) {
        return Err(Error::invalid("density", "superfluorescence delay needs N > 0 and λ > 0"));
    }
    let l0 = superfluorescence_length(p);
    if !(length > l0) {
        return Err(Error::invalid("length", alloc::format!("L = {length} cm must exceed L0 = {l0:e} cm")));
    }
    let log = libm::log(length / l0);
    Ok(3.0 * SPEED_OF_LIGHT / (4.0 * p.g * length) * log * log)
}

/// Atom count `N·λ·L²` of a Fresnel-number-one cylinder of length `L`.
pub fn atom_count(p: &PhysicalParams, length: f64) -> f64 {
    p.density * p.wavelength * length * length
}

/// Mean initial tipping angle `2/√N_a`.
pub fn mean_tipping_angle(n_atoms: f64) -> f64 {
    2.0 / libm::sqrt(n_atoms)
}

/// Length at which the mean delay equals the peak advance, cm. `None` when
/// the medium is empty.
pub fn advance_delay_crossover(p: &PhysicalParams) -> Option<f64> {
    if p.g <= 0.0 || p.density <= 0.0 {
        return None;
    }
    let l0 = superfluorescence_length(p);
    let gap = |l: f64| sf_delay_mean(l, p).map(|d| d - advance_time(l, p)).unwrap_or(f64::NAN);
    // ln²(L/L₀)/L peaks at e²L₀; the delay exceeds the advance there.
    let mut lo = l0 * core::f64::consts::E * core::f64::consts::E;
    if !(gap(lo) > 0.0) {
        return None;
    }
    let mut hi = 2.0 * lo;
    while gap(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

//! Observables computed from completed solver output.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::analytic::beers_alpha;
use crate::params::PhysicalParams;
use crate::quadrature::DetuningDistribution;
use crate::solver::{AtomAmplitudes, AtomGrid, FieldRecord, SliceTrajectories};
use crate::{Error, Result};

/// Tipping angle (rad) at which superfluorescence is considered emitted.
pub const SF_THRESHOLD: f64 = 1.0;

/// Edge-to-peak ratio above which an area integral is flagged as clipped.
pub const AREA_CLIP_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseArea {
    /// `∫Re Ω dt`, rad.
    pub theta: f64,
    /// `∫Im Ω dt`, reported as a sanity channel.
    pub imag: f64,
    /// Largest endpoint magnitude relative to the series peak.
    pub edge_ratio: f64,
}

impl PulseArea {
    pub fn clipped(&self) -> bool {
        self.edge_ratio > AREA_CLIP_RATIO
    }
}

/// Trapezoidal time integral of the envelope.
pub fn pulse_area(series: &[C64], dt: f64) -> PulseArea {
    let n = series.len();
    if n < 2 {
        return PulseArea { theta: 0.0, imag: 0.0, edge_ratio: 0.0 };
    }
    let mut sum = C64::new(0.0, 0.0);
    for v in &series[1..n - 1] {
        sum += *v;
    }
    sum += 0.5 * (series[0] + series[n - 1]);
    let peak = series.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let edge = series[0].norm().max(series[n - 1].norm());
    PulseArea { theta: sum.re * dt, imag: sum.im * dt, edge_ratio: if peak > 0.0 { edge / peak } else { 0.0 } }
}

/// Pulse area at every x-node with the area-theorem residual
/// `dθ/dx − (α/2)·sin θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaProfile {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub imag: Vec<f64>,
    pub residual: Vec<f64>,
    pub alpha_used: f64,
    /// True when any row's endpoints exceed [`AREA_CLIP_RATIO`] of its peak.
    pub clipped: bool,
}

pub fn area_profile(record: &FieldRecord, p: &PhysicalParams) -> AreaProfile {
    let alpha = beers_alpha(p);
    let dt = record.dt();
    let nx = record.nx();
    let areas: Vec<PulseArea> = (0..nx).map(|i| pulse_area(record.row(i), dt)).collect();
    let theta: Vec<f64> = areas.iter().map(|a| a.theta).collect();
    let dx = record.dx();
    let slope = |i: usize| -> f64 {
        if nx < 2 {
            0.0
        } else if i == 0 {
            (theta[1] - theta[0]) / dx
        } else if i == nx - 1 {
            (theta[nx - 1] - theta[nx - 2]) / dx
        } else {
            (theta[i + 1] - theta[i - 1]) / (2.0 * dx)
        }
    };
    let residual = (0..nx).map(|i| slope(i) - 0.5 * alpha * libm::sin(theta[i])).collect();
    AreaProfile {
        x: (0..nx).map(|i| record.x(i)).collect(),
        imag: areas.iter().map(|a| a.imag).collect(),
        clipped: areas.iter().any(PulseArea::clipped),
        theta,
        residual,
        alpha_used: alpha,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvanceMeasurement {
    pub peak_time_out: f64,
    pub peak_time_reference: f64,
    /// `(reference − output)/τ`; positive when the output leads.
    pub advance_in_tau: f64,
}

/// Time of the largest `|Ω|`, refined by a parabola through the three samples
/// around the maximum.
pub fn peak_time(series: &[C64], t_min: f64, dt: f64) -> Result<f64> {
    let (k, _) =
        series
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, v)| if v.norm() > bv { (k, v.norm()) } else { (bk, bv) });
    if k == 0 || k + 1 >= series.len() {
        return Err(Error::PeakAtEdge(k));
    }
    let (a, b, c) = (series[k - 1].norm(), series[k].norm(), series[k + 1].norm());
    let curvature = a - 2.0 * b + c;
    let offset = if curvature < 0.0 { 0.5 * (a - c) / curvature } else { 0.0 };
    Ok(t_min + (k as f64 + offset) * dt)
}

/// Advance of `output` over `reference`, both sampled on the same retarded
/// time grid.
pub fn peak_advance(output: &[C64], reference: &[C64], t_min: f64, dt: f64, tau: f64) -> Result<AdvanceMeasurement> {
    let out = peak_time(output, t_min, dt)?;
    let reference = peak_time(reference, t_min, dt)?;
    Ok(AdvanceMeasurement {
        peak_time_out: out,
        peak_time_reference: reference,
        advance_in_tau: (reference - out) / tau,
    })
}

/// `arccos(|c₂|² − |c₁|²)`, evaluated as `2·atan2(|c₁|, |c₂|)` to stay exact
/// for tiny angles.
pub fn tipping_angle(c1: C64, c2: C64) -> f64 {
    AtomAmplitudes::new(c1, c2).tipping_angle()
}

/// Weighted-mean and per-node-maximum tipping angle at every time sample.
pub fn tipping_series(history: &SliceTrajectories, detuning: &DetuningDistribution) -> (Vec<f64>, Vec<f64>) {
    let n = history.n_times();
    let mut mean = alloc::vec![0.0; n];
    let mut max = alloc::vec![0.0f64; n];
    for (j, w) in detuning.weights().iter().enumerate() {
        for (k, a) in history.node(j).iter().enumerate() {
            let theta = a.tipping_angle();
            mean[k] += w * theta;
            max[k] = max[k].max(theta);
        }
    }
    (mean, max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfDelay {
    /// Delay from the window start until the weighted-mean tipping angle
    /// reaches [`SF_THRESHOLD`], ns.
    pub mean_criterion: f64,
    /// Same for the most-tipped detuning node.
    pub max_node_criterion: f64,
}

fn first_crossing(series: &[f64], dt: f64) -> Option<f64> {
    if series.first().is_some_and(|&v| v >= SF_THRESHOLD) {
        return Some(0.0);
    }
    series.windows(2).enumerate().find(|(_, w)| w[1] >= SF_THRESHOLD).map(|(k, w)| {
        let frac = (SF_THRESHOLD - w[0]) / (w[1] - w[0]);
        (k as f64 + frac) * dt
    })
}

/// Superfluorescence delay at a probe, measured from the window start.
pub fn sf_delay_time(history: &SliceTrajectories, detuning: &DetuningDistribution, dt: f64) -> Result<SfDelay> {
    let (mean, max) = tipping_series(history, detuning);
    match (first_crossing(&mean, dt), first_crossing(&max, dt)) {
        (Some(m), Some(x)) => Ok(SfDelay { mean_criterion: m, max_node_criterion: x }),
        _ => Err(Error::NoSuperfluorescence { max_tipping: mean.iter().fold(0.0, |a: f64, &b| a.max(b)) }),
    }
}

/// Largest `|1 − (|c₁|² + |c₂|²)|` over the grid.
pub fn norm_residual(atoms: &AtomGrid) -> f64 {
    atoms.amplitudes().iter().fold(0.0, |m, a| m.max((1.0 - a.norm_sqr()).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::sech;
    use crate::solver::{evolve_atoms_slice, AtomAmplitudes};
    use core::f64::consts::PI;

    fn sech_series(t_min: f64, dt: f64, n: usize, tau: f64, cutoff: Option<f64>) -> Vec<C64> {
        (0..n)
            .map(|k| {
                let t = t_min + k as f64 * dt;
                let inside = cutoff.is_none_or(|w| t.abs() <= w * tau);
                C64::new(if inside { 2.0 / tau * sech(t / tau) } else { 0.0 }, 0.0)
            })
            .collect()
    }

    #[test]
    fn area_of_full_sech_is_two_pi() {
        let s = sech_series(-4.0, 1e-4, 80_001, 0.1, None);
        let a = pulse_area(&s, 1e-4);
        assert!((a.theta - 2.0 * PI).abs() < 1e-9);
        assert_eq!(a.imag, 0.0);
        assert!(!a.clipped());
    }

    #[test]
    fn area_of_cut_sech_loses_tail() {
        // Oracle: 2π − 2·∫_{10}^{∞} 2·sech(u) du = 2π − 4(π − 2·atan(e^{10})).
        let tail = 4.0 * (PI - 2.0 * libm::atan(libm::exp(10.0)));
        let expected = 2.0 * PI - tail;
        assert!((tail - 8.0 * libm::exp(-10.0)).abs() < 1e-8);
        assert!((tail - 3.6e-4).abs() < 0.05e-4);
        // Whether the edge samples land inside the cut moves the trapezoid sum
        // by at most dt·Ω(±10τ) ≈ 1.8e-8.
        let dt = 1e-5;
        let s = sech_series(-1.0 - 100.0 * dt, dt, 200_201, 0.1, Some(10.0));
        let a = pulse_area(&s, dt);
        assert!((a.theta - expected).abs() < 5e-8, "{} vs {}", a.theta, expected);
    }

    #[test]
    fn zero_field_has_zero_area() {
        let a = pulse_area(&[C64::new(0.0, 0.0); 10], 0.1);
        assert_eq!(a.theta, 0.0);
    }

    #[test]
    fn clipped_window_flagged() {
        let s = sech_series(-0.3, 1e-3, 601, 0.1, None);
        assert!(pulse_area(&s, 1e-3).clipped());
    }

    #[test]
    fn self_comparison_has_no_advance() {
        let s = sech_series(-2.0, 0.005, 801, 0.1, None);
        let m = peak_advance(&s, &s, -2.0, 0.005, 0.1).unwrap();
        assert_eq!(m.advance_in_tau, 0.0);
    }

    #[test]
    fn quadratic_peak_is_sub_sample() {
        let dt = 0.005;
        let shifted: Vec<C64> =
            (0..801).map(|k| C64::new(20.0 * sech((-2.0 + k as f64 * dt + 0.0123) / 0.1), 0.0)).collect();
        let t = peak_time(&shifted, -2.0, dt).unwrap();
        assert!((t + 0.0123).abs() < 1e-4, "{t}");
    }

    #[test]
    fn edge_maximum_rejected() {
        let ramp: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 0.0)).collect();
        assert!(matches!(peak_time(&ramp, 0.0, 1.0), Err(Error::PeakAtEdge(9))));
    }

    #[test]
    fn tipping_angle_examples() {
        assert_eq!(tipping_angle(C64::new(0.0, 0.0), C64::new(1.0, 0.0)), 0.0);
        assert!((tipping_angle(C64::new(0.0, 1.0), C64::new(0.0, 0.0)) - PI).abs() < 1e-15);
        let a = AtomAmplitudes::from_tipping(1e-4, PI);
        assert!((tipping_angle(a.c1, a.c2) - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn no_sf_from_perfect_inversion() {
        let dist = DetuningDistribution::resonant();
        let traj = evolve_atoms_slice(&[C64::new(0.0, 0.0); 100], &[AtomAmplitudes::INVERTED], &dist, 0.01).unwrap();
        assert!(matches!(sf_delay_time(&traj, &dist, 0.01), Err(Error::NoSuperfluorescence { .. })));
    }

    #[test]
    fn threshold_met_at_first_sample() {
        let dist = DetuningDistribution::resonant();
        let start = AtomAmplitudes::from_tipping(1.0, 0.0);
        let traj = evolve_atoms_slice(&[C64::new(0.0, 0.0); 100], &[start], &dist, 0.01).unwrap();
        assert_eq!(sf_delay_time(&traj, &dist, 0.01).unwrap().mean_criterion, 0.0);
    }

    #[test]
    fn threshold_crossing_interpolates() {
        // Constant resonant drive: θ(t) = Ω·t exactly, so θ = 1 at t = 1/Ω.
        let dist = DetuningDistribution::resonant();
        let omega = 3.0;
        let dt = 0.01;
        let traj = evolve_atoms_slice(&[C64::new(omega, 0.0); 200], &[AtomAmplitudes::INVERTED], &dist, dt).unwrap();
        let d = sf_delay_time(&traj, &dist, dt).unwrap();
        assert!((d.mean_criterion - 1.0 / omega).abs() < 1e-6);
        assert_eq!(d.mean_criterion, d.max_node_criterion);
    }

    #[test]
    fn norm_residual_examples() {
        let fresh = AtomGrid::from_amplitudes(3, 2, alloc::vec![AtomAmplitudes::INVERTED; 6]).unwrap();
        assert!(norm_residual(&fresh) < 1e-15);
        let a = AtomAmplitudes::from_tipping(0.7, 0.2);
        let scaled = AtomAmplitudes::new(1.1 * a.c1, 1.1 * a.c2);
        let grid = AtomGrid::from_amplitudes(1, 1, alloc::vec![scaled]).unwrap();
        assert!((norm_residual(&grid) - 0.21).abs() < 1e-12);
    }
}

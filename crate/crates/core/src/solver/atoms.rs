//! Two-level amplitude evolution at a single position.
//!
//! With `Ω` complex, the amplitude equations are
//!
//! ```text
//! dc₁/dt = i(Ω/2)c₂
//! dc₂/dt = i(Ω*/2)c₁ − iΔc₂
//! ```
//!
//! The free detuning rotation is removed exactly by working with
//! `b₂ = c₂·e^{iΔs}` (`s` measured from the window start); RK4 then only has
//! to integrate the anti-Hermitian coupling, so the step size is limited by
//! `Ω·dt` rather than `Δ·dt`.

use alloc::{vec, vec::Vec};

use num_complex::Complex64 as C64;

use crate::quadrature::DetuningDistribution;
use crate::{Error, Result};

/// Number of detuning nodes summed together before being added to the slice
/// polarization. Fixed so the summation order never depends on threading.
pub const NODE_BLOCK: usize = 16;

/// Steps between exact re-evaluations of the detuning phase factor.
const PHASE_RESYNC: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomAmplitudes {
    pub c1: C64,
    pub c2: C64,
}

impl AtomAmplitudes {
    /// All population in the upper level.
    pub const INVERTED: AtomAmplitudes = AtomAmplitudes { c1: C64::new(0.0, 0.0), c2: C64::new(1.0, 0.0) };

    pub const fn new(c1: C64, c2: C64) -> Self {
        AtomAmplitudes { c1, c2 }
    }

    /// Bloch vector tipped by `theta` from full inversion with dipole phase
    /// `phi`: `c₁ = sin(θ/2)e^{iφ}`, `c₂ = cos(θ/2)`.
    pub fn from_tipping(theta: f64, phi: f64) -> Self {
        let (s, c) = libm::sincos(0.5 * theta);
        AtomAmplitudes { c1: C64::from_polar(s, phi), c2: C64::new(c, 0.0) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// `|c₂|² − |c₁|²`.
    pub fn inversion(&self) -> f64 {
        self.c2.norm_sqr() - self.c1.norm_sqr()
    }

    /// Polar angle of the Bloch vector measured from full inversion.
    pub fn tipping_angle(&self) -> f64 {
        2.0 * libm::atan2(self.c1.norm(), self.c2.norm())
    }

    /// `c₁·c₂*`.
    pub fn dipole(&self) -> C64 {
        self.c1 * self.c2.conj()
    }
}

/// Field at the midpoints between consecutive samples by 4-point cubic
/// interpolation (3-point at the ends).
pub fn half_step_field(omega: &[C64]) -> Vec<C64> {
    let n = omega.len();
    if n < 2 {
        return Vec::new();
    }
    if n < 4 {
        return omega.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let mut mid = Vec::with_capacity(n - 1);
    mid.push((3.0 * omega[0] + 6.0 * omega[1] - omega[2]) / 8.0);
    for k in 1..n - 2 {
        mid.push((9.0 * (omega[k] + omega[k + 1]) - (omega[k - 1] + omega[k + 2])) / 16.0);
    }
    mid.push((3.0 * omega[n - 1] + 6.0 * omega[n - 2] - omega[n - 3]) / 8.0);
    mid
}

/// Integrates one detuning node across the window, calling `visit(k, state)`
/// for every sample `k`. Returns the largest norm deviation encountered.
pub(crate) fn evolve_node(
    omega: &[C64],
    omega_mid: &[C64],
    init: AtomAmplitudes,
    delta: f64,
    dt: f64,
    mut visit: impl FnMut(usize, AtomAmplitudes),
) -> f64 {
    let n = omega.len();
    let mut b1 = init.c1;
    let mut b2 = init.c2;
    let mut max_dev = (1.0 - init.norm_sqr()).abs();
    visit(0, init);
    if n < 2 {
        return max_dev;
    }
    let rot_half = C64::from_polar(1.0, 0.5 * delta * dt);
    let mut phase = C64::new(1.0, 0.0);
    for k in 0..n - 1 {
        if k % PHASE_RESYNC == 0 {
            phase = C64::from_polar(1.0, delta * dt * k as f64);
        }
        let phase_mid = phase * rot_half;
        let phase_next = phase_mid * rot_half;
        // κ = (i/2)·Ω·e^{-iΔs}; generator [[0, κ], [-κ*, 0]].
        let kappa0 = C64::new(0.0, 0.5) * omega[k] * phase.conj();
        let kappa_h = C64::new(0.0, 0.5) * omega_mid[k] * phase_mid.conj();
        let kappa1 = C64::new(0.0, 0.5) * omega[k + 1] * phase_next.conj();

        let h = 0.5 * dt;
        let k1a = kappa0 * b2;
        let k1b = -kappa0.conj() * b1;
        let k2a = kappa_h * (b2 + h * k1b);
        let k2b = -kappa_h.conj() * (b1 + h * k1a);
        let k3a = kappa_h * (b2 + h * k2b);
        let k3b = -kappa_h.conj() * (b1 + h * k2a);
        let k4a = kappa1 * (b2 + dt * k3b);
        let k4b = -kappa1.conj() * (b1 + dt * k3a);
        b1 += dt / 6.0 * (k1a + 2.0 * (k2a + k3a) + k4a);
        b2 += dt / 6.0 * (k1b + 2.0 * (k2b + k3b) + k4b);

        phase = phase_next;
        let state = AtomAmplitudes { c1: b1, c2: b2 * phase.conj() };
        let dev = (1.0 - state.norm_sqr()).abs();
        if !(dev <= max_dev) {
            max_dev = if dev.is_nan() { f64::INFINITY } else { dev };
        }
        visit(k + 1, state);
    }
    max_dev
}

/// Amplitude histories of every detuning node over one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceTrajectories {
    n_times: usize,
    n_nodes: usize,
    /// Node-major storage.
    data: Vec<AtomAmplitudes>,
}

impl SliceTrajectories {
    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn node(&self, j: usize) -> &[AtomAmplitudes] {
        &self.data[j * self.n_times..(j + 1) * self.n_times]
    }

    pub fn at(&self, j: usize, k: usize) -> AtomAmplitudes {
        self.data[j * self.n_times + k]
    }

    pub(crate) fn from_nodes(n_times: usize, n_nodes: usize, data: Vec<AtomAmplitudes>) -> Self {
        debug_assert_eq!(data.len(), n_times * n_nodes);
        SliceTrajectories { n_times, n_nodes, data }
    }

    /// Largest `|1 − (|c₁|² + |c₂|²)|` over the whole history.
    pub fn max_norm_deviation(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max((1.0 - a.norm_sqr()).abs()))
    }
}

fn check_field(omega: &[C64]) -> Result<()> {
    if let Some(k) = omega.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Numerical { slice: 0, reason: alloc::format!("non-finite field at time sample {k}") });
    }
    Ok(())
}

/// Evolves each detuning node from its own initial pair under the field
/// `omega` sampled every `dt`.
pub fn evolve_atoms_slice(
    omega: &[C64],
    init: &[AtomAmplitudes],
    detuning: &DetuningDistribution,
    dt: f64,
) -> Result<SliceTrajectories> {
    if init.len() != detuning.len() {
        return Err(Error::invalid("initial state", "one amplitude pair per detuning node is required"));
    }
    check_field(omega)?;
    let n = omega.len();
    let mid = half_step_field(omega);
    let mut data = vec![AtomAmplitudes::INVERTED; n * detuning.len()];
    for (j, (&delta, &start)) in detuning.nodes().iter().zip(init).enumerate() {
        let row = &mut data[j * n..(j + 1) * n];
        evolve_node(omega, &mid, start, delta, dt, |k, s| row[k] = s);
    }
    Ok(SliceTrajectories::from_nodes(n, detuning.len(), data))
}

/// `P(t) = Σᵢ wᵢ c₁(Δᵢ,t)c₂*(Δᵢ,t)`, summed in fixed node blocks.
pub fn polarization(traj: &SliceTrajectories, detuning: &DetuningDistribution) -> Vec<C64> {
    let n = traj.n_times();
    let mut total = vec![C64::new(0.0, 0.0); n];
    let mut block = vec![C64::new(0.0, 0.0); n];
    for start in (0..traj.n_nodes()).step_by(NODE_BLOCK) {
        block.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
        for j in start..(start + NODE_BLOCK).min(traj.n_nodes()) {
            let w = detuning.weights()[j];
            for (b, a) in block.iter_mut().zip(traj.node(j)) {
                *b += w * a.dipole();
            }
        }
        for (t, b) in total.iter_mut().zip(&block) {
            *t += *b;
        }
    }
    total
}

/// Work distribution for independent detuning-node blocks. Implementations
/// must return results in task order.
pub trait NodeExecutor: Sync {
    fn map<T: Send>(&self, n_tasks: usize, task: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl NodeExecutor for Sequential {
    fn map<T: Send>(&self, n_tasks: usize, task: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..n_tasks).map(task).collect()
    }
}

/// Result of evolving all nodes at one position.
pub(crate) struct SliceEvaluation {
    pub polarization: Vec<C64>,
    pub max_norm_deviation: f64,
    pub final_states: Vec<AtomAmplitudes>,
    pub trajectories: Option<SliceTrajectories>,
}

struct BlockResult {
    polarization: Vec<C64>,
    max_norm_deviation: f64,
    final_states: Vec<AtomAmplitudes>,
    trajectories: Vec<AtomAmplitudes>,
}

/// Evolves every detuning node from the shared initial pair `init` and
/// accumulates the polarization. The arithmetic is identical to
/// [`evolve_atoms_slice`] followed by [`polarization`].
pub(crate) fn evaluate_slice<E: NodeExecutor>(
    omega: &[C64],
    init: AtomAmplitudes,
    detuning: &DetuningDistribution,
    dt: f64,
    keep_trajectories: bool,
    exec: &E,
) -> SliceEvaluation {
    let n = omega.len();
    let mid = half_step_field(omega);
    let n_nodes = detuning.len();
    let n_blocks = n_nodes.div_ceil(NODE_BLOCK);
    let task = |b: usize| {
        let nodes = b * NODE_BLOCK..((b + 1) * NODE_BLOCK).min(n_nodes);
        let mut pol = vec![C64::new(0.0, 0.0); n];
        let mut finals = Vec::with_capacity(nodes.len());
        let mut traj = if keep_trajectories { vec![AtomAmplitudes::INVERTED; n * nodes.len()] } else { Vec::new() };
        let mut max_dev: f64 = 0.0;
        for (local, j) in nodes.enumerate() {
            let w = detuning.weights()[j];
            let mut last = init;
            let dev = evolve_node(omega, &mid, init, detuning.nodes()[j], dt, |k, s| {
                pol[k] += w * s.dipole();
                if keep_trajectories {
                    traj[local * n + k] = s;
                }
                last = s;
            });
            max_dev = max_dev.max(dev);
            finals.push(last);
        }
        BlockResult { polarization: pol, max_norm_deviation: max_dev, final_states: finals, trajectories: traj }
    };
    let blocks = exec.map(n_blocks, &task);

    let mut polarization = vec![C64::new(0.0, 0.0); n];
    let mut max_norm_deviation: f64 = 0.0;
    let mut final_states = Vec::with_capacity(n_nodes);
    let mut traj = Vec::new();
    for block in blocks {
        for (t, b) in polarization.iter_mut().zip(&block.polarization) {
            *t += *b;
        }
        max_norm_deviation = max_norm_deviation.max(block.max_norm_deviation);
        final_states.extend(block.final_states);
        traj.extend(block.trajectories);
    }
    SliceEvaluation {
        polarization,
        max_norm_deviation,
        final_states,
        trajectories: keep_trajectories.then(|| SliceTrajectories::from_nodes(n, n_nodes, traj)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gaussian_detuning_quadrature;

    fn constant(n: usize, v: f64) -> Vec<C64> {
        vec![C64::new(v, 0.0); n]
    }

    #[test]
    fn resonant_rabi_oscillation() {
        // c₂ = cos(Ωt/2), c₁ = i·sin(Ωt/2).
        let omega = 20.0;
        let dt = 0.005;
        let n = 401;
        let traj =
            evolve_atoms_slice(&constant(n, omega), &[AtomAmplitudes::INVERTED], &DetuningDistribution::resonant(), dt)
                .unwrap();
        let mut max_err: f64 = 0.0;
        for k in 0..n {
            let t = k as f64 * dt;
            let s = traj.at(0, k);
            let exact = AtomAmplitudes::new(
                C64::new(0.0, libm::sin(omega * t / 2.0)),
                C64::new(libm::cos(omega * t / 2.0), 0.0),
            );
            max_err = max_err.max((s.c1 - exact.c1).norm()).max((s.c2 - exact.c2).norm());
        }
        // RK4 phase error per step is (Ωdt/2)⁵/120; 400 steps give ≈ 1.0e-6.
        assert!(max_err < 1.5e-6, "{max_err}");
    }

    #[test]
    fn rabi_error_is_fourth_order() {
        let omega = 20.0;
        let t_end = 2.0;
        let err = |n: usize| {
            let dt = t_end / (n - 1) as f64;
            let traj = evolve_atoms_slice(
                &constant(n, omega),
                &[AtomAmplitudes::INVERTED],
                &DetuningDistribution::resonant(),
                dt,
            )
            .unwrap();
            let s = traj.at(0, n - 1);
            (s.c2.re - libm::cos(omega * t_end / 2.0)).abs() + (s.c1.im - libm::sin(omega * t_end / 2.0)).abs()
        };
        let ratio = err(101) / err(201);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn inversion_is_stationary_without_field() {
        let dist = gaussian_detuning_quadrature(0.733, 8).unwrap();
        let init = vec![AtomAmplitudes::INVERTED; 8];
        let traj = evolve_atoms_slice(&constant(100, 0.0), &init, &dist, 0.01).unwrap();
        for j in 0..8 {
            for s in traj.node(j) {
                assert_eq!(s.c1, C64::new(0.0, 0.0));
                assert!((s.c2.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn free_precession_rotates_upper_amplitude() {
        let delta = 7.0;
        let dt = 0.01;
        let dist = DetuningDistribution::from_parts(vec![delta], vec![1.0]).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let init = AtomAmplitudes::new(C64::new(r, 0.0), C64::new(r, 0.0));
        let traj = evolve_atoms_slice(&constant(1001, 0.0), &[init], &dist, dt).unwrap();
        for k in (0..1001).step_by(50) {
            let s = traj.at(0, k);
            let expected = C64::from_polar(r, -delta * dt * k as f64);
            assert!((s.c1 - init.c1).norm() < 1e-15);
            assert!((s.c2 - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn polarization_vanishes_for_inverted_atoms() {
        let dist = gaussian_detuning_quadrature(0.733, 8).unwrap();
        let traj = evolve_atoms_slice(&constant(50, 0.0), &vec![AtomAmplitudes::INVERTED; 8], &dist, 0.01).unwrap();
        assert!(polarization(&traj, &dist).iter().all(|p| p.norm() == 0.0));
    }

    #[test]
    fn single_node_polarization_is_its_dipole() {
        let dist = DetuningDistribution::resonant();
        let traj = evolve_atoms_slice(&constant(50, 3.0), &[AtomAmplitudes::INVERTED], &dist, 0.01).unwrap();
        let pol = polarization(&traj, &dist);
        for (k, p) in pol.iter().enumerate() {
            assert_eq!(*p, traj.at(0, k).dipole());
        }
    }

    #[test]
    fn analytic_amplitudes_give_imaginary_polarization() {
        // c₁ = i·sech u, c₂ = −tanh u ⇒ c₁c₂* = −i·sech u·tanh u.
        for u in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let a = AtomAmplitudes::new(C64::new(0.0, crate::analytic::sech(u)), C64::new(-libm::tanh(u), 0.0));
            let p = a.dipole();
            assert_eq!(p.re, 0.0);
            assert!((p.im + crate::analytic::sech(u) * libm::tanh(u)).abs() < 1e-16);
        }
    }

    #[test]
    fn slice_evaluation_matches_explicit_polarization() {
        let dist = gaussian_detuning_quadrature(0.733, 48).unwrap();
        let omega: Vec<C64> =
            (0..300).map(|k| C64::new(20.0 * crate::analytic::sech((k as f64 * 0.005 - 0.75) / 0.1), 0.0)).collect();
        let init = AtomAmplitudes::from_tipping(1e-3, 0.4);
        let eval = evaluate_slice(&omega, init, &dist, 0.005, true, &Sequential);
        let traj = evolve_atoms_slice(&omega, &vec![init; 48], &dist, 0.005).unwrap();
        assert_eq!(eval.trajectories.as_ref().unwrap(), &traj);
        assert_eq!(eval.polarization, polarization(&traj, &dist));
        assert_eq!(eval.max_norm_deviation, traj.max_norm_deviation());
    }

    #[test]
    fn paired_detunings_give_imaginary_polarization() {
        // Real field, Δ-independent start with c₁ imaginary and c₂ real:
        // node pairs ±Δ are complex conjugates up to the phase convention,
        // so their weighted sum is purely imaginary.
        let dist = gaussian_detuning_quadrature(0.733, 48).unwrap();
        let omega: Vec<C64> =
            (0..400).map(|k| C64::new(20.0 * crate::analytic::sech((k as f64 * 0.005 - 1.0) / 0.1), 0.0)).collect();
        let traj = evolve_atoms_slice(&omega, &vec![AtomAmplitudes::INVERTED; 48], &dist, 0.005).unwrap();
        let pol = polarization(&traj, &dist);
        let k = 200;
        let n = dist.len();
        let mut manual = C64::new(0.0, 0.0);
        for j in 0..n / 2 {
            let pair = traj.at(j, k).dipole() + traj.at(n - 1 - j, k).dipole();
            assert!(pair.re.abs() < 1e-15 * pair.norm().max(1.0), "pair {j}: {pair}");
            manual += dist.weights()[j] * pair;
        }
        assert!(pol[k].re.abs() < 1e-15);
        assert!((pol[k].im - manual.im).abs() < 1e-14);
    }

    #[test]
    fn tipping_parameterization_roundtrip() {
        for theta in [0.0, 1e-4, 0.3, 1.0, 2.5, core::f64::consts::PI] {
            for phi in [0.0, 1.0, core::f64::consts::PI, 5.0] {
                let a = AtomAmplitudes::from_tipping(theta, phi);
                assert!((a.tipping_angle() - theta).abs() < 1e-12, "{theta} {phi}");
            }
        }
    }

    #[test]
    fn half_step_cubic_is_exact_for_cubics() {
        let f = |t: f64| C64::new(t * t * t - 2.0 * t, 0.5 * t * t);
        let samples: Vec<C64> = (0..10).map(|k| f(k as f64 * 0.1)).collect();
        let mid = half_step_field(&samples);
        for (k, m) in mid.iter().enumerate().take(8).skip(1) {
            assert!((m - f((k as f64 + 0.5) * 0.1)).norm() < 1e-14);
        }
        // Ends are quadratic-exact.
        let g = |t: f64| C64::new(t * t, 0.0);
        let samples: Vec<C64> = (0..5).map(|k| g(k as f64)).collect();
        let mid = half_step_field(&samples);
        assert!((mid[0] - g(0.5)).norm() < 1e-14);
        assert!((mid[3] - g(3.5)).norm() < 1e-14);
    }

    #[test]
    fn non_finite_field_rejected() {
        let mut omega = constant(10, 1.0);
        omega[4] = C64::new(f64::NAN, 0.0);
        let err = evolve_atoms_slice(&omega, &[AtomAmplitudes::INVERTED], &DetuningDistribution::resonant(), 0.1);
        assert!(matches!(err, Err(Error::Numerical { .. })));
    }
}

//! Maxwell-Schrödinger solver in the retarded frame.
//!
//! With `ξ = x` and `τ_r = t − x/c` the field equation becomes an ODE in `x`
//! at every retarded time,
//!
//! ```text
//! ∂Ω/∂x = −(ig/c)·P(x, τ_r),   P = Σᵢ wᵢ c₁c₂*,
//! ```
//!
//! and the atoms at each `x` evolve in `τ_r` under the local field. The solver
//! marches in `x` with a Heun predictor-corrector; every evaluation of `P`
//! integrates all detuning nodes across the full time window with RK4.

mod atoms;
mod snapshot;

use alloc::{format, vec::Vec};

use num_complex::Complex64 as C64;

pub use atoms::{
    evolve_atoms_slice, half_step_field, polarization, AtomAmplitudes, NodeExecutor, Sequential, SliceTrajectories,
    NODE_BLOCK,
};
pub use snapshot::lab_frame_snapshot;

use crate::analytic::{beers_alpha, sech_envelope};
use crate::params::{MediumSpec, PhysicalParams, PulseSpec, SPEED_OF_LIGHT};
use crate::quadrature::{DetuningDistribution, QuadratureScheme, DEFAULT_DETUNING_NODES};
use crate::{Error, Result};

/// Norm deviation that aborts a run.
pub const NORM_ABORT: f64 = 1e-6;

/// Relative amplitude an infinite-wing pulse may keep at the window edges.
pub const WING_CLIP_RATIO: f64 = 1e-6;

/// Resolution overrides for [`build_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Requested spatial step, cm; rounded down to divide the medium evenly.
    pub dx: Option<f64>,
    /// Requested time step, ns; rounded down to divide the window evenly.
    /// Defaults to [`default_dt`].
    pub dt: Option<f64>,
    pub detuning_nodes: usize,
    pub scheme: QuadratureScheme,
    /// Accept steps that do not resolve the gain length or the detuning band.
    pub allow_unresolved: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            dx: None,
            dt: None,
            detuning_nodes: DEFAULT_DETUNING_NODES,
            scheme: QuadratureScheme::GaussHermite,
            allow_unresolved: false,
        }
    }
}

/// Discretization of the medium, the retarded-time window and the detuning
/// line.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationGrid {
    x0: f64,
    x1: f64,
    nx: usize,
    t_min: f64,
    t_max: f64,
    nt: usize,
    detuning: DetuningDistribution,
}

/// Largest spatial step that resolves the gain length, `1/(10α)`.
pub fn max_dx(p: &PhysicalParams) -> f64 {
    let alpha = beers_alpha(p);
    if alpha > 0.0 {
        0.1 / alpha
    } else {
        f64::INFINITY
    }
}

/// Largest time step resolving both the pulse and the fastest detuning node.
pub fn max_dt(p: &PhysicalParams, detuning: &DetuningDistribution) -> f64 {
    let dmax = detuning.max_abs();
    let by_detuning = if dmax > 0.0 { 0.1 / dmax } else { f64::INFINITY };
    (p.tau / 20.0).min(by_detuning)
}

/// Time step used when none is requested: `min(τ/30, 0.1/|Δmax|)`.
///
/// RK4 loses norm at a rate ∝ (|Ω|·dt)⁶ per step; at the `τ/20` limit a
/// `2/τ` pulse with trailing ringing drifts by ~1.4e-8, at `τ/30` by ~2e-9.
pub fn default_dt(p: &PhysicalParams, detuning: &DetuningDistribution) -> f64 {
    max_dt(p, detuning).min(p.tau / 30.0)
}

/// Builds a grid over `medium` and the retarded-time `window`, checking that
/// the window holds the whole input pulse and the steps resolve the physics.
pub fn build_grid(
    medium: &MediumSpec,
    p: &PhysicalParams,
    window: (f64, f64),
    pulse: Option<&PulseSpec>,
    opts: &GridOptions,
) -> Result<SimulationGrid> {
    medium.validate()?;
    p.validate()?;
    let (t_min, t_max) = window;
    if !(t_min.is_finite() && t_max.is_finite() && t_max > t_min) {
        return Err(Error::invalid("window", format!("[{t_min}, {t_max}] is degenerate")));
    }
    if let Some(spec) = pulse {
        spec.validate()?;
        let (lo, hi) = match spec.support() {
            Some(s) => s,
            None => {
                let reach = spec.tau * libm::acosh(1.0 / WING_CLIP_RATIO);
                (spec.peak_time - reach, spec.peak_time + reach)
            }
        };
        if lo < t_min || hi > t_max {
            return Err(Error::WindowClipsPulse { t_min, t_max, lo, hi });
        }
    }
    let detuning = DetuningDistribution::new(p.t2_star, opts.detuning_nodes, opts.scheme)?;

    let length = medium.length();
    let dx_limit = max_dx(p);
    let dx_target = opts.dx.unwrap_or(dx_limit);
    if !(dx_target > 0.0) {
        return Err(Error::invalid("dx", format!("{dx_target} must be positive")));
    }
    let x_steps = if dx_target.is_finite() { libm::ceil(length / dx_target - 1e-9).max(1.0) as usize } else { 1 };
    let dx = length / x_steps as f64;
    if !opts.allow_unresolved && dx > dx_limit * (1.0 + 1e-12) {
        return Err(Error::invalid("dx", format!("{dx} cm exceeds 1/(10α) = {dx_limit} cm")));
    }

    let dt_limit = max_dt(p, &detuning);
    let dt_target = opts.dt.unwrap_or_else(|| default_dt(p, &detuning));
    if !(dt_target > 0.0 && dt_target.is_finite()) {
        return Err(Error::invalid("dt", format!("{dt_target} must be positive")));
    }
    let t_steps = libm::ceil((t_max - t_min) / dt_target - 1e-9).max(1.0) as usize;
    let dt = (t_max - t_min) / t_steps as f64;
    if !opts.allow_unresolved && dt > dt_limit * (1.0 + 1e-12) {
        return Err(Error::invalid("dt", format!("{dt} ns exceeds min(τ/20, 0.1/|Δmax|) = {dt_limit} ns")));
    }

    Ok(SimulationGrid { x0: medium.x0, x1: medium.x1, nx: x_steps + 1, t_min, t_max, nt: t_steps + 1, detuning })
}

impl SimulationGrid {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx()
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        if k + 1 == self.nt {
            self.t_max
        } else {
            self.t_min + k as f64 * self.dt()
        }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn medium(&self) -> MediumSpec {
        MediumSpec { x0: self.x0, x1: self.x1 }
    }

    pub fn detuning(&self) -> &DetuningDistribution {
        &self.detuning
    }

    /// Index of the x-node closest to `x`, clamped to the medium.
    pub fn nearest_x_index(&self, x: f64) -> usize {
        let s = libm::round((x - self.x0) / self.dx());
        (s.max(0.0) as usize).min(self.nx - 1)
    }

    /// Samples a pulse on the time nodes.
    pub fn sample_pulse(&self, spec: &PulseSpec) -> Vec<C64> {
        (0..self.nt).map(|k| C64::new(sech_envelope(self.t(k), spec), 0.0)).collect()
    }

    pub fn zero_field(&self) -> Vec<C64> {
        alloc::vec![C64::new(0.0, 0.0); self.nt]
    }
}

/// Initial amplitudes per x-node, shared by all detuning nodes there.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialAtomicState {
    states: Vec<AtomAmplitudes>,
}

impl InitialAtomicState {
    pub fn inverted(nx: usize) -> Self {
        InitialAtomicState { states: alloc::vec![AtomAmplitudes::INVERTED; nx] }
    }

    pub fn from_states(states: Vec<AtomAmplitudes>) -> Result<Self> {
        if let Some(i) = states.iter().position(|a| !((a.norm_sqr() - 1.0).abs() <= 1e-12)) {
            return Err(Error::invalid("initial state", format!("x-node {i} is not unit norm")));
        }
        Ok(InitialAtomicState { states })
    }

    pub fn states(&self) -> &[AtomAmplitudes] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Complex Rabi envelope on the (x-node × retarded-time) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    x0: f64,
    x1: f64,
    nx: usize,
    t_min: f64,
    t_max: f64,
    nt: usize,
    omega: Vec<C64>,
}

impl FieldRecord {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx()
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        if k + 1 == self.nt {
            self.t_max
        } else {
            self.t_min + k as f64 * self.dt()
        }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn medium(&self) -> MediumSpec {
        MediumSpec { x0: self.x0, x1: self.x1 }
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.omega[i * self.nt..(i + 1) * self.nt]
    }

    pub fn at(&self, i: usize, k: usize) -> C64 {
        self.omega[i * self.nt + k]
    }

    pub fn boundary_input(&self) -> &[C64] {
        self.row(0)
    }

    pub fn output_series(&self) -> &[C64] {
        self.row(self.nx - 1)
    }

    pub fn values(&self) -> &[C64] {
        &self.omega
    }

    /// Linear interpolation in retarded time along x-node `i`.
    pub fn sample_row(&self, i: usize, retarded: f64) -> Result<C64> {
        let (k, frac) = self.locate_time(retarded)?;
        let row = self.row(i);
        if frac == 0.0 {
            return Ok(row[k]);
        }
        Ok(row[k] + frac * (row[k + 1] - row[k]))
    }

    /// Bilinear interpolation inside the medium.
    pub fn sample(&self, x: f64, retarded: f64) -> Result<C64> {
        if !(x >= self.x0 && x <= self.x1) {
            return Err(Error::OutsideMedium { x, x0: self.x0, x1: self.x1 });
        }
        let s = ((x - self.x0) / self.dx()).min((self.nx - 1) as f64);
        let i = (libm::floor(s) as usize).min(self.nx - 2);
        let fx = s - i as f64;
        let a = self.sample_row(i, retarded)?;
        if fx == 0.0 {
            return Ok(a);
        }
        let b = self.sample_row(i + 1, retarded)?;
        Ok(a + fx * (b - a))
    }

    fn locate_time(&self, retarded: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * (self.t_max - self.t_min);
        if !(retarded >= self.t_min - tol && retarded <= self.t_max + tol) {
            return Err(Error::OutsideWindow(retarded));
        }
        let s = ((retarded - self.t_min) / self.dt()).clamp(0.0, (self.nt - 1) as f64);
        let k = (libm::floor(s) as usize).min(self.nt - 2);
        Ok((k, s - k as f64))
    }
}

/// Final amplitudes for every (x-node, detuning-node) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomGrid {
    nx: usize,
    n_nodes: usize,
    amplitudes: Vec<AtomAmplitudes>,
}

impl AtomGrid {
    pub fn from_amplitudes(nx: usize, n_nodes: usize, amplitudes: Vec<AtomAmplitudes>) -> Result<Self> {
        if amplitudes.len() != nx * n_nodes {
            return Err(Error::invalid("atom grid", "amplitude count must equal nx × detuning nodes"));
        }
        Ok(AtomGrid { nx, n_nodes, amplitudes })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn get(&self, i: usize, j: usize) -> AtomAmplitudes {
        self.amplitudes[i * self.n_nodes + j]
    }

    pub fn amplitudes(&self) -> &[AtomAmplitudes] {
        &self.amplitudes
    }
}

/// Atom history at one x-node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeHistory {
    pub x_index: usize,
    pub x: f64,
    pub trajectories: SliceTrajectories,
}

/// Everything a propagation run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub field: FieldRecord,
    /// Amplitudes at the end of the window.
    pub atoms: AtomGrid,
    /// Histories at the requested probe positions, in request order.
    pub probes: Vec<ProbeHistory>,
    /// Largest norm deviation over every cell and time of the final solution.
    pub max_norm_deviation: f64,
}

/// [`propagate_with`] on the calling thread.
pub fn propagate(
    grid: &SimulationGrid,
    p: &PhysicalParams,
    boundary: &[C64],
    init: &InitialAtomicState,
    probes: &[f64],
) -> Result<Propagation> {
    propagate_with(grid, p, boundary, init, probes, &Sequential)
}

/// Marches the field from the entrance face to the exit face.
///
/// `boundary` is the envelope at `x0` on the grid's time nodes; `probes` are
/// positions whose atom histories are kept (snapped to the nearest x-node).
/// The output is bit-identical for any executor.
pub fn propagate_with<E: NodeExecutor>(
    grid: &SimulationGrid,
    p: &PhysicalParams,
    boundary: &[C64],
    init: &InitialAtomicState,
    probes: &[f64],
    exec: &E,
) -> Result<Propagation> {
    p.validate()?;
    let (nx, nt) = (grid.nx, grid.nt);
    if boundary.len() != nt {
        return Err(Error::invalid("boundary input", format!("{} samples for {} time nodes", boundary.len(), nt)));
    }
    if init.len() != nx {
        return Err(Error::invalid("initial state", format!("{} entries for {} x-nodes", init.len(), nx)));
    }
    check_finite(boundary, 0)?;

    let dt = grid.dt();
    let detuning = &grid.detuning;
    let probe_idx: Vec<usize> = probes.iter().map(|&x| grid.nearest_x_index(x)).collect();
    let wants_probe = |i: usize| probe_idx.contains(&i);
    let gain = C64::new(0.0, -p.g * grid.dx() / SPEED_OF_LIGHT);

    let mut omega: Vec<C64> = Vec::with_capacity(nx * nt);
    omega.extend_from_slice(boundary);
    let mut finals: Vec<AtomAmplitudes> = Vec::with_capacity(nx * detuning.len());
    let mut histories: Vec<(usize, SliceTrajectories)> = Vec::new();

    let eval =
        |field: &[C64], i: usize, keep: bool| atoms::evaluate_slice(field, init.states()[i], detuning, dt, keep, exec);
    let mut current = eval(boundary, 0, wants_probe(0));
    check_norm(current.max_norm_deviation, 0)?;
    let mut max_dev = current.max_norm_deviation;

    let mut predicted = alloc::vec![C64::new(0.0, 0.0); nt];
    let mut corrected = alloc::vec![C64::new(0.0, 0.0); nt];
    for i in 0..nx - 1 {
        let row = &omega[i * nt..(i + 1) * nt];
        for k in 0..nt {
            predicted[k] = row[k] + gain * current.polarization[k];
        }
        check_finite(&predicted, i + 1)?;
        let trial = eval(&predicted, i + 1, false);
        check_norm(trial.max_norm_deviation, i + 1)?;
        for k in 0..nt {
            corrected[k] = row[k] + 0.5 * gain * (current.polarization[k] + trial.polarization[k]);
        }
        check_finite(&corrected, i + 1)?;
        omega.extend_from_slice(&corrected);

        let next = eval(&corrected, i + 1, wants_probe(i + 1));
        check_norm(next.max_norm_deviation, i + 1)?;
        max_dev = max_dev.max(next.max_norm_deviation);
        let done = core::mem::replace(&mut current, next);
        finals.extend(done.final_states);
        if let Some(t) = done.trajectories {
            histories.push((i, t));
        }
    }
    finals.extend(core::mem::take(&mut current.final_states));
    if let Some(t) = current.trajectories.take() {
        histories.push((nx - 1, t));
    }

    let probes = probe_idx
        .iter()
        .map(|&i| {
            let traj = histories.iter().find(|(j, _)| *j == i).map(|(_, t)| t.clone()).expect("probe history recorded");
            ProbeHistory { x_index: i, x: grid.x(i), trajectories: traj }
        })
        .collect();

    Ok(Propagation {
        field: FieldRecord { x0: grid.x0, x1: grid.x1, nx, t_min: grid.t_min, t_max: grid.t_max, nt, omega },
        atoms: AtomGrid { nx, n_nodes: detuning.len(), amplitudes: finals },
        probes,
        max_norm_deviation: max_dev,
    })
}

fn check_finite(field: &[C64], slice: usize) -> Result<()> {
    match field.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(k) => Err(Error::Numerical { slice, reason: format!("non-finite field at time sample {k}") }),
        None => Ok(()),
    }
}

fn check_norm(dev: f64, slice: usize) -> Result<()> {
    if dev > NORM_ABORT {
        return Err(Error::Numerical { slice, reason: format!("norm deviation {dev:e} exceeds {NORM_ABORT:e}") });
    }
    Ok(())
}

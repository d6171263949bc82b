//! Superfluorescence from quantum-noise initial tipping.
//!
//! Each run seeds every x-slice with a small random Bloch-vector tilt, lets
//! the medium amplify its own polarization without any input, and records
//! when the exit-face atoms tip through
//! [`SF_THRESHOLD`](crate::diagnostics::SF_THRESHOLD). Runs are grouped by
//! medium length and compared against the linear-theory mean delay.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::analytic::{advance_delay_crossover, advance_time, atom_count, sf_delay_mean};
use crate::diagnostics::{sf_delay_time, SfDelay};
use crate::params::{MediumSpec, PhysicalParams};
use crate::solver::{
    build_grid, propagate_with, AtomAmplitudes, GridOptions, InitialAtomicState, NodeExecutor, Propagation,
};
use crate::{Error, Result};

/// Distribution of the initial Bloch-vector azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// `φ ∈ {0, π}`: a real seed polarization.
    #[default]
    Binary,
    /// `φ` uniform on `[0, 2π)`.
    Uniform,
}

/// Sampled per-slice tipping angles and azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct SfInitialState {
    pub theta0: Vec<f64>,
    pub phi: Vec<f64>,
    pub seed: u64,
}

impl SfInitialState {
    pub fn atomic_state(&self) -> Result<InitialAtomicState> {
        InitialAtomicState::from_states(
            self.theta0.iter().zip(&self.phi).map(|(&t, &p)| AtomAmplitudes::from_tipping(t, p)).collect(),
        )
    }
}

/// Draws `nx` tipping angles from a normal law with mean `2/√N_a` and
/// standard deviation `1/√N_a`, redrawing non-positive samples.
pub fn sample_initial_state(seed: u64, nx: usize, n_atoms: f64, mode: PhaseMode) -> Result<SfInitialState> {
    if !(n_atoms.is_finite() && n_atoms >= 1.0) {
        return Err(Error::invalid("atom count", alloc::format!("{n_atoms} must be at least 1")));
    }
    let sd = 1.0 / libm::sqrt(n_atoms);
    let normal = Normal::new(2.0 * sd, sd).map_err(|e| Error::invalid("tipping law", alloc::format!("{e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta0 = Vec::with_capacity(nx);
    let mut phi = Vec::with_capacity(nx);
    for _ in 0..nx {
        let theta = loop {
            let v: f64 = normal.sample(&mut rng);
            if v > 0.0 {
                break v;
            }
        };
        theta0.push(theta);
        phi.push(match mode {
            PhaseMode::Binary => {
                if rng.random_bool(0.5) {
                    PI
                } else {
                    0.0
                }
            }
            PhaseMode::Uniform => 2.0 * PI * rng.random::<f64>(),
        });
    }
    Ok(SfInitialState { theta0, phi, seed })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index` at medium length `length`; independent of
/// scheduling order.
pub fn run_seed(seed0: u64, length: f64, run_index: usize) -> u64 {
    seed0 ^ splitmix64(length.to_bits() ^ splitmix64(run_index as u64))
}

/// One superfluorescence run: initial state, propagation and delay.
#[derive(Debug, Clone)]
pub struct SfRun {
    pub initial: SfInitialState,
    pub propagation: Propagation,
    /// Delay at the exit face, or the reason none was detected.
    pub delay: Result<SfDelay>,
}

/// Default retarded-time window for length `length`: `[0, factor·⟨τ_D⟩]`.
pub fn sf_window(length: f64, p: &PhysicalParams, factor: f64) -> Result<(f64, f64)> {
    let mean = sf_delay_mean(length, p)?;
    if !mean.is_finite() {
        return Err(Error::invalid("window", alloc::format!("no finite delay estimate at L = {length} cm")));
    }
    Ok((0.0, factor * mean))
}

/// Runs one seeded superfluorescence simulation in a medium of `length`
/// starting at `x = 0`.
pub fn sf_run<E: NodeExecutor>(
    p: &PhysicalParams,
    length: f64,
    seed: u64,
    window: (f64, f64),
    opts: &GridOptions,
    mode: PhaseMode,
    exec: &E,
) -> Result<SfRun> {
    let medium = MediumSpec::with_length(0.0, length)?;
    let grid = build_grid(&medium, p, window, None, opts)?;
    let initial = sample_initial_state(seed, grid.nx(), atom_count(p, length), mode)?;
    let state = initial.atomic_state()?;
    let propagation = propagate_with(&grid, p, &grid.zero_field(), &state, &[medium.x1], exec)?;
    let delay = sf_delay_time(&propagation.probes[0].trajectories, grid.detuning(), grid.dt());
    Ok(SfRun { initial, propagation, delay })
}

/// Lengths, run count and resolution of an ensemble study.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub params: PhysicalParams,
    pub lengths: Vec<f64>,
    pub runs: usize,
    pub seed0: u64,
    /// Window length in units of the predicted mean delay.
    pub window_factor: f64,
    pub grid: GridOptions,
    pub phase_mode: PhaseMode,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.lengths.is_empty() {
            return Err(Error::invalid(
                "lengths",
                alloc::string::String::from("at least one medium length is required"),
            ));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs", alloc::string::String::from("must be positive")));
        }
        if !(self.window_factor > 0.0 && self.window_factor.is_finite()) {
            return Err(Error::invalid("window_factor", alloc::format!("{} must be positive", self.window_factor)));
        }
        for &l in &self.lengths {
            sf_window(l, &self.params, self.window_factor)?;
        }
        Ok(())
    }

    /// Every (length, run) pair in length-major order.
    pub fn jobs(&self) -> Vec<EnsembleJob> {
        self.lengths
            .iter()
            .enumerate()
            .flat_map(|(li, &length)| {
                (0..self.runs).map(move |k| EnsembleJob {
                    length_index: li,
                    run_index: k,
                    length,
                    seed: run_seed(self.seed0, length, k),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleJob {
    pub length_index: usize,
    pub run_index: usize,
    pub length: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub job: EnsembleJob,
    pub delay: Result<SfDelay>,
    /// Largest norm deviation of the run; NaN when it did not complete.
    pub max_norm_deviation: f64,
}

/// Runs a single job; node-level work goes through `exec`.
pub fn run_job<E: NodeExecutor>(spec: &EnsembleSpec, job: &EnsembleJob, exec: &E) -> RunOutcome {
    let run = sf_window(job.length, &spec.params, spec.window_factor)
        .and_then(|window| sf_run(&spec.params, job.length, job.seed, window, &spec.grid, spec.phase_mode, exec));
    match run {
        Ok(r) => RunOutcome { job: *job, delay: r.delay, max_norm_deviation: r.propagation.max_norm_deviation },
        Err(e) => RunOutcome { job: *job, delay: Err(e), max_norm_deviation: f64::NAN },
    }
}

/// Delay statistics at one length.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayStatistics {
    pub length: f64,
    /// Delays of the runs that reached threshold, in run order.
    pub delays: Vec<f64>,
    /// Runs that failed or never reached threshold, with the reason.
    pub failures: Vec<(usize, Error)>,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); zero for a single run.
    pub std: f64,
    pub predicted_mean: f64,
}

impl DelayStatistics {
    pub fn relative_error(&self) -> f64 {
        (self.mean - self.predicted_mean).abs() / self.predicted_mean
    }
}

/// Groups outcomes by length. The result does not depend on outcome order.
pub fn aggregate(spec: &EnsembleSpec, mut outcomes: Vec<RunOutcome>) -> Result<Vec<DelayStatistics>> {
    outcomes.sort_by_key(|o| (o.job.length_index, o.job.run_index));
    spec.lengths
        .iter()
        .enumerate()
        .map(|(li, &length)| {
            let mut delays = Vec::new();
            let mut failures = Vec::new();
            for o in outcomes.iter().filter(|o| o.job.length_index == li) {
                match &o.delay {
                    Ok(d) => delays.push(d.mean_criterion),
                    Err(e) => failures.push((o.job.run_index, e.clone())),
                }
            }
            let n = delays.len() as f64;
            let mean = if delays.is_empty() { f64::NAN } else { delays.iter().sum::<f64>() / n };
            let std = if delays.len() > 1 {
                libm::sqrt(delays.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0))
            } else {
                0.0
            };
            Ok(DelayStatistics {
                length,
                delays,
                failures,
                mean,
                std,
                predicted_mean: sf_delay_mean(length, &spec.params)?,
            })
        })
        .collect()
}

/// Runs every job on the calling thread.
pub fn run_ensemble<E: NodeExecutor>(spec: &EnsembleSpec, exec: &E) -> Result<Vec<DelayStatistics>> {
    spec.validate()?;
    let outcomes = spec.jobs().iter().map(|j| run_job(spec, j, exec)).collect();
    aggregate(spec, outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub length: f64,
    pub mean: f64,
    pub std: f64,
    pub predicted_mean: f64,
    pub advance: f64,
    /// True when the mean delay exceeds the pulse advance at this length.
    pub delay_exceeds_advance: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolderComparison {
    pub rows: Vec<ComparisonRow>,
    /// Length where the predicted delay equals the advance.
    pub predicted_crossover: Option<f64>,
    /// Length where the measured mean delay first drops below the advance,
    /// linearly interpolated between adjacent lengths.
    pub measured_crossover: Option<f64>,
}

pub fn compare_to_polder(stats: &[DelayStatistics], p: &PhysicalParams) -> PolderComparison {
    let mut rows: Vec<ComparisonRow> = stats
        .iter()
        .map(|s| {
            let advance = advance_time(s.length, p);
            ComparisonRow {
                length: s.length,
                mean: s.mean,
                std: s.std,
                predicted_mean: s.predicted_mean,
                advance,
                delay_exceeds_advance: s.mean > advance,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.length.total_cmp(&b.length));
    let measured_crossover = rows.windows(2).find_map(|w| {
        let (d0, d1) = (w[0].mean - w[0].advance, w[1].mean - w[1].advance);
        (d0 > 0.0 && d1 <= 0.0).then(|| w[0].length + d0 / (d0 - d1) * (w[1].length - w[0].length))
    });
    PolderComparison { rows, predicted_crossover: advance_delay_crossover(p), measured_crossover }
}

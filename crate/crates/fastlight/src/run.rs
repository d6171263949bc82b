//! Executes a resolved configuration: computes, writes CSV files and the run
//! manifest.
//!
//! Output schemas (all CSV, header row first):
//!
//! * `snapshot_<i>.csv`: `t_tau, x_ctau, x_cm, omega_re, omega_im, omega_scaled`
//!   where `omega_scaled = |Ω|·τ/2`.
//! * `output.csv`: `t_ns, t_tau, input_re, input_im, output_re, output_im,
//!   output_scaled` against retarded time.
//! * `area.csv`: `x_cm, x_ctau, gain_lengths, theta, theta_over_pi, imag, residual`.
//! * `probe_<i>.csv`: `t_ns, t_tau, tipping_mean, tipping_max`.
//! * `initial_state.csv`: `x_cm, theta0, phi`.
//! * `delays.csv`: one row per ensemble run.
//! * `polder.csv`: one row per ensemble length.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use fastlight_core::analytic::{advance_time, atom_count, beers_alpha, sf_delay_mean, AnalyticSolution, VelocityMode};
use fastlight_core::diagnostics::{
    area_profile, norm_residual, peak_advance, sf_delay_time, tipping_series, AreaProfile,
};
use fastlight_core::ensemble::{
    aggregate, compare_to_polder, run_seed, sample_initial_state, sf_window, EnsembleSpec, SfInitialState,
};
use fastlight_core::solver::{
    build_grid, lab_frame_snapshot, propagate_with, FieldRecord, InitialAtomicState, Propagation, SimulationGrid,
};
use fastlight_core::{Error, PulseSpec, C64, SPEED_OF_LIGHT};
use rayon::ThreadPool;
use serde_json::{json, Value};

use crate::config::{Scenario, Seeding, SimulationConfig, Velocity};
use crate::csv::{write_series, write_table, Cell};
use crate::error::CliError;
use crate::manifest::{record_outputs, GridRecord, RunManifest};
use crate::parallel::{run_outcomes, thread_pool, PoolExecutor};

/// Window before the peak of an infinite-wing pulse, units of τ.
pub const WING_LEAD: f64 = 30.0;
/// Window after the peak of an infinite-wing pulse, units of τ.
pub const WING_TAIL: f64 = 15.0;
/// Window after the peak of a cut-off pulse, units of τ.
pub const CUTOFF_TAIL: f64 = 80.0;

/// Name of the resolved configuration written next to the outputs.
pub const RESOLVED_CONFIG: &str = "resolved.conf";

/// What a finished run produced.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    /// Conditions worth reporting that did not abort the run.
    pub warnings: Vec<String>,
}

/// Retarded-time window of a pulse run: explicit bounds win, otherwise
/// `[peak − 30τ, peak + 15τ]` for infinite wings and
/// `[leading edge, peak + 80τ]` for a cut-off pulse.
pub fn pulse_window(cfg: &SimulationConfig, pulse: &PulseSpec) -> (f64, f64) {
    let (lo, hi) = match pulse.support() {
        Some((lo, _)) => (lo, pulse.peak_time + CUTOFF_TAIL * pulse.tau),
        None => (pulse.peak_time - WING_LEAD * pulse.tau, pulse.peak_time + WING_TAIL * pulse.tau),
    };
    (cfg.window.0.unwrap_or(lo), cfg.window.1.unwrap_or(hi))
}

/// Window of a superfluorescence run: `[0, window_factor·⟨τ_D⟩]` unless set.
pub fn sf_run_window(cfg: &SimulationConfig) -> Result<(f64, f64), CliError> {
    let (lo, hi) = sf_window(cfg.length, &cfg.params, cfg.window_factor)?;
    Ok((cfg.window.0.unwrap_or(lo), cfg.window.1.unwrap_or(hi)))
}

/// Seed of a single seeded run; equals run 0 of a sweep at the same length.
pub fn single_run_seed(cfg: &SimulationConfig) -> u64 {
    run_seed(cfg.seed, cfg.length, 0)
}

/// Initial atoms: perfect inversion, or tipping-angle seeding.
pub fn initial_state(
    cfg: &SimulationConfig,
    grid: &SimulationGrid,
) -> Result<(InitialAtomicState, Option<SfInitialState>), CliError> {
    match cfg.seeding {
        Seeding::None => Ok((InitialAtomicState::inverted(grid.nx()), None)),
        Seeding::Tipping => {
            let s =
                sample_initial_state(single_run_seed(cfg), grid.nx(), atom_count(&cfg.params, cfg.length), cfg.phase)?;
            Ok((s.atomic_state()?, Some(s)))
        }
    }
}

/// A propagated pulse run, kept in memory for inspection.
#[derive(Debug, Clone)]
pub struct PulseRun {
    pub pulse: PulseSpec,
    pub grid: SimulationGrid,
    pub boundary: Vec<C64>,
    pub seed_state: Option<SfInitialState>,
    pub propagation: Propagation,
}

/// Builds the grid and propagates the configured input pulse.
pub fn propagate_pulse(cfg: &SimulationConfig, pool: &ThreadPool) -> Result<PulseRun, CliError> {
    let pulse =
        cfg.pulse.ok_or_else(|| CliError::Validation("this run requires an input pulse (shape = sech)".into()))?;
    let grid = build_grid(&cfg.medium(), &cfg.params, pulse_window(cfg, &pulse), Some(&pulse), &cfg.grid)?;
    let boundary = grid.sample_pulse(&pulse);
    let (init, seed_state) = initial_state(cfg, &grid)?;
    let propagation = propagate_with(&grid, &cfg.params, &boundary, &init, &cfg.probes, &PoolExecutor::new(pool))?;
    Ok(PulseRun { pulse, grid, boundary, seed_state, propagation })
}

/// A single superfluorescence run. The exit-face history is always the first
/// probe, followed by the configured probes.
#[derive(Debug, Clone)]
pub struct SfSingleRun {
    pub grid: SimulationGrid,
    pub seed_state: SfInitialState,
    pub propagation: Propagation,
    pub delay: Result<fastlight_core::diagnostics::SfDelay, Error>,
}

pub fn propagate_sf(cfg: &SimulationConfig, pool: &ThreadPool) -> Result<SfSingleRun, CliError> {
    let medium = cfg.medium();
    let grid = build_grid(&medium, &cfg.params, sf_run_window(cfg)?, None, &cfg.grid)?;
    let (init, seed_state) = initial_state(cfg, &grid)?;
    let seed_state =
        seed_state.ok_or_else(|| CliError::Validation("superfluorescence runs require seeding = tipping".into()))?;
    let mut probes = vec![medium.x1];
    probes.extend_from_slice(&cfg.probes);
    let propagation = propagate_with(&grid, &cfg.params, &grid.zero_field(), &init, &probes, &PoolExecutor::new(pool))?;
    let delay = sf_delay_time(&propagation.probes[0].trajectories, grid.detuning(), grid.dt());
    Ok(SfSingleRun { grid, seed_state, propagation, delay })
}

/// Runs the configuration with `jobs` workers (0 = one per CPU) and writes
/// every output plus the manifest into `cfg.out`.
pub fn run_command(cfg: &SimulationConfig, jobs: usize) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let dir = cfg.out.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let pool = thread_pool(jobs)?;

    let mut out = Outputs { dir: &dir, files: Vec::new(), warnings: Vec::new() };
    let resolved = cfg.to_text();
    out.text(RESOLVED_CONFIG, &resolved)?;
    let (grids, summary) = match cfg.scenario() {
        Scenario::Analytic => run_analytic(cfg, &mut out)?,
        Scenario::Propagate => run_propagate(cfg, &pool, &mut out)?,
        Scenario::Sf => run_sf(cfg, &pool, &mut out)?,
        Scenario::Sweep => run_sweep(cfg, &pool, &mut out)?,
    };
    if cfg.plot_scripts {
        let script = gnuplot_script(cfg, &out.files);
        out.text("plot.gp", &script)?;
    }

    let Outputs { files, warnings, .. } = out;
    let manifest = RunManifest {
        program: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: cfg.mode.name().into(),
        figure: cfg.figure,
        seed: cfg.seed,
        jobs: pool.current_num_threads(),
        config: resolved,
        started_unix_s: started,
        wall_clock_s: clock.elapsed().as_secs_f64(),
        grids,
        outputs: record_outputs(&dir, &files)?,
        summary,
    };
    manifest.write(&dir)?;
    Ok(RunReport { out_dir: dir, manifest, warnings })
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
    warnings: Vec<String>,
}

impl Outputs<'_> {
    fn series(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        write_series(&self.dir.join(name), columns, rows)?;
        self.files.push(name.into());
        Ok(())
    }

    fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
        write_table(&self.dir.join(name), columns, rows)?;
        self.files.push(name.into());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.into());
        Ok(())
    }
}

fn grid_record(label: &str, grid: &SimulationGrid) -> GridRecord {
    let (t_min, t_max) = grid.window();
    GridRecord {
        label: label.into(),
        nx: grid.nx(),
        nt: grid.nt(),
        detuning_nodes: grid.detuning().len(),
        dx_cm: grid.dx(),
        dt_ns: grid.dt(),
        t_min_ns: t_min,
        t_max_ns: t_max,
    }
}

fn snapshot_positions(cfg: &SimulationConfig) -> Vec<f64> {
    let (a, b) = cfg.snapshot_x;
    let n = cfg.snapshot_points;
    let c_tau = cfg.params.c_tau();
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64) * c_tau).collect()
}

const SNAPSHOT_COLUMNS: [&str; 6] = ["t_tau", "x_ctau", "x_cm", "omega_re", "omega_im", "omega_scaled"];

fn write_snapshots(
    cfg: &SimulationConfig,
    out: &mut Outputs,
    field: impl Fn(f64, &[f64]) -> Result<Vec<C64>, CliError>,
) -> Result<(), CliError> {
    let xs = snapshot_positions(cfg);
    let tau = cfg.params.tau;
    let c_tau = cfg.params.c_tau();
    for (i, &t) in cfg.snapshot_times.iter().enumerate() {
        let values = field(t * tau, &xs)?;
        let rows: Vec<Vec<f64>> =
            xs.iter().zip(&values).map(|(&x, v)| vec![t, x / c_tau, x, v.re, v.im, v.norm() * tau / 2.0]).collect();
        out.series(&format!("snapshot_{i}.csv"), &SNAPSHOT_COLUMNS, &rows)?;
    }
    Ok(())
}

fn velocity_mode(v: Velocity) -> VelocityMode {
    match v {
        Velocity::Limit => VelocityMode::Limit,
        Velocity::Quadrature => VelocityMode::Quadrature,
    }
}

fn run_analytic(cfg: &SimulationConfig, out: &mut Outputs) -> Result<(Vec<GridRecord>, Value), CliError> {
    let p = &cfg.params;
    let pulse = cfg.pulse.expect("validated: analytic runs carry a pulse");
    let solution = AnalyticSolution::new(&cfg.medium(), p, velocity_mode(cfg.velocity));
    write_snapshots(cfg, out, |t, xs| {
        Ok(xs.iter().map(|&x| C64::new(solution.field(x, t - pulse.peak_time), 0.0)).collect())
    })?;
    let xs = snapshot_positions(cfg);
    let grids = vec![GridRecord {
        label: "snapshot".into(),
        nx: xs.len(),
        nt: cfg.snapshot_times.len(),
        detuning_nodes: 0,
        dx_cm: xs[1] - xs[0],
        dt_ns: 0.0,
        t_min_ns: cfg.snapshot_times.iter().copied().fold(f64::INFINITY, f64::min) * p.tau,
        t_max_ns: cfg.snapshot_times.iter().copied().fold(f64::NEG_INFINITY, f64::max) * p.tau,
    }];
    let (phi0, phi1) = solution.phase_offsets();
    let summary = json!({
        "group_velocity_over_c": 1.0 / (SPEED_OF_LIGHT * solution.inverse_group_velocity()),
        "alpha_per_cm": beers_alpha(p),
        "advance_tau": solution.advance() / p.tau,
        "phase_offsets_ns": [phi0, phi1],
        "medium_cm": [cfg.x0, cfg.x0 + cfg.length],
    });
    Ok((grids, summary))
}

fn area_rows(profile: &AreaProfile, cfg: &SimulationConfig) -> Vec<Vec<f64>> {
    let alpha = beers_alpha(&cfg.params);
    let c_tau = cfg.params.c_tau();
    (0..profile.x.len())
        .map(|i| {
            let x = profile.x[i];
            vec![
                x,
                x / c_tau,
                alpha * (x - cfg.x0),
                profile.theta[i],
                profile.theta[i] / std::f64::consts::PI,
                profile.imag[i],
                profile.residual[i],
            ]
        })
        .collect()
}

fn write_probes(
    out: &mut Outputs,
    probes: &[fastlight_core::solver::ProbeHistory],
    grid: &SimulationGrid,
    tau: f64,
    first_index: usize,
) -> Result<(), CliError> {
    for (i, probe) in probes.iter().enumerate() {
        let (mean, max) = tipping_series(&probe.trajectories, grid.detuning());
        let rows: Vec<Vec<f64>> = (0..grid.nt()).map(|k| vec![grid.t(k), grid.t(k) / tau, mean[k], max[k]]).collect();
        out.series(
            &format!("probe_{}.csv", first_index + i),
            &["t_ns", "t_tau", "tipping_mean", "tipping_max"],
            &rows,
        )?;
    }
    Ok(())
}

fn write_seed_state(out: &mut Outputs, grid: &SimulationGrid, s: &SfInitialState) -> Result<(), CliError> {
    let rows: Vec<Vec<f64>> = (0..grid.nx()).map(|i| vec![grid.x(i), s.theta0[i], s.phi[i]]).collect();
    out.series("initial_state.csv", &["x_cm", "theta0", "phi"], &rows)
}

fn write_output_series(out: &mut Outputs, record: &FieldRecord, input: &[C64], tau: f64) -> Result<(), CliError> {
    let rows: Vec<Vec<f64>> = record
        .output_series()
        .iter()
        .zip(input)
        .enumerate()
        .map(|(k, (o, i))| {
            let t = record.t(k);
            vec![t, t / tau, i.re, i.im, o.re, o.im, o.norm() * tau / 2.0]
        })
        .collect();
    out.series(
        "output.csv",
        &["t_ns", "t_tau", "input_re", "input_im", "output_re", "output_im", "output_scaled"],
        &rows,
    )
}

fn run_propagate(
    cfg: &SimulationConfig,
    pool: &ThreadPool,
    out: &mut Outputs,
) -> Result<(Vec<GridRecord>, Value), CliError> {
    let p = &cfg.params;
    let run = propagate_pulse(cfg, pool)?;
    let record = &run.propagation.field;
    let (t_min, _) = record.window();

    write_output_series(out, record, &run.boundary, p.tau)?;
    let profile = area_profile(record, p);
    out.series(
        "area.csv",
        &["x_cm", "x_ctau", "gain_lengths", "theta", "theta_over_pi", "imag", "residual"],
        &area_rows(&profile, cfg),
    )?;
    write_probes(out, &run.propagation.probes, &run.grid, p.tau, 0)?;
    if let Some(s) = &run.seed_state {
        write_seed_state(out, &run.grid, s)?;
    }
    write_snapshots(cfg, out, |t, xs| Ok(lab_frame_snapshot(record, t, Some(&run.pulse), xs)?))?;

    let advance = match peak_advance(record.output_series(), &run.boundary, t_min, record.dt(), p.tau) {
        Ok(a) => json!({
            "advance_tau": a.advance_in_tau,
            "peak_time_out_ns": a.peak_time_out,
            "peak_time_in_ns": a.peak_time_reference,
        }),
        Err(e) => {
            out.warnings.push(format!("peak advance unavailable: {e}"));
            json!({ "error": e.to_string() })
        }
    };
    if profile.clipped {
        out.warnings.push("the window clips the pulse tails; areas are approximate".into());
    }
    let discrete = AnalyticSolution::with_distribution(&cfg.medium(), p, run.grid.detuning());
    let summary = json!({
        "measured": advance,
        "predicted_advance_tau": {
            "limit": advance_time(cfg.length, p) / p.tau,
            "grid_quadrature": discrete.advance() / p.tau,
        },
        "area_entry": profile.theta.first(),
        "area_exit": profile.theta.last(),
        "area_clipped": profile.clipped,
        "max_norm_deviation": run.propagation.max_norm_deviation,
        "final_norm_residual": norm_residual(&run.propagation.atoms),
        "seed": run.seed_state.as_ref().map(|s| s.seed),
    });
    Ok((vec![grid_record("propagation", &run.grid)], summary))
}

fn run_sf(cfg: &SimulationConfig, pool: &ThreadPool, out: &mut Outputs) -> Result<(Vec<GridRecord>, Value), CliError> {
    let p = &cfg.params;
    let run = propagate_sf(cfg, pool)?;
    let record = &run.propagation.field;
    let zeros = run.grid.zero_field();
    write_output_series(out, record, &zeros, p.tau)?;
    write_probes(out, &run.propagation.probes[..1], &run.grid, p.tau, 0)?;
    write_probes(out, &run.propagation.probes[1..], &run.grid, p.tau, 1)?;
    write_seed_state(out, &run.grid, &run.seed_state)?;
    write_snapshots(cfg, out, |t, xs| Ok(lab_frame_snapshot(record, t, None, xs)?))?;

    let predicted = sf_delay_mean(cfg.length, p)?;
    let delay = match &run.delay {
        Ok(d) => json!({
            "mean_criterion_ns": d.mean_criterion,
            "mean_criterion_tau": d.mean_criterion / p.tau,
            "max_node_criterion_ns": d.max_node_criterion,
        }),
        Err(e) => {
            out.warnings.push(e.to_string());
            json!({ "error": e.to_string() })
        }
    };
    let summary = json!({
        "delay": delay,
        "predicted_mean_delay_ns": predicted,
        "predicted_mean_delay_tau": predicted / p.tau,
        "advance_tau": advance_time(cfg.length, p) / p.tau,
        "seed": run.seed_state.seed,
        "max_norm_deviation": run.propagation.max_norm_deviation,
    });
    Ok((vec![grid_record("superfluorescence", &run.grid)], summary))
}

/// Ensemble definition of a sweep configuration.
pub fn ensemble_spec(cfg: &SimulationConfig) -> EnsembleSpec {
    EnsembleSpec {
        params: cfg.params,
        lengths: cfg.lengths.clone(),
        runs: cfg.runs,
        seed0: cfg.seed,
        window_factor: cfg.window_factor,
        grid: cfg.grid,
        phase_mode: cfg.phase,
    }
}

fn run_sweep(
    cfg: &SimulationConfig,
    pool: &ThreadPool,
    out: &mut Outputs,
) -> Result<(Vec<GridRecord>, Value), CliError> {
    let p = &cfg.params;
    let spec = ensemble_spec(cfg);
    spec.validate()?;
    let mut grids = Vec::with_capacity(spec.lengths.len());
    for &l in &spec.lengths {
        let medium = fastlight_core::MediumSpec::with_length(0.0, l)?;
        let grid = build_grid(&medium, p, sf_window(l, p, spec.window_factor)?, None, &spec.grid)?;
        grids.push(grid_record(&format!("L = {l} cm"), &grid));
    }

    let mut outcomes = run_outcomes(&spec, pool);
    outcomes.sort_by_key(|o| (o.job.length_index, o.job.run_index));
    for o in &outcomes {
        if let Err(e @ Error::Numerical { .. }) = &o.delay {
            return Err(CliError::Numerical(format!("L = {} cm, run {}: {e}", o.job.length, o.job.run_index)));
        }
    }
    let max_norm_deviation = outcomes.iter().map(|o| o.max_norm_deviation).fold(0.0, f64::max);
    let c_tau = p.c_tau();
    let rows: Vec<Vec<Cell>> = outcomes
        .iter()
        .map(|o| {
            let (status, mean, max_node) = match &o.delay {
                Ok(d) => ("ok", d.mean_criterion, d.max_node_criterion),
                Err(Error::NoSuperfluorescence { .. }) => ("no_sf", f64::NAN, f64::NAN),
                Err(_) => ("error", f64::NAN, f64::NAN),
            };
            vec![
                o.job.length.into(),
                (o.job.length / c_tau).into(),
                o.job.run_index.into(),
                o.job.seed.into(),
                status.into(),
                mean.into(),
                (mean / p.tau).into(),
                (max_node / p.tau).into(),
                o.max_norm_deviation.into(),
            ]
        })
        .collect();
    out.table(
        "delays.csv",
        &[
            "length_cm",
            "length_ctau",
            "run",
            "seed",
            "status",
            "delay_ns",
            "delay_tau",
            "max_node_delay_tau",
            "max_norm_deviation",
        ],
        &rows,
    )?;

    let stats = aggregate(&spec, outcomes)?;
    let cmp = compare_to_polder(&stats, p);
    let rows: Vec<Vec<Cell>> = cmp
        .rows
        .iter()
        .zip(&stats)
        .map(|(r, s)| {
            vec![
                r.length.into(),
                (r.length / c_tau).into(),
                s.delays.len().into(),
                s.failures.len().into(),
                (r.mean / p.tau).into(),
                (r.std / p.tau).into(),
                (r.predicted_mean / p.tau).into(),
                (r.advance / p.tau).into(),
                s.relative_error().into(),
                r.delay_exceeds_advance.into(),
            ]
        })
        .collect();
    out.table(
        "polder.csv",
        &[
            "length_cm",
            "length_ctau",
            "triggered",
            "not_triggered",
            "mean_delay_tau",
            "std_delay_tau",
            "predicted_delay_tau",
            "advance_tau",
            "relative_error",
            "delay_exceeds_advance",
        ],
        &rows,
    )?;
    for s in stats.iter().filter(|s| !s.failures.is_empty()) {
        out.warnings.push(format!(
            "L = {} cm: {} of {} runs did not reach threshold",
            s.length,
            s.failures.len(),
            spec.runs
        ));
    }
    let summary = json!({
        "lengths": spec.lengths.len(),
        "runs_per_length": spec.runs,
        "predicted_crossover_ctau": cmp.predicted_crossover.map(|l| l / c_tau),
        "measured_crossover_ctau": cmp.measured_crossover.map(|l| l / c_tau),
        "window_factor": spec.window_factor,
        "max_norm_deviation": max_norm_deviation,
    });
    Ok((grids, summary))
}

fn gnuplot_script(cfg: &SimulationConfig, files: &[PathBuf]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    let medium = (cfg.x0 / cfg.params.c_tau(), (cfg.x0 + cfg.length) / cfg.params.c_tau());
    for f in files {
        let name = f.to_string_lossy();
        let line = if name.starts_with("snapshot_") {
            format!(
                "set object 1 rect from {},graph 0 to {},graph 1 fc rgb '#dddddd' behind\nset xlabel 'x / c tau'\nplot '{name}' using 2:6 with lines\nunset object 1\n",
                medium.0, medium.1
            )
        } else if name == "output.csv" {
            format!("set xlabel 't / tau'\nplot '{name}' using 2:(sqrt($3**2+$4**2)*0.5*{tau}) with lines, '' using 2:7 with lines\n", tau = cfg.params.tau)
        } else if name == "area.csv" {
            format!("set xlabel 'gain lengths'\nplot '{name}' using 3:5 with lines\n")
        } else if name == "polder.csv" {
            format!("set xlabel 'L / c tau'\nplot '{name}' using 2:5:6 with yerrorbars, '' using 2:7 with lines, '' using 2:8 with lines\n")
        } else if name.starts_with("probe_") {
            format!("set xlabel 't / tau'\nplot '{name}' using 2:3 with lines, '' using 2:4 with lines\n")
        } else {
            continue;
        };
        s.push_str(&line);
        s.push_str("pause -1\n");
    }
    s
}

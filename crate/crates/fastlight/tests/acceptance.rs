//! Acceptance run. Prints one PASS or FAIL line per criterion, preceded by
//! indented detail lines where useful.
//!
//! Failures are reported, not raised, so the rest of the suite still runs.
//! Set `FASTLIGHT_ACCEPTANCE_STRICT=1` to exit non-zero on any FAIL.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use fastlight::config::{parse_config, SimulationConfig};
use fastlight::parallel::{run_outcomes, thread_pool};
use fastlight::run::{ensemble_spec, propagate_pulse, propagate_sf, run_command, PulseRun};
use fastlight_core::analytic::{beers_alpha, group_velocity, sf_delay_mean, AnalyticSolution, VelocityMode};
use fastlight_core::diagnostics::{area_profile, peak_advance};
use fastlight_core::ensemble::{aggregate, compare_to_polder, DelayStatistics};
use fastlight_core::{PhysicalParams, C64};
use rayon::ThreadPool;

struct Verdict {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Norm deviations of every run made, for the conservation criterion.
#[derive(Default)]
struct Norms(Vec<(String, f64)>);

impl Norms {
    fn push(&mut self, label: impl Into<String>, dev: f64) {
        self.0.push((label.into(), dev));
    }
}

fn config(text: &str) -> SimulationConfig {
    parse_config(text).unwrap_or_else(|e| panic!("recipe does not parse: {e}\n{text}"))
}

fn info(line: impl AsRef<str>) {
    println!("    {}", line.as_ref());
}

fn c1() -> Verdict {
    let p = PhysicalParams::default();
    let quad = group_velocity(&p, VelocityMode::Quadrature).unwrap();
    let limit = group_velocity(&p, VelocityMode::Limit).unwrap();
    // Oracle for the limit: 1/(1 - g·τ²/2) = -100/33 for these parameters.
    let exact_limit = 1.0 / (1.0 - 0.5 * p.g * p.tau * p.tau);
    Verdict {
        id: 1,
        name: "group velocity",
        pass: (quad + 3.27).abs() <= 0.02 && (limit - exact_limit).abs() <= 1e-6,
        detail: format!(
            "quadrature v_g/c = {quad:.5} (-3.27 +/- 0.02), limit v_g/c = {limit:.9} (-100/33 = {exact_limit:.9} +/- 1e-6)"
        ),
    }
}

fn c2() -> Verdict {
    let alpha = beers_alpha(&PhysicalParams::default());
    Verdict {
        id: 2,
        name: "Beer coefficient",
        pass: (alpha - 8.15).abs() <= 0.01,
        detail: format!("alpha = {alpha:.5} cm^-1 (target 8.15 +/- 0.01)"),
    }
}

/// Largest deviation from the exact sech solution over the whole record,
/// relative to the peak amplitude `2/τ`.
fn sech_error(cfg: &SimulationConfig, run: &PulseRun) -> f64 {
    let p = &cfg.params;
    let exact = AnalyticSolution::with_distribution(&cfg.medium(), p, run.grid.detuning());
    let record = &run.propagation.field;
    let mut worst: f64 = 0.0;
    for i in 0..record.nx() {
        let x = record.x(i);
        for k in 0..record.nt() {
            let e = (record.at(i, k) - C64::new(exact.field_retarded(x, record.t(k)), 0.0)).norm();
            worst = worst.max(e);
        }
    }
    worst * p.tau / 2.0
}

fn c3(pool: &ThreadPool, norms: &mut Norms) -> Verdict {
    let base_text = "mode = propagate\nlength = 6\n";
    let cfg = config(base_text);
    let t0 = Instant::now();
    let run = propagate_pulse(&cfg, pool).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    norms.push("analytic agreement, default grid", run.propagation.max_norm_deviation);
    let err = sech_error(&cfg, &run);
    let (dx, dt) = (run.grid.dx(), run.grid.dt());
    info(format!(
        "default grid: {} x {} x {} nodes, error {err:.3e}, {elapsed:.1} s",
        run.grid.nx(),
        run.grid.nt(),
        run.grid.detuning().len()
    ));

    let fine = config(&format!("{base_text}dx = {}\ndt = {}\n", dx / 2.0, dt / 2.0));
    let fine_run = propagate_pulse(&fine, pool).unwrap();
    norms.push("analytic agreement, dx/2 and dt/2", fine_run.propagation.max_norm_deviation);
    let err_fine = sech_error(&fine, &fine_run);
    let ratio = err / err_fine;

    let dx_only = config(&format!("{base_text}dx = {}\ndt = {}\n", dx / 2.0, dt));
    let dx_run = propagate_pulse(&dx_only, pool).unwrap();
    norms.push("analytic agreement, dx/2", dx_run.propagation.max_norm_deviation);
    let ratio_dx = err / sech_error(&dx_only, &dx_run);
    info(format!("halving dx and dt: error {err_fine:.3e}, ratio {ratio:.3}; halving dx alone: ratio {ratio_dx:.3}"));

    Verdict {
        id: 3,
        name: "analytic-numeric agreement",
        pass: err < 1e-3 && ratio >= 3.8,
        detail: format!("max relative error {err:.3e} (< 1e-3), refinement ratio {ratio:.3} (>= 3.8)"),
    }
}

/// Measured advance of a pulse run, in units of τ.
fn advance_of(run: &PulseRun, tau: f64) -> f64 {
    let record = &run.propagation.field;
    peak_advance(record.output_series(), &run.boundary, record.window().0, record.dt(), tau)
        .map(|a| a.advance_in_tau)
        .unwrap_or(f64::NAN)
}

fn c4(run: &PulseRun, tau: f64) -> (Verdict, f64) {
    let advance = advance_of(run, tau);
    let record = &run.propagation.field;
    let out = record.output_series();
    let (k_peak, peak) = out
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(kb, mb), (k, v)| if v.norm() > mb { (k, v.norm()) } else { (kb, mb) });
    // The ringing is the first lobe of opposite sign after the main peak.
    let sign = out[k_peak].re.signum();
    let ringing = out[k_peak..].iter().position(|v| v.re * sign < 0.0).map(|off| {
        let start = k_peak + off;
        let (k, m) = out[start..].iter().enumerate().fold((start, 0.0f64), |(kb, mb), (j, v)| {
            if v.norm() > mb {
                (start + j, v.norm())
            } else {
                (kb, mb)
            }
        });
        (record.t(k), m)
    });
    let t_peak = record.t(k_peak);
    let precedes = matches!(ringing, Some((t_ring, m)) if t_ring > t_peak && m < peak);
    let ring_text = match ringing {
        Some((t, m)) => format!("ringing lobe at {:.2} tau with {:.2} of the peak", t / tau, m / peak),
        None => "no ringing lobe".into(),
    };
    let verdict = Verdict {
        id: 4,
        name: "advance with cutoffs",
        pass: (advance - 2.5).abs() <= 0.2 && precedes,
        detail: format!("advance {advance:.4} tau (2.5 +/- 0.2); output peak at {:.2} tau, {ring_text}", t_peak / tau),
    };
    (verdict, advance)
}

fn c5(cfg: &SimulationConfig, run: &PulseRun) -> Verdict {
    let p = &cfg.params;
    let profile = area_profile(&run.propagation.field, p);
    let alpha = beers_alpha(p);
    let entry_target = 2.0 * PI - 3.6e-4;
    let entry = profile.theta[0];
    let entry_ok = (entry - entry_target).abs() <= 5e-6;
    let in_band = |theta: f64| (theta / PI - 1.0).abs() <= 0.5;
    let first = profile.theta.iter().position(|&t| in_band(t));
    let (band_gl, stays, lo, hi) = match first {
        Some(i) => {
            let after = &profile.theta[i..];
            let lo = after.iter().copied().fold(f64::INFINITY, f64::min) / PI;
            let hi = after.iter().copied().fold(f64::NEG_INFINITY, f64::max) / PI;
            (alpha * (profile.x[i] - cfg.x0), after.iter().all(|&t| in_band(t)), lo, hi)
        }
        None => (f64::INFINITY, false, f64::NAN, f64::NAN),
    };
    info(format!(
        "exit area {:.4} pi after {:.2} gain lengths; window clips tails: {}",
        profile.theta.last().unwrap() / PI,
        alpha * cfg.length,
        profile.clipped
    ));
    Verdict {
        id: 5,
        name: "area dynamics",
        pass: entry_ok && band_gl <= 15.0 && stays,
        detail: format!(
            "entry area 2pi - {:.3e} (2pi - 3.6e-4); band pi +/- 0.5pi entered after {band_gl:.2} gain lengths (<= 15); \
             afterwards in [{lo:.3}, {hi:.3}] pi, stays in band: {stays}",
            2.0 * PI - entry
        ),
    }
}

/// RK4 integration of `dθ/dx = (α/2)·sin θ`.
fn area_ode(theta0: f64, alpha: f64, xs: &[f64]) -> Vec<f64> {
    let f = |t: f64| 0.5 * alpha * t.sin();
    let mut out = vec![theta0];
    let mut theta = theta0;
    for w in xs.windows(2) {
        let n = 1000;
        let h = (w[1] - w[0]) / n as f64;
        for _ in 0..n {
            let k1 = f(theta);
            let k2 = f(theta + 0.5 * h * k1);
            let k3 = f(theta + 0.5 * h * k2);
            let k4 = f(theta + h * k3);
            theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(theta);
    }
    out
}

fn c6(pool: &ThreadPool, norms: &mut Norms) -> Verdict {
    let base = PhysicalParams::default();
    let t2 = base.tau / 20.0;
    let alpha = beers_alpha(&base.with_t2_star(t2));
    let cfg = config(&format!(
        "mode = propagate\nt2_star = {t2}\nlength = {}\namplitude = {}\nt_min = -1.5\nt_max = 1.5\n\
         quadrature = uniform\nspan_sigmas = 4\ndetuning_nodes = 1024\n",
        2.0 / alpha,
        0.01 / base.tau
    ));
    let t0 = Instant::now();
    let run = propagate_pulse(&cfg, pool).unwrap();
    norms.push("area theorem", run.propagation.max_norm_deviation);
    let profile = area_profile(&run.propagation.field, &cfg.params);
    let oracle = area_ode(profile.theta[0], alpha, &profile.x);
    let worst = profile.theta.iter().zip(&oracle).map(|(t, o)| (t / o - 1.0).abs()).fold(0.0, f64::max);
    info(format!(
        "input area {:.5} pi, exit area {:.5} pi, oracle {:.5} pi, {:.1} s",
        profile.theta[0] / PI,
        profile.theta.last().unwrap() / PI,
        oracle.last().unwrap() / PI,
        t0.elapsed().as_secs_f64()
    ));
    Verdict {
        id: 6,
        name: "area theorem oracle",
        pass: worst < 0.05,
        detail: format!("max relative deviation from the area ODE over 2 gain lengths {worst:.3e} (< 5e-2)"),
    }
}

fn c8(stats: &[DelayStatistics], p: &PhysicalParams) -> Verdict {
    let c_tau = p.c_tau();
    let cmp = compare_to_polder(stats, p);
    let mut within = 0;
    for s in stats {
        let ok = !s.delays.is_empty() && s.relative_error() <= 0.15;
        within += usize::from(ok);
        info(format!(
            "L = {:.3} c tau: {:2} of {} triggered, mean {:7.3} tau, std {:6.3} tau, predicted {:7.3} tau, error {:+.1}%",
            s.length / c_tau,
            s.delays.len(),
            s.delays.len() + s.failures.len(),
            s.mean / p.tau,
            s.std / p.tau,
            s.predicted_mean / p.tau,
            100.0 * (s.mean / s.predicted_mean - 1.0)
        ));
    }
    let means: Vec<f64> = stats.iter().filter(|s| !s.delays.is_empty()).map(|s| s.mean).collect();
    let monotone = means.windows(2).all(|w| w[1] < w[0]);
    let crossover = cmp.predicted_crossover.map_or(f64::NAN, |l| l / c_tau);
    let measured = cmp.measured_crossover.map_or(f64::NAN, |l| l / c_tau);
    Verdict {
        id: 8,
        name: "SF statistics",
        pass: within >= 5 && monotone && (crossover - 5.0).abs() <= 1.0,
        detail: format!(
            "{within} of {} lengths within 15% (need >= 5); mean decreasing with L: {monotone}; \
             reported crossover {crossover:.3} c tau (5 +/- 1), measured crossover {measured:.3} c tau",
            stats.len()
        ),
    }
}

fn c9(pool: &ThreadPool, norms: &mut Norms, reference: f64) -> Verdict {
    let cfg = config("mode = fig\nfigure = 7\n");
    let run = propagate_pulse(&cfg, pool).unwrap();
    norms.push("seeded cut-off pulse", run.propagation.max_norm_deviation);
    let advance = advance_of(&run, cfg.params.tau);
    Verdict {
        id: 9,
        name: "SF robustness of fast light",
        pass: (advance - reference).abs() <= 0.2,
        detail: format!("seeded advance {advance:.4} tau vs unseeded {reference:.4} tau (within 0.2)"),
    }
}

fn c10(pool: &ThreadPool, norms: &mut Norms) -> Verdict {
    let cfg = config("mode = fig\nfigure = 8\n");
    let p = cfg.params;
    let run = propagate_sf(&cfg, pool).unwrap();
    norms.push("pure SF, single run", run.propagation.max_norm_deviation);
    let predicted = sf_delay_mean(cfg.length, &p).unwrap();

    let sweep = config(&format!("mode = sweep\nlengths = {}\nruns = 20\n", cfg.length));
    let spec = ensemble_spec(&sweep);
    let outcomes = run_outcomes(&spec, pool);
    for o in &outcomes {
        norms.push(format!("SF ensemble at 2 c tau, run {}", o.job.run_index), o.max_norm_deviation);
    }
    let stats = aggregate(&spec, outcomes).unwrap().remove(0);
    match run.delay {
        Ok(d) => {
            let delay = d.mean_criterion;
            info(format!(
                "ensemble at 2 c tau: mean {:.3} tau, std {:.3} tau over {} triggered runs; \
                 single run matches ensemble run 0: {}",
                stats.mean / p.tau,
                stats.std / p.tau,
                stats.delays.len(),
                stats.delays.first() == Some(&delay)
            ));
            Verdict {
                id: 10,
                name: "pure-SF run",
                pass: (delay - predicted).abs() <= stats.std,
                detail: format!(
                    "delay {:.3} tau vs predicted {:.3} tau, difference {:.3} tau (<= ensemble std {:.3} tau)",
                    delay / p.tau,
                    predicted / p.tau,
                    (delay - predicted).abs() / p.tau,
                    stats.std / p.tau
                ),
            }
        }
        Err(e) => Verdict { id: 10, name: "pure-SF run", pass: false, detail: format!("no SF pulse: {e}") },
    }
}

fn csv_digests(dir: &Path) -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| o["path"].as_str().unwrap().ends_with(".csv"))
        .map(|o| (o["path"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
        .collect()
}

fn c11(norms: &mut Norms) -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let recipes = [
        ("fig4", "mode = fig\nfigure = 4\n"),
        ("fig8", "mode = fig\nfigure = 8\nseed = 11\n"),
        ("sweep", "mode = sweep\nlengths = 6, 9\nruns = 3\nseed = 5\n"),
    ];
    let mut failures = Vec::new();
    let mut compared = 0;
    for (label, text) in recipes {
        let mut digests = Vec::new();
        for jobs in [1, 3] {
            let mut cfg = config(text);
            cfg.out = root.path().join(format!("{label}-{jobs}"));
            let report = run_command(&cfg, jobs).unwrap();
            if let Some(dev) = report.manifest.summary["max_norm_deviation"].as_f64() {
                norms.push(format!("determinism {label}, {jobs} workers"), dev);
            }
            digests.push(csv_digests(&cfg.out));
        }
        compared += digests[0].len();
        if digests[0].is_empty() || digests[0] != digests[1] {
            failures.push(label);
        }
    }
    Verdict {
        id: 11,
        name: "determinism",
        pass: failures.is_empty(),
        detail: format!("{compared} CSV files byte-identical across 1 and 3 workers; mismatched recipes: {failures:?}"),
    }
}

fn c7(norms: &Norms) -> Verdict {
    let (label, worst) =
        norms.0.iter().fold(("none", 0.0f64), |(lb, mb), (l, d)| if !(*d <= mb) { (l.as_str(), *d) } else { (lb, mb) });
    Verdict {
        id: 7,
        name: "norm conservation",
        pass: worst < 1e-8,
        detail: format!("largest norm residual {worst:.3e} (< 1e-8) over {} runs, in {label}", norms.0.len()),
    }
}

/// Binary against uniform phases, same seeds so the tipping angles match run
/// by run. Reported after the criteria and not counted among them.
fn phase_neutrality(pool: &ThreadPool, norms: &mut Norms) -> Verdict {
    let delays = |phase: &str, norms: &mut Norms| {
        let spec = ensemble_spec(&config(&format!("mode = sweep\nlengths = 6\nruns = 20\nphase = {phase}\n")));
        let outcomes = run_outcomes(&spec, pool);
        for o in &outcomes {
            norms.push(format!("phase comparison ({phase}), run {}", o.job.run_index), o.max_norm_deviation);
        }
        aggregate(&spec, outcomes).unwrap().remove(0)
    };
    let binary = delays("binary", norms);
    let uniform = delays("uniform", norms);
    let se = binary.std / (binary.delays.len() as f64).sqrt();
    let shift = uniform.mean - binary.mean;
    let tau = PhysicalParams::default().tau;
    Verdict {
        id: 0,
        name: "phase neutrality",
        pass: shift.abs() < se && binary.failures.is_empty() && uniform.failures.is_empty(),
        detail: format!(
            "L = 6 cm, 20 runs: mean {:.3} tau (binary) vs {:.3} tau (uniform), shift {:+.3} tau (|shift| < standard error {:.3} tau)",
            binary.mean / tau,
            uniform.mean / tau,
            shift / tau,
            se / tau
        ),
    }
}

fn report(v: &Verdict) {
    let verdict = if v.pass { "PASS" } else { "FAIL" };
    if v.id == 0 {
        println!("{verdict} invariant {}: {}", v.name, v.detail);
    } else {
        println!("{verdict} criterion {:2} {}: {}", v.id, v.name, v.detail);
    }
}

fn main() {
    let started = Instant::now();
    let pool = thread_pool(0).unwrap();
    let mut norms = Norms::default();
    let mut verdicts = Vec::new();
    let mut record = |v: Verdict| {
        report(&v);
        verdicts.push(v);
    };

    record(c1());
    record(c2());
    record(c3(&pool, &mut norms));

    let fig4 = config("mode = fig\nfigure = 4\n");
    let run4 = propagate_pulse(&fig4, &pool).unwrap();
    norms.push("cut-off pulse", run4.propagation.max_norm_deviation);
    let (v4, advance4) = c4(&run4, fig4.params.tau);
    record(v4);
    record(c5(&fig4, &run4));
    record(c6(&pool, &mut norms));

    let fig6 = config("mode = fig\nfigure = 6\n");
    let spec = ensemble_spec(&fig6);
    let outcomes = run_outcomes(&spec, &pool);
    for o in &outcomes {
        norms.push(format!("SF sweep L = {:.3} cm, run {}", o.job.length, o.job.run_index), o.max_norm_deviation);
    }
    let stats = aggregate(&spec, outcomes).unwrap();
    record(c8(&stats, &fig6.params));
    record(c9(&pool, &mut norms, advance4));
    record(c10(&pool, &mut norms));
    record(c11(&mut norms));
    let phase = phase_neutrality(&pool, &mut norms);
    // Last, so that it covers every run above.
    record(c7(&norms));

    report(&phase);
    let failed: Vec<u8> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s; failed: {failed:?}",
        verdicts.len() - failed.len(),
        verdicts.len(),
        started.elapsed().as_secs_f64()
    );
    if !(failed.is_empty() && phase.pass) && std::env::var("FASTLIGHT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

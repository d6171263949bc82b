use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fastlight::config::{parse_raw, resolve, RawConfig};
use fastlight::error::CliError;
use fastlight::run::run_command;

/// Coherent pulse propagation and superfluorescence in an inverted gain medium.
#[derive(Debug, Parser)]
#[command(name = "fastlight", version)]
struct Args {
    /// Configuration file (key = value lines with optional [section] headers).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// analytic, propagate, sf, sweep, or a figure recipe such as fig4.
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads; 0 uses every available CPU.
    #[arg(long, value_name = "N", default_value_t = 0)]
    jobs: usize,

    /// Sets a configuration key, e.g. --override g=200 or --override pulse.cutoff_half_width=10.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Print the resolved configuration and exit without running.
    #[arg(long)]
    print_config: bool,
}

fn apply_mode(raw: &mut RawConfig, mode: &str) -> Result<(), CliError> {
    let m = mode.trim();
    if let Some(rest) = m.strip_prefix("fig") {
        let figure = rest.trim_start_matches([' ', '-', ':', '=']);
        if !figure.is_empty() {
            raw.set("figure", figure)?;
        }
        return raw.set("mode", "fig");
    }
    raw.set("mode", m)
}

fn load(args: &Args) -> Result<fastlight::config::SimulationConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    let mut raw = parse_raw(&text)?;
    for o in &args.overrides {
        raw.apply_override(o)?;
    }
    if let Some(mode) = &args.mode {
        apply_mode(&mut raw, mode)?;
    }
    if let Some(out) = &args.out {
        raw.set("out", &out.to_string_lossy())?;
    }
    if let Some(seed) = args.seed {
        raw.set("seed", &seed.to_string())?;
    }
    resolve(&raw)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| {
        if args.print_config {
            print!("{}", cfg.to_text());
            return Ok(());
        }
        let report = run_command(&cfg, args.jobs)?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        println!(
            "wrote {} files to {} in {:.2} s",
            report.manifest.outputs.len(),
            report.out_dir.display(),
            report.manifest.wall_clock_s
        );
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Thread-pool execution. Results never depend on the worker count: node
//! blocks are reduced in a fixed order by the solver, and ensemble outcomes
//! are sorted before aggregation.

use fastlight_core::ensemble::{aggregate, run_job, DelayStatistics, EnsembleSpec, RunOutcome};
use fastlight_core::solver::{NodeExecutor, Sequential};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::CliError;

/// Builds a pool with `jobs` workers; zero means one per available CPU.
pub fn thread_pool(jobs: usize) -> Result<ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {jobs} worker threads: {e}")))
}

/// Spreads detuning-node blocks over a pool.
pub struct PoolExecutor<'a> {
    pool: &'a ThreadPool,
}

impl<'a> PoolExecutor<'a> {
    pub fn new(pool: &'a ThreadPool) -> Self {
        PoolExecutor { pool }
    }
}

impl NodeExecutor for PoolExecutor<'_> {
    fn map<T: Send>(&self, n_tasks: usize, task: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        if self.pool.current_num_threads() <= 1 {
            return (0..n_tasks).map(task).collect();
        }
        self.pool.install(|| (0..n_tasks).into_par_iter().map(task).collect())
    }
}

/// Runs every ensemble job on the pool, one job per worker at a time.
pub fn run_outcomes(spec: &EnsembleSpec, pool: &ThreadPool) -> Vec<RunOutcome> {
    let jobs = spec.jobs();
    pool.install(|| jobs.par_iter().map(|job| run_job(spec, job, &Sequential)).collect())
}

pub fn run_ensemble_parallel(spec: &EnsembleSpec, pool: &ThreadPool) -> Result<Vec<DelayStatistics>, CliError> {
    spec.validate()?;
    Ok(aggregate(spec, run_outcomes(spec, pool))?)
}

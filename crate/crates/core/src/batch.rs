//! Independent simulation runs, executed in parallel when the `parallel`
//! feature is enabled and sequentially otherwise. Results always come back in
//! input order, so both paths produce identical output.

use crate::engine::{run, SimConfig};
use crate::metrics::summarize;
use crate::report::RunRow;
use crate::scenario::Scenario;
use crate::scheduler::SchedulerKind;
use crate::Result;

/// Maps `f` over `items`, in parallel if the `parallel` feature is on.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq_map(items, f)
    }
}

pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

fn run_one(cfg: &SimConfig) -> Result<RunRow> {
    let result = run(cfg)?;
    let metrics = summarize(&result);
    Ok(RunRow::new(&result, metrics))
}

/// Runs every configuration and summarises it. The first failure, in input
/// order, is returned.
pub fn run_batch(configs: &[SimConfig]) -> Result<Vec<RunRow>> {
    par_map(configs, run_one).into_iter().collect()
}

pub fn run_batch_sequential(configs: &[SimConfig]) -> Result<Vec<RunRow>> {
    seq_map(configs, run_one).into_iter().collect()
}

/// Configurations for a station-count sweep: both schedulers, each over
/// `sweep_min..=sweep_max` stations. Reference runs come first.
pub fn sweep_configs(scenario: &Scenario) -> Result<Vec<SimConfig>> {
    let mut configs = Vec::new();
    for kind in SchedulerKind::ALL {
        for n in scenario.sweep_min..=scenario.sweep_max {
            configs.push(scenario.config(n, kind)?);
        }
    }
    Ok(configs)
}

pub fn sweep(scenario: &Scenario) -> Result<Vec<RunRow>> {
    run_batch(&sweep_configs(scenario)?)
}

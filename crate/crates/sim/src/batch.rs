use hav_core::simulator::run_experiment;
use hav_core::{ExperimentRecord, ScenarioParams};
use rayon::prelude::*;

use crate::Error;

/// Runs experiments `0..count` on `workers` threads. Every experiment draws
/// from its own random streams, so the output is identical for any worker
/// count and always ordered by experiment index.
pub fn run_batch_parallel(
    params: &ScenarioParams,
    count: u64,
    hav_count: usize,
    workers: usize,
) -> Result<Vec<ExperimentRecord>, Error> {
    let params = ScenarioParams {
        hav_count,
        ..params.clone()
    };
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let records = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| run_experiment(&params, i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(records)
}

//! Cross-validation runs spread over a bounded thread pool.

use lkt_core::cv::{assemble, check_inputs, evaluate_run, CvConfig, CvReport};
use lkt_core::{Dataset, ModelSpec};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Same result as [`lkt_core::split_half_cv`] for any thread count.
pub fn split_half_cv(
    ds: &Dataset,
    specs: &[ModelSpec],
    labels: Option<&[String]>,
    cfg: &CvConfig,
    threads: Option<usize>,
) -> Result<CvReport> {
    check_inputs(ds, specs, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start thread pool: {e}")))?;
    let records = pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|run| evaluate_run(ds, specs, run, cfg))
            .collect::<lkt_core::Result<Vec<_>>>()
    })?;
    Ok(assemble(records, specs, labels, cfg))
}

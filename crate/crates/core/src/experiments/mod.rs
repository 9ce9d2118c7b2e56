//! Test functions and the parameter-study harness.

pub mod airy;
pub mod bench;
pub mod corpus;
pub mod examples;
pub mod sweep;
pub mod tables;

pub use bench::{bench_linear_scaling, bench_table, BenchRow};
pub use corpus::{corpus_eval, CorpusFunction};
pub use examples::{run_example, singular_pipeline, ExampleReport, SingularRun};
pub use sweep::{run_sweep, Axis, SweepResult, SweepRow, SweepSpec};
pub use tables::{find_n0, find_t1, table1, table2, N0Probe, N0Result, T1Probe};

use crate::approximant::{fit_with_cache, FunctionSource};
use crate::error::{Error, Result};
use crate::frame::{ExtensionParams, FrameCache};
use crate::geometry::{Interval, Partition};

/// Global max error below which an approximation counts as converged.
pub const PASS_THRESHOLD: f64 = 1e-10;

/// Error grid density relative to the construction grid.
pub const DEFAULT_REFINE: usize = 10;

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::ComputationFailure(format!("thread pool: {e}")))
}

/// Global max error of `f` on `[-1, 1]` split into `k` equal parts.
pub(crate) fn uniform_error(
    cache: &FrameCache,
    f: &FunctionSource,
    k: usize,
    params: &ExtensionParams,
    refine: usize,
) -> Result<f64> {
    let p = Partition::uniform(Interval::new(-1.0, 1.0)?, k)?;
    Ok(fit_with_cache(cache, f, &p, params)?.error_report(f, refine)?.global_max)
}

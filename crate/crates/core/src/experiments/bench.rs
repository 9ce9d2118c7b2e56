//! Timing of the fit stage against the number of subintervals.

use std::time::Instant;

use super::corpus::CorpusFunction;
use crate::approximant::fit_with_cache;
use crate::error::{Error, Result};
use crate::frame::{ExtensionParams, FrameCache};
use crate::geometry::Partition;
use crate::io::Table;

/// Repetitions per K; the median is reported.
pub const REPEATS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub k: usize,
    /// Distinct nodes `K(m-1)+1`.
    pub m_total: usize,
    /// Median fit time in seconds, the factorization already cached.
    pub fit_seconds: f64,
    /// Factorizations performed by the cache so far.
    pub factorizations: usize,
}

/// Times `fit` for each K, serially on the calling thread.
pub fn bench_linear_scaling(k_values: &[usize], function: &str, params: &ExtensionParams) -> Result<Vec<BenchRow>> {
    if k_values.len() < 2 {
        return Err(Error::invalid("bench needs at least two K values"));
    }
    if k_values[0] == 0 || k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("bench K values must be positive and strictly increasing"));
    }
    let f = CorpusFunction::parse(function)?;
    let src = f.source();
    let cache = FrameCache::new();
    cache.get(params)?;
    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let p = Partition::uniform(f.domain(), k)?;
        // warm-up
        fit_with_cache(&cache, &src, &p, params)?;
        let mut times = Vec::with_capacity(REPEATS);
        for _ in 0..REPEATS {
            let start = Instant::now();
            let apx = fit_with_cache(&cache, &src, &p, params)?;
            times.push(start.elapsed().as_secs_f64());
            std::hint::black_box(apx);
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            k,
            m_total: k * (params.m() - 1) + 1,
            fit_seconds: times[REPEATS / 2],
            factorizations: cache.factorization_count(),
        });
    }
    Ok(rows)
}

/// `K,M,fit_seconds,factorizations`.
pub fn bench_table(rows: &[BenchRow]) -> Table {
    let mut t = Table::new("bench", &["K", "M", "fit_seconds", "factorizations"]);
    for r in rows {
        t.push(vec![r.k.into(), r.m_total.into(), r.fit_seconds.into(), r.factorizations.into()]);
    }
    t
}

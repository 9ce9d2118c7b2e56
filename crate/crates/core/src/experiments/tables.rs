//! Searches for the smallest usable extension factor `T1(γ)` and the smallest
//! usable bandwidth `N0(T)`, and the tables built from them.

use std::f64::consts::{E, PI};

use rayon::prelude::*;

use super::{pool, uniform_error, DEFAULT_REFINE, PASS_THRESHOLD};
use crate::approximant::FunctionSource;
use crate::error::{Error, Result};
use crate::frame::{ExtensionParams, FrameCache, DEFAULT_EPSILON};
use crate::io::{Cell, Table};

/// Reference values `(γ, T1)` the search is compared against.
pub const TABLE1_REFERENCE: [(f64, f64); 6] = [(1.0, 5.6), (1.2, 4.5), (1.5, 3.9), (2.0, 2.3), (3.0, 1.6), (4.0, 1.2)];

/// Reference values `(T, N0)` the search is compared against.
pub const TABLE2_REFERENCE: [(f64, usize); 7] =
    [(1.1, 78), (1.5, 29), (2.0, 18), (4.0, 10), (6.0, 9), (10.0, 7), (15.0, 5)];

fn expiw(omega: f64) -> FunctionSource {
    FunctionSource::complex(move |x| num_complex::Complex64::from_polar(1.0, PI * omega * x))
}

/// Low-frequency probe for [`find_t1`].
#[derive(Debug, Clone, PartialEq)]
pub struct T1Probe {
    pub omega: f64,
    pub k: usize,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    /// Width of the final bracket.
    pub resolution: f64,
    /// Step of the initial scan that brackets the first passing `T`.
    pub coarse_step: f64,
    pub threshold: f64,
}

impl Default for T1Probe {
    fn default() -> Self {
        T1Probe {
            omega: 20.0,
            k: 20,
            n: 20,
            lo: 1.05,
            hi: 30.0,
            resolution: 0.1,
            coarse_step: 0.5,
            threshold: PASS_THRESHOLD,
        }
    }
}

/// Smallest `T` (to within `probe.resolution`) at which the probe's global
/// max error drops below `probe.threshold`.
///
/// The error is not monotone in `T` over the whole range (it rises again past
/// the upper edge of the usable window), so a coarse scan from `lo` first
/// brackets the first passing point and bisection then narrows that bracket.
/// The passing end of the final bracket is returned.
pub fn find_t1(gamma: f64, probe: &T1Probe) -> Result<f64> {
    if gamma < 1.0 {
        return Err(Error::invalid(format!("oversampling must be at least 1, got {gamma}")));
    }
    if !(probe.lo > 1.0 && probe.hi > probe.lo && probe.resolution > 0.0 && probe.coarse_step > 0.0) {
        return Err(Error::invalid("T1 probe needs 1 < lo < hi and positive steps"));
    }
    let f = expiw(probe.omega);
    let cache = FrameCache::new();
    let passes = |t: f64| -> Result<bool> {
        let params = ExtensionParams::new(t, gamma, probe.n, DEFAULT_EPSILON)?;
        Ok(uniform_error(&cache, &f, probe.k, &params, DEFAULT_REFINE)? < probe.threshold)
    };
    if passes(probe.lo)? {
        return Ok(probe.lo);
    }
    let mut fail = probe.lo;
    let mut pass = None;
    let mut t = probe.lo;
    while t < probe.hi {
        t = (t + probe.coarse_step).min(probe.hi);
        if passes(t)? {
            pass = Some(t);
            break;
        }
        fail = t;
    }
    let mut pass = pass.ok_or_else(|| {
        Error::NotFound(format!("no T in [{}, {}] passes for gamma = {gamma}", probe.lo, probe.hi))
    })?;
    while pass - fail > probe.resolution {
        let mid = 0.5 * (fail + pass);
        if passes(mid)? {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    Ok(pass)
}

/// Probe set for [`find_n0`].
#[derive(Debug, Clone, PartialEq)]
pub struct N0Probe {
    pub omegas: Vec<f64>,
    pub k: usize,
    pub max_n: usize,
    /// Oversampling; `None` picks 2 for `T ≥ 2` and 4 below.
    pub gamma: Option<f64>,
    pub threshold: f64,
}

impl Default for N0Probe {
    fn default() -> Self {
        N0Probe {
            omegas: vec![2f64.sqrt(), E, PI, E * E, (2.0 * PI).sqrt()],
            k: 20,
            max_n: 100,
            gamma: None,
            threshold: PASS_THRESHOLD,
        }
    }
}

impl N0Probe {
    pub fn gamma_for(&self, t: f64) -> f64 {
        self.gamma.unwrap_or(if t >= 2.0 { 2.0 } else { 4.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct N0Result {
    pub t: f64,
    pub gamma: f64,
    /// Smallest `N` at which every probe passes.
    pub n0: usize,
    /// Smallest passing `N` of each probe frequency on its own, up to `n0`.
    pub per_omega: Vec<(f64, usize)>,
}

/// Linear scan `N = 1..=max_n` for the smallest `N` at which every probe
/// frequency passes at extension factor `t`.
pub fn find_n0(t: f64, probe: &N0Probe) -> Result<N0Result> {
    if probe.omegas.is_empty() {
        return Err(Error::invalid("N0 probe needs at least one frequency"));
    }
    let gamma = probe.gamma_for(t);
    let sources: Vec<_> = probe.omegas.iter().map(|&w| expiw(w)).collect();
    let mut first: Vec<Option<usize>> = vec![None; sources.len()];
    let cache = FrameCache::new();
    for n in 1..=probe.max_n {
        let params = ExtensionParams::new(t, gamma, n, DEFAULT_EPSILON)?;
        let mut all = true;
        for (f, first) in sources.iter().zip(first.iter_mut()) {
            let ok = uniform_error(&cache, f, probe.k, &params, DEFAULT_REFINE)? < probe.threshold;
            if ok && first.is_none() {
                *first = Some(n);
            }
            all &= ok;
        }
        if all {
            let per_omega = probe.omegas.iter().zip(&first).map(|(w, n)| (*w, n.expect("all passed"))).collect();
            return Ok(N0Result { t, gamma, n0: n, per_omega });
        }
        // keep memory flat across the scan
        cache.clear();
    }
    Err(Error::NotFound(format!("no N <= {} passes for T = {t}", probe.max_n)))
}

/// `gamma,T1,reference,deviation` for every reference row; rows whose search
/// fails leave `T1` empty and read `not-found` in the deviation column.
pub fn table1(probe: &T1Probe, workers: usize) -> Result<Table> {
    let found: Vec<Result<f64>> =
        pool(workers)?.install(|| TABLE1_REFERENCE.par_iter().map(|(g, _)| find_t1(*g, probe)).collect());
    let mut t = Table::new("table1", &["gamma", "T1", "reference", "deviation"]);
    for ((gamma, reference), r) in TABLE1_REFERENCE.iter().zip(found) {
        let v = not_found_as_none(r)?;
        let dev = v.map_or_else(not_found, |v| Cell::Float(v - reference));
        t.push(vec![Cell::Exact(*gamma), v.into(), Cell::Exact(*reference), dev]);
    }
    Ok(t)
}

/// `T,N0,reference,deviation` for every reference row.
pub fn table2(probe: &N0Probe, workers: usize) -> Result<Table> {
    let found: Vec<Result<N0Result>> =
        pool(workers)?.install(|| TABLE2_REFERENCE.par_iter().map(|(t, _)| find_n0(*t, probe)).collect());
    let mut t = Table::new("table2", &["T", "N0", "reference", "deviation"]);
    for ((tv, reference), r) in TABLE2_REFERENCE.iter().zip(found) {
        let v = not_found_as_none(r)?.map(|r| r.n0);
        t.push(vec![
            Cell::Exact(*tv),
            v.into(),
            (*reference).into(),
            v.map_or_else(not_found, |v| Cell::Int(v as i64 - *reference as i64)),
        ]);
    }
    Ok(t)
}

fn not_found() -> Cell {
    Cell::Text("not-found".into())
}

fn not_found_as_none<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotFound(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t1_rejects_bad_input_and_reports_not_found() {
        assert!(find_t1(0.5, &T1Probe::default()).is_err());
        // a frequency far beyond K·N/T cannot be resolved anywhere in range
        let probe = T1Probe { omega: 2000.0, n: 2, k: 1, hi: 3.0, ..T1Probe::default() };
        assert!(matches!(find_t1(2.0, &probe), Err(Error::NotFound(_))));
    }

    #[test]
    fn t1_bracket_is_tight() {
        let probe = T1Probe::default();
        let t1 = find_t1(2.0, &probe).unwrap();
        let f = expiw(probe.omega);
        let cache = FrameCache::new();
        let err = |t: f64| {
            let params = ExtensionParams::new(t, 2.0, probe.n, DEFAULT_EPSILON).unwrap();
            uniform_error(&cache, &f, probe.k, &params, DEFAULT_REFINE).unwrap()
        };
        assert!(err(t1) < PASS_THRESHOLD);
        assert!(err(t1 - probe.resolution) >= PASS_THRESHOLD);
    }

    #[test]
    fn n0_scan_is_minimal() {
        let probe = N0Probe { omegas: vec![2f64.sqrt()], ..N0Probe::default() };
        let r = find_n0(6.0, &probe).unwrap();
        assert_eq!(r.gamma, 2.0);
        assert_eq!(r.per_omega, vec![(2f64.sqrt(), r.n0)]);
        let cache = FrameCache::new();
        let params = ExtensionParams::new(6.0, 2.0, r.n0 - 1, DEFAULT_EPSILON).unwrap();
        assert!(uniform_error(&cache, &expiw(2f64.sqrt()), 20, &params, DEFAULT_REFINE).unwrap() >= PASS_THRESHOLD);
        let none = N0Probe { max_n: 1, ..probe };
        assert!(matches!(find_n0(1.5, &none), Err(Error::NotFound(_))));
    }
}

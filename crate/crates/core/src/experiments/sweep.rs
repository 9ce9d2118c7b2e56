//! One-parameter sweeps of the global error.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::CorpusFunction;
use super::{pool, DEFAULT_REFINE};
use crate::approximant::fit_with_cache;
use crate::error::{Error, Result};
use crate::frame::{ExtensionParams, FrameCache, DEFAULT_EPSILON, DEFAULT_GAMMA, DEFAULT_N, DEFAULT_T};
use crate::geometry::Partition;
use crate::io::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    T,
    N,
    K,
    /// Total number of distinct nodes `K(m-1)+1`.
    M,
}

/// Parameters held constant during a sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixed {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default)]
    pub per_subinterval: bool,
}

fn default_refine() -> usize {
    DEFAULT_REFINE
}

impl Default for Metric {
    fn default() -> Self {
        Metric { refine: DEFAULT_REFINE, per_subinterval: false }
    }
}

/// Sweep description, loadable from JSON or TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub function: String,
    #[serde(default)]
    pub fixed: Fixed,
    #[serde(default)]
    pub metric: Metric,
}

impl SweepSpec {
    /// Reads a spec; `.toml` files are parsed as TOML, anything else as JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let spec: SweepSpec = if is_toml {
            toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep needs at least one value"));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) || self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep values must be finite and strictly increasing"));
        }
        let clash = match self.axis {
            Axis::T => self.fixed.t.is_some(),
            Axis::N => self.fixed.n.is_some(),
            Axis::K | Axis::M => self.fixed.k.is_some(),
        };
        if clash {
            return Err(Error::invalid(format!("fixed parameters must not include the sweep axis {:?}", self.axis)));
        }
        if matches!(self.axis, Axis::N | Axis::K | Axis::M)
            && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0)
        {
            return Err(Error::invalid(format!("{:?} values must be positive integers", self.axis)));
        }
        if self.metric.refine == 0 {
            return Err(Error::invalid("refine must be at least 1"));
        }
        self.corpus_function()?;
        Ok(())
    }

    fn corpus_function(&self) -> Result<CorpusFunction> {
        match self.fixed.omega {
            None => CorpusFunction::parse(&self.function),
            Some(omega) if self.function.trim() == "expiw" => {
                CorpusFunction::parse(&format!("expiw:omega={omega}"))
            }
            Some(_) => Err(Error::invalid("fixed omega only applies to a bare `expiw` function")),
        }
    }

    fn point(&self, value: f64) -> Result<(ExtensionParams, usize)> {
        let f = &self.fixed;
        let t = if self.axis == Axis::T { value } else { f.t.unwrap_or(DEFAULT_T) };
        let n = if self.axis == Axis::N { value as usize } else { f.n.unwrap_or(DEFAULT_N) };
        let params = ExtensionParams::new(
            t,
            f.gamma.unwrap_or(DEFAULT_GAMMA),
            n,
            f.epsilon.unwrap_or(DEFAULT_EPSILON),
        )?;
        let k = match self.axis {
            Axis::K => value as usize,
            Axis::M => {
                let total = value as usize - 1;
                if total == 0 || !total.is_multiple_of(params.m() - 1) {
                    return Err(Error::invalid(format!(
                        "M = {value} is not of the form K(m-1)+1 with m = {}",
                        params.m()
                    )));
                }
                total / (params.m() - 1)
            }
            _ => f.k.unwrap_or(20),
        };
        Ok((params, k))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub max_err: f64,
    pub per_subinterval: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// `axis_value,max_err[,k1_err..]`, padded with empty fields when K varies.
    pub fn to_table(&self, name: &str) -> Table {
        let width = self.rows.iter().filter_map(|r| r.per_subinterval.as_ref().map(Vec::len)).max().unwrap_or(0);
        let mut header = vec!["axis_value".to_string(), "max_err".to_string()];
        header.extend((1..=width).map(|k| format!("k{k}_err")));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![Cell::Exact(r.axis_value), Cell::Float(r.max_err)];
                let per = r.per_subinterval.as_deref().unwrap_or(&[]);
                row.extend((0..width).map(|i| per.get(i).map_or(Cell::Empty, |e| Cell::Float(*e))));
                row
            })
            .collect();
        Table { name: name.to_string(), header, rows }
    }
}

/// Runs every point of `spec` with up to `workers` threads.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let f = spec.corpus_function()?;
    let source = f.source();
    let cache = FrameCache::new();
    let rows = pool(workers)?.install(|| {
        spec.values
            .par_iter()
            .map(|&v| {
                let (params, k) = spec.point(v)?;
                let p = Partition::uniform(f.domain(), k)?;
                let report = fit_with_cache(&cache, &source, &p, &params)?.error_report(&source, spec.metric.refine)?;
                Ok(SweepRow {
                    axis_value: v,
                    max_err: report.global_max,
                    per_subinterval: spec.metric.per_subinterval.then_some(report.per_subinterval),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult { spec: spec.clone(), rows })
}

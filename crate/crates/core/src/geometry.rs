//! Domain partitions, per-subinterval equispaced grids and the affine maps
//! between a subinterval `I_k = [a_{k-1}, a_k]` and the frame interval
//! `Λ = [0, 2π/T]`.
//!
//! Every subinterval carries the same number of equispaced nodes `m`, so one
//! collocation matrix serves all of them. Adjacent grids share their common
//! breakpoint, giving `K(m-1)+1` distinct physical nodes in total.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!("interval endpoints must be finite, got [{a}, {b}]")));
        }
        if a >= b {
            return Err(Error::invalid(format!("interval requires a < b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

/// Breakpoints `a = a_0 < a_1 < ... < a_K = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    interval: Interval,
    breakpoints: Vec<f64>,
}

impl Partition {
    /// Splits `interval` into `k` subintervals of equal length.
    pub fn uniform(interval: Interval, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("number of subintervals K must be at least 1"));
        }
        let (a, b) = (interval.a, interval.b);
        let step = (b - a) / k as f64;
        let mut breakpoints: Vec<f64> = (0..=k).map(|j| a + j as f64 * step).collect();
        breakpoints[k] = b;
        Ok(Partition { interval, breakpoints })
    }

    /// Builds a partition from interior points, which may be given in any order.
    pub fn with_interior_points(interval: Interval, interior: &[f64]) -> Result<Self> {
        let mut pts = interior.to_vec();
        for &p in &pts {
            if !p.is_finite() || p <= interval.a || p >= interval.b {
                return Err(Error::invalid(format!(
                    "interior point {p} is not strictly inside [{}, {}]",
                    interval.a, interval.b
                )));
            }
        }
        pts.sort_by(f64::total_cmp);
        if let Some(w) = pts.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate interior point {}", w[0])));
        }
        let mut breakpoints = Vec::with_capacity(pts.len() + 2);
        breakpoints.push(interval.a);
        breakpoints.extend(pts);
        breakpoints.push(interval.b);
        Ok(Partition { interval, breakpoints })
    }

    /// Builds a partition from a full, strictly increasing breakpoint list.
    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid("a partition needs at least two breakpoints"));
        }
        let interval = Interval::new(breakpoints[0], breakpoints[breakpoints.len() - 1])?;
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        Ok(Partition { interval, breakpoints })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Number of subintervals `K`.
    pub fn num_subintervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Endpoints of subinterval `k` (1-based).
    pub fn subinterval(&self, k: usize) -> Result<(f64, f64)> {
        self.check_index(k)?;
        Ok((self.breakpoints[k - 1], self.breakpoints[k]))
    }

    /// Subinterval containing `x`. A shared breakpoint belongs to the subinterval on its left.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !self.interval.contains(x) {
            return Err(Error::OutOfDomain { x, a: self.interval.a, b: self.interval.b });
        }
        let j = self.breakpoints.partition_point(|&bp| bp < x);
        Ok(j.max(1))
    }

    /// True when all subintervals have the same length to within `rel_tol`.
    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        let expected = self.interval.len() / self.num_subintervals() as f64;
        self.breakpoints
            .windows(2)
            .all(|w| ((w[1] - w[0]) - expected).abs() <= rel_tol * expected)
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        let kk = self.num_subintervals();
        if k == 0 || k > kk {
            return Err(Error::invalid(format!("subinterval index {k} outside 1..={kk}")));
        }
        Ok(())
    }

    /// Equispaced grid with `m` nodes on subinterval `k`.
    pub fn grid(&self, k: usize, m: usize) -> Result<SubintervalGrid> {
        SubintervalGrid::new(self, k, m)
    }

    /// All `K(m-1)+1` distinct construction nodes in increasing order.
    pub fn distinct_nodes(&self, m: usize) -> Result<Vec<f64>> {
        let kk = self.num_subintervals();
        let mut out = Vec::with_capacity(kk * (m.max(2) - 1) + 1);
        for k in 1..=kk {
            let g = self.grid(k, m)?;
            let skip = usize::from(k > 1);
            out.extend_from_slice(&g.nodes[skip..]);
        }
        Ok(out)
    }

    /// Scale map of subinterval `k` for extension factor `t`.
    pub fn scale_map(&self, k: usize, t: f64) -> Result<ScaleMap> {
        let (lo, hi) = self.subinterval(k)?;
        ScaleMap::for_window(lo, hi, t)
    }

    /// Frequency `s_k·ω·π` that `e^{iπωx}` takes on in frame coordinates of subinterval `k`.
    pub fn scaled_frequency(&self, k: usize, t: f64, omega: f64) -> Result<f64> {
        Ok(self.scale_map(k, t)?.scale() * omega * PI)
    }
}

/// `m` equispaced nodes on one subinterval, both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct SubintervalGrid {
    k: usize,
    spacing: f64,
    nodes: Vec<f64>,
}

impl SubintervalGrid {
    fn new(p: &Partition, k: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("a grid needs at least 2 nodes, got m = {m}")));
        }
        let (lo, hi) = p.subinterval(k)?;
        let spacing = (hi - lo) / (m - 1) as f64;
        let mut nodes: Vec<f64> = (0..m).map(|i| lo + i as f64 * spacing).collect();
        // pin the right end so neighbouring grids share the breakpoint bit for bit
        nodes[m - 1] = hi;
        Ok(SubintervalGrid { k, spacing, nodes })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Affine map `t = (x - origin) / s` from a physical window onto `Λ = [0, 2π/T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleMap {
    origin: f64,
    scale: f64,
}

impl ScaleMap {
    /// Map for the window `[lo, hi]` and extension factor `t > 1`.
    pub fn for_window(lo: f64, hi: f64, t: f64) -> Result<Self> {
        if !t.is_finite() || t <= 1.0 {
            return Err(Error::invalid(format!("extension factor T must exceed 1, got {t}")));
        }
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(Error::invalid(format!("window [{lo}, {hi}] is empty")));
        }
        Ok(ScaleMap { origin: lo, scale: t * (hi - lo) / (2.0 * PI) })
    }

    /// Map sending the `m` equispaced nodes of `[lo, hi]` onto `t_i = i·step`.
    ///
    /// This is the map the collocation system actually samples through: node
    /// `i` of the window is paired with row `i` of the matrix. Its image is
    /// `[0, (m-1)·step]`.
    pub fn for_nodes(lo: f64, hi: f64, m: usize, step: f64) -> Result<Self> {
        if m < 2 || step.is_nan() || step <= 0.0 {
            return Err(Error::invalid(format!("need m >= 2 and a positive step, got m = {m}, step = {step}")));
        }
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(Error::invalid(format!("window [{lo}, {hi}] is empty")));
        }
        Ok(ScaleMap { origin: lo, scale: (hi - lo) / ((m - 1) as f64 * step) })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn forward(&self, x: f64) -> f64 {
        (x - self.origin) / self.scale
    }

    pub fn inverse(&self, t: f64) -> f64 {
        self.origin + self.scale * t
    }
}

/// Serialized form of a partition in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Explicit { a: f64, b: f64, breakpoints: Vec<f64> },
    Uniform { a: f64, b: f64, #[serde(rename = "K")] k: usize },
}

impl PartitionSpec {
    pub fn build(&self) -> Result<Partition> {
        match self {
            PartitionSpec::Uniform { a, b, k } => Partition::uniform(Interval::new(*a, *b)?, *k),
            PartitionSpec::Explicit { a, b, breakpoints } => {
                let p = Partition::from_breakpoints(breakpoints.clone())?;
                if p.interval.a != *a || p.interval.b != *b {
                    return Err(Error::invalid(format!(
                        "breakpoints must start at a = {a} and end at b = {b}"
                    )));
                }
                Ok(p)
            }
        }
    }
}

impl From<&Partition> for PartitionSpec {
    fn from(p: &Partition) -> Self {
        PartitionSpec::Explicit { a: p.interval.a, b: p.interval.b, breakpoints: p.breakpoints.clone() }
    }
}

//! Assembly of the per-subinterval truncated-SVD solves into one approximant
//! on `[a, b]`, its evaluation, FFT-based extension samples, and error
//! measurement on refined grids.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::frame::{ExtensionParams, Frame, FrameCache, SampleVector};
use crate::geometry::{Partition, ScaleMap};

/// Relative tolerance for matching tabulated abscissae to construction nodes.
pub const NODE_MATCH_TOL: f64 = 1e-12;

type Callable = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Function to approximate: a closure or values tabulated at the construction nodes.
#[derive(Clone)]
pub enum FunctionSource {
    Callable(Callable),
    Tabulated(Tabulated),
}

/// Samples sorted by abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    values: Vec<Complex64>,
}

impl Tabulated {
    pub fn new(mut points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.iter().any(|(x, v)| !x.is_finite() || !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("tabulated data contains non-finite values"));
        }
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid(format!("tabulated data repeats abscissa {}", w[0].0)));
        }
        let (xs, values) = points.into_iter().unzip();
        Ok(Tabulated { xs, values })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.xs.iter().copied().zip(self.values.iter().copied())
    }

    fn lookup(&self, x: f64) -> Option<Complex64> {
        let tol = NODE_MATCH_TOL * x.abs().max(1.0);
        let j = self.xs.partition_point(|&v| v < x - tol);
        match self.xs.get(j) {
            Some(&v) if (v - x).abs() <= tol => Some(self.values[j]),
            _ => None,
        }
    }
}

impl FunctionSource {
    pub fn complex<F>(f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        FunctionSource::Callable(Arc::new(f))
    }

    pub fn real<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        FunctionSource::Callable(Arc::new(move |x| Complex64::new(f(x), 0.0)))
    }

    pub fn tabulated(points: Vec<(f64, Complex64)>) -> Result<Self> {
        Ok(FunctionSource::Tabulated(Tabulated::new(points)?))
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, FunctionSource::Callable(_))
    }

    pub fn value_at(&self, x: f64) -> Result<Complex64> {
        match self {
            FunctionSource::Callable(f) => Ok(f(x)),
            FunctionSource::Tabulated(t) => t
                .lookup(x)
                .ok_or_else(|| Error::invalid(format!("tabulated data has no value at node x = {x:.17e}"))),
        }
    }
}

impl fmt::Debug for FunctionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSource::Callable(_) => f.write_str("FunctionSource::Callable(..)"),
            FunctionSource::Tabulated(t) => write!(f, "FunctionSource::Tabulated({} points)", t.len()),
        }
    }
}

/// Samples `f` on every subinterval grid, scaled by `1/√m`.
///
/// Shared breakpoints are evaluated once and copied into both neighbouring vectors.
pub fn sample(f: &FunctionSource, p: &Partition, params: &ExtensionParams) -> Result<Vec<SampleVector>> {
    let m = params.m();
    let nodes = p.distinct_nodes(m)?;
    let values = nodes.iter().map(|&x| f.value_at(x)).collect::<Result<Vec<_>>>()?;
    Ok((1..=p.num_subintervals())
        .map(|k| {
            let start = (k - 1) * (m - 1);
            SampleVector::from_function_values(k, &values[start..start + m])
        })
        .collect())
}

/// Coefficient vectors `c_{N,k}` for every subinterval, with their 2-norms.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCoefficients {
    vectors: Vec<DVector<Complex64>>,
    norms: Vec<f64>,
}

impl LocalCoefficients {
    pub fn new(vectors: Vec<DVector<Complex64>>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.len() != first.len()) {
                return Err(Error::invalid("coefficient vectors differ in length"));
            }
        }
        let norms = vectors.iter().map(|v| v.norm()).collect();
        Ok(LocalCoefficients { vectors, norms })
    }

    /// Coefficients of subinterval `k` (1-based), ordered `ℓ = -N..=N`.
    pub fn vector(&self, k: usize) -> &DVector<Complex64> {
        &self.vectors[k - 1]
    }

    pub fn vectors(&self) -> &[DVector<Complex64>] {
        &self.vectors
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Map from a window `[lo, hi]` to frame coordinates under which node `i` of
/// the window lands on collocation row `t_i = 2πi/L`.
///
/// The window therefore covers `[0, 2π(m-1)/L]`, slightly less than
/// `[0, 2π/T]`. Evaluating through the nominal map `t = (x - lo)·2π/(T(hi-lo))`
/// instead would place the right end of every window past the last sampled
/// row, where modes discarded by the truncation are no longer small.
pub fn sampling_map(lo: f64, hi: f64, params: &ExtensionParams) -> Result<ScaleMap> {
    ScaleMap::for_nodes(lo, hi, params.m(), params.step())
}

/// Evaluates `scale · Σ_{ℓ=-N}^{N} c_ℓ e^{iℓt}`.
pub fn eval_series(c: &DVector<Complex64>, t: f64, scale: f64) -> Complex64 {
    let n = (c.len() / 2) as f64;
    let step = Complex64::from_polar(1.0, t);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut z = Complex64::from_polar(1.0, -n * t);
    for (j, cj) in c.iter().enumerate() {
        // resynchronize the running power now and then to bound drift
        if j % 16 == 0 && j > 0 {
            z = Complex64::from_polar(1.0, (j as f64 - n) * t);
        }
        acc += cj * z;
        z *= step;
    }
    acc * scale
}

/// Piecewise approximant `P_{N,K}^ε f` on `[a, b]`.
#[derive(Debug, Clone)]
pub struct LocalApproximant {
    partition: Partition,
    params: ExtensionParams,
    coeffs: LocalCoefficients,
    maps: Vec<ScaleMap>,
}

impl LocalApproximant {
    /// Assembles an approximant from precomputed coefficients.
    pub fn from_parts(partition: Partition, params: ExtensionParams, coeffs: LocalCoefficients) -> Result<Self> {
        if coeffs.len() != partition.num_subintervals() {
            return Err(Error::invalid(format!(
                "{} coefficient vectors for {} subintervals",
                coeffs.len(),
                partition.num_subintervals()
            )));
        }
        if coeffs.vectors.iter().any(|v| v.len() != params.num_modes()) {
            return Err(Error::invalid(format!("coefficient vectors must have length 2N+1 = {}", params.num_modes())));
        }
        let maps = (1..=partition.num_subintervals())
            .map(|k| {
                let (lo, hi) = partition.subinterval(k)?;
                sampling_map(lo, hi, &params)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalApproximant { partition, params, coeffs, maps })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn params(&self) -> &ExtensionParams {
        &self.params
    }

    pub fn coefficients(&self) -> &LocalCoefficients {
        &self.coeffs
    }

    pub fn scale_map(&self, k: usize) -> ScaleMap {
        self.maps[k - 1]
    }

    /// Value at `x ∈ [a, b]`; a shared breakpoint is evaluated with the piece on its left.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        let k = self.partition.locate(x)?;
        Ok(self.evaluate_piece(k, x))
    }

    /// Value of piece `k` at `x`, without checking that `x` lies in `I_k`.
    pub fn evaluate_piece(&self, k: usize, x: f64) -> Complex64 {
        let t = self.maps[k - 1].forward(x);
        eval_series(&self.coeffs.vectors[k - 1], t, self.params.reconstruction_scale())
    }

    /// Periodic extension of piece `k` sampled at `t_j = 2πj/L`, `j = 0..L-1`, by one inverse FFT.
    pub fn extension_samples(&self, k: usize) -> Result<Vec<Complex64>> {
        self.partition.check_index(k)?;
        Ok(extension_samples_for(self.coeffs.vector(k), &self.params))
    }

    /// Maximum and L² errors against `f_ref` on a grid `refine` times denser than the construction grid.
    pub fn error_report(&self, f_ref: &FunctionSource, refine: usize) -> Result<ErrorReport> {
        let pieces = self.piece_errors(f_ref, refine)?;
        let per_subinterval: Vec<f64> = pieces.iter().map(|p| p.max_abs).collect();
        let global_max = per_subinterval.iter().copied().fold(0.0, f64::max);
        let l2 = pieces.iter().map(|p| p.sq_integral).sum::<f64>().sqrt();
        Ok(ErrorReport { per_subinterval, global_max, l2, refine })
    }

    /// Checks the global L² error against the bound `√(Σ_k s_k) · max_k ‖g_k - Q g_k‖_{L²(Λ)}`.
    ///
    /// `Σ_k s_k = T'(b-a)/2π` where `T' = L/(m-1)` is the extension factor the
    /// sampling map realizes, see [`sampling_map`].
    pub fn l2_bound_check(&self, f_ref: &FunctionSource) -> Result<BoundCheck> {
        let pieces = self.piece_errors(f_ref, 10)?;
        let lhs = pieces.iter().map(|p| p.sq_integral).sum::<f64>().sqrt();
        // ∫_Λ |g_k - Q g_k|² dt = s_k⁻¹ ∫_{I_k} |f - P f|² dx
        let worst = pieces
            .iter()
            .zip(&self.maps)
            .map(|(p, map)| (p.sq_integral / map.scale()).sqrt())
            .fold(0.0, f64::max);
        let total_scale: f64 = self.maps.iter().map(|m| m.scale()).sum();
        let rhs = total_scale.sqrt() * worst;
        let holds = lhs <= rhs * (1.0 + BOUND_QUADRATURE_SLACK) + 1e-12;
        Ok(BoundCheck { lhs, rhs, holds })
    }

    /// Max absolute error at the given sample points, grouped by subinterval.
    ///
    /// Used for tabulated data, where no refined grid is available; `refine`
    /// is reported as 0 and `l2` is the root-sum-square of the point errors.
    pub fn error_report_at(&self, points: impl IntoIterator<Item = (f64, Complex64)>) -> Result<ErrorReport> {
        let mut per_subinterval = vec![0.0f64; self.partition.num_subintervals()];
        let mut sq = 0.0;
        for (x, v) in points {
            let e = (self.evaluate(x)? - v).norm();
            let k = self.partition.locate(x)?;
            per_subinterval[k - 1] = per_subinterval[k - 1].max(e);
            sq += e * e;
        }
        let global_max = per_subinterval.iter().copied().fold(0.0, f64::max);
        Ok(ErrorReport { per_subinterval, global_max, l2: sq.sqrt(), refine: 0 })
    }

    fn piece_errors(&self, f_ref: &FunctionSource, refine: usize) -> Result<Vec<PieceError>> {
        if !f_ref.is_callable() {
            return Err(Error::invalid("error measurement needs a callable reference function"));
        }
        if refine == 0 {
            return Err(Error::invalid("refinement factor must be at least 1"));
        }
        let steps = refine * (self.params.m() - 1);
        (1..=self.partition.num_subintervals())
            .map(|k| {
                let (lo, hi) = self.partition.subinterval(k)?;
                let dx = (hi - lo) / steps as f64;
                let mut max_abs: f64 = 0.0;
                let mut sq = Vec::with_capacity(steps + 1);
                for j in 0..=steps {
                    let x = if j == steps { hi } else { lo + j as f64 * dx };
                    let e = (f_ref.value_at(x)? - self.evaluate_piece(k, x)).norm();
                    max_abs = max_abs.max(e);
                    sq.push(e * e);
                }
                Ok(PieceError { max_abs, sq_integral: trapezoid(&sq, dx) })
            })
            .collect()
    }
}

/// Relative quadrature slack allowed in [`LocalApproximant::l2_bound_check`].
pub const BOUND_QUADRATURE_SLACK: f64 = 1e-6;

struct PieceError {
    max_abs: f64,
    sq_integral: f64,
}

fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dx * (inner.iter().sum::<f64>() + 0.5 * (first + last)),
    }
}

pub(crate) fn extension_samples_for(c: &DVector<Complex64>, params: &ExtensionParams) -> Vec<Complex64> {
    let l = params.l();
    let n = params.half_bandwidth() as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for (j, cj) in c.iter().enumerate() {
        let ell = j as i64 - n;
        buf[ell.rem_euclid(l as i64) as usize] += cj;
    }
    FftPlanner::new().plan_fft_inverse(l).process(&mut buf);
    let scale = params.reconstruction_scale();
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Error summary of an approximant against a reference function.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Max absolute error on each subinterval, both endpoints included.
    pub per_subinterval: Vec<f64>,
    pub global_max: f64,
    /// Trapezoid-rule L² error over `[a, b]`.
    pub l2: f64,
    pub refine: usize,
}

/// Outcome of [`LocalApproximant::l2_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Fits `f` on partition `p` using the process-wide [`FrameCache`].
pub fn fit(f: &FunctionSource, p: &Partition, params: &ExtensionParams) -> Result<LocalApproximant> {
    fit_with_cache(FrameCache::global(), f, p, params)
}

/// Fits `f` on partition `p`, taking the factorization from `cache`.
pub fn fit_with_cache(
    cache: &FrameCache,
    f: &FunctionSource,
    p: &Partition,
    params: &ExtensionParams,
) -> Result<LocalApproximant> {
    let frame = cache.get(params)?;
    fit_with_frame(&frame, f, p)
}

pub(crate) fn fit_with_frame(frame: &Frame, f: &FunctionSource, p: &Partition) -> Result<LocalApproximant> {
    let samples = sample(f, p, frame.params())?;
    let vectors = samples.iter().map(|g| frame.solve(g)).collect::<Result<Vec<_>>>()?;
    LocalApproximant::from_parts(p.clone(), *frame.params(), LocalCoefficients::new(vectors)?)
}

//! The shared collocation system of the Fourier frame on `Λ = [0, 2π/T]`.
//!
//! The matrix depends only on `(T, γ, N)`, never on the subinterval, so its
//! singular system is computed once and every subinterval solve is a pair of
//! small matrix-vector products against it. [`FrameCache`] enforces the
//! compute-once contract and counts how many factorizations were actually
//! performed.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64;
use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default extension factor.
pub const DEFAULT_T: f64 = 6.0;
/// Default oversampling ratio.
pub const DEFAULT_GAMMA: f64 = 1.0;
/// Default half-bandwidth.
pub const DEFAULT_N: usize = 9;
/// Default truncation tolerance for singular values.
pub const DEFAULT_EPSILON: f64 = 1e-14;

/// Parameters of the frame `{e^{iℓt}}_{|ℓ|≤N}` and its discretization.
///
/// Derived sizes: `m = ⌈γ(2N+1)⌉` collocation nodes, `L = ⌈T·m⌉` points on
/// the periodic interval `[0, 2π]`, and node spacing `h = 2π/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionParams {
    extension_factor: f64,
    oversampling: f64,
    half_bandwidth: usize,
    tolerance: f64,
    m: usize,
    l: usize,
}

impl ExtensionParams {
    pub fn new(t: f64, gamma: f64, n: usize, epsilon: f64) -> Result<Self> {
        if !t.is_finite() || t <= 1.0 {
            return Err(Error::invalid(format!("T must be finite and > 1, got {t}")));
        }
        if !gamma.is_finite() || gamma < 1.0 {
            return Err(Error::invalid(format!("gamma must be finite and >= 1, got {gamma}")));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::invalid(format!("epsilon must be finite and > 0, got {epsilon}")));
        }
        let cols = 2 * n + 1;
        // ceil(γ(2N+1)) and ceil(T·m); the small guard keeps exact products like 1.5·7 from rounding up
        let m = ceil_guarded(gamma * cols as f64);
        let l = ceil_guarded(t * m as f64);
        if l <= m {
            return Err(Error::invalid(format!("T = {t} too close to 1: L = {l} does not exceed m = {m}")));
        }
        Ok(ExtensionParams { extension_factor: t, oversampling: gamma, half_bandwidth: n, tolerance: epsilon, m, l })
    }

    pub fn defaults() -> Self {
        Self::new(DEFAULT_T, DEFAULT_GAMMA, DEFAULT_N, DEFAULT_EPSILON).expect("default parameters are valid")
    }

    pub fn extension_factor(&self) -> f64 {
        self.extension_factor
    }

    pub fn oversampling(&self) -> f64 {
        self.oversampling
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Nodes per subinterval.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Points on the periodic interval.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of frame functions, `2N+1`.
    pub fn num_modes(&self) -> usize {
        2 * self.half_bandwidth + 1
    }

    /// Node spacing `2π/L` in frame coordinates.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.l as f64
    }

    /// Factor mapping frame coefficients back to function values, `√(m/L)`.
    pub fn reconstruction_scale(&self) -> f64 {
        (self.m as f64 / self.l as f64).sqrt()
    }

    fn key(&self) -> (u64, u64, usize, u64) {
        (
            self.extension_factor.to_bits(),
            self.oversampling.to_bits(),
            self.half_bandwidth,
            self.tolerance.to_bits(),
        )
    }
}

fn ceil_guarded(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Collocation matrix with entries `e^{iℓt_i}/√L`, rows `t_i = ih`, columns `ℓ = -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationMatrix {
    entries: DMatrix<Complex64>,
}

impl CollocationMatrix {
    pub fn build(params: &ExtensionParams) -> Self {
        let n = params.half_bandwidth as i64;
        let h = params.step();
        let norm = 1.0 / (params.l as f64).sqrt();
        let entries = DMatrix::from_fn(params.m, params.num_modes(), |i, col| {
            let ell = col as i64 - n;
            // reduce ℓ·i mod L before scaling so large products stay exact
            let phase = ((ell * i as i64).rem_euclid(params.l as i64)) as f64 * h;
            Complex64::from_polar(norm, phase)
        });
        CollocationMatrix { entries }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn apply(&self, c: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * c
    }
}

/// Singular system of the collocation matrix, singular values in nonincreasing order.
#[derive(Debug, Clone)]
pub struct TsvdFactorization {
    singular_values: Vec<f64>,
    // left singular vectors as columns, m × (2N+1)
    u: DMatrix<Complex64>,
    // right singular vectors as columns, (2N+1) × (2N+1)
    v: DMatrix<Complex64>,
    tolerance: f64,
}

impl TsvdFactorization {
    pub fn compute(mat: &CollocationMatrix, tolerance: f64) -> Result<Self> {
        let a = &mat.entries;
        if a.nrows() < a.ncols() {
            return Err(Error::invalid(format!(
                "collocation matrix is {}x{}; need at least as many rows as columns",
                a.nrows(),
                a.ncols()
            )));
        }
        // LAPACK zgesvd; the full U is m × m and only its first 2N+1 columns are kept
        let dense = Array2::from_shape_fn(a.shape(), |(r, c)| a[(r, c)]);
        let (u, sv, v_h) = dense
            .svd(true, true)
            .map_err(|e| Error::ComputationFailure(format!("SVD of the collocation matrix failed: {e}")))?;
        let u = u.ok_or_else(|| Error::ComputationFailure("SVD returned no left vectors".into()))?;
        let v_h = v_h.ok_or_else(|| Error::ComputationFailure("SVD returned no right vectors".into()))?;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
        let singular_values = order.iter().map(|&j| sv[j]).collect();
        let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
        let v = DMatrix::from_fn(v_h.ncols(), order.len(), |r, c| v_h[(order[c], r)].conj());
        Ok(TsvdFactorization { singular_values, u, v, tolerance })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn left_vector(&self, j: usize) -> DVector<Complex64> {
        self.u.column(j).into_owned()
    }

    pub fn right_vector(&self, j: usize) -> DVector<Complex64> {
        self.v.column(j).into_owned()
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.v.nrows()
    }

    /// Tolerance the factorization was built for.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Number of singular values strictly greater than `epsilon`.
    pub fn retained_count(&self, epsilon: f64) -> usize {
        self.singular_values.iter().take_while(|&&s| s > epsilon).count()
    }

    /// `Σ_j u_j σ_j v_j*`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }

    fn check_len(&self, g: &SampleVector) -> Result<()> {
        if g.values.len() != self.rows() {
            return Err(Error::invalid(format!(
                "sample vector has length {}, expected m = {}",
                g.values.len(),
                self.rows()
            )));
        }
        Ok(())
    }

    // ⟨g, u_j⟩ for the retained j
    fn retained_inner_products(&self, g: &SampleVector, epsilon: f64) -> (usize, DVector<Complex64>) {
        let c = self.retained_count(epsilon);
        let proj = self.u.columns(0, c).ad_mul(&g.values);
        (c, proj)
    }

    /// Truncated-SVD solution `Σ_{σ_j>ε} ⟨g,u_j⟩/σ_j · v_j`.
    pub fn solve(&self, g: &SampleVector, epsilon: f64) -> Result<DVector<Complex64>> {
        self.check_len(g)?;
        check_epsilon(epsilon)?;
        let (c, mut w) = self.retained_inner_products(g, epsilon);
        for (wj, &s) in w.iter_mut().zip(&self.singular_values) {
            *wj /= s;
        }
        Ok(self.v.columns(0, c) * w)
    }

    /// Orthogonal projection `Σ_{σ_j>ε} ⟨g,u_j⟩ u_j` onto the retained left singular space.
    pub fn project(&self, g: &SampleVector, epsilon: f64) -> Result<DVector<Complex64>> {
        self.check_len(g)?;
        check_epsilon(epsilon)?;
        let (c, w) = self.retained_inner_products(g, epsilon);
        Ok(self.u.columns(0, c) * w)
    }

    /// Writes one singular value per line with 17 significant digits.
    pub fn write_singular_values<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for s in &self.singular_values {
            writeln!(out, "{s:.16e}")?;
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(())
}

/// Scaled samples `f(x_{ki})/√m` of one subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    pub k: usize,
    pub values: DVector<Complex64>,
}

impl SampleVector {
    pub fn new(k: usize, values: DVector<Complex64>) -> Self {
        SampleVector { k, values }
    }

    /// Scales raw function values by `1/√m`.
    pub fn from_function_values(k: usize, raw: &[Complex64]) -> Self {
        let scale = 1.0 / (raw.len() as f64).sqrt();
        SampleVector { k, values: DVector::from_iterator(raw.len(), raw.iter().map(|v| v * scale)) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Collocation matrix and its singular system for one parameter set.
///
/// Solves always go through `U*g`, then `Σ⁻¹`, then `V`. Folding these into a
/// single dense pseudo-inverse would sum terms of size `1/ε` that cancel and
/// destroy the accuracy of the result.
#[derive(Debug)]
pub struct Frame {
    params: ExtensionParams,
    matrix: CollocationMatrix,
    factorization: TsvdFactorization,
}

impl Frame {
    /// Builds and factorizes the system. Prefer [`FrameCache::get`], which does this once per parameter set.
    pub fn build(params: ExtensionParams) -> Result<Self> {
        let matrix = CollocationMatrix::build(&params);
        let factorization = TsvdFactorization::compute(&matrix, params.tolerance)?;
        Ok(Frame { params, matrix, factorization })
    }

    pub fn params(&self) -> &ExtensionParams {
        &self.params
    }

    pub fn matrix(&self) -> &CollocationMatrix {
        &self.matrix
    }

    pub fn factorization(&self) -> &TsvdFactorization {
        &self.factorization
    }

    /// Retained singular value count `C` at the parameter tolerance.
    pub fn retained_count(&self) -> usize {
        self.factorization.retained_count(self.params.tolerance)
    }

    /// Coefficients for one subinterval at the parameter tolerance.
    pub fn solve(&self, g: &SampleVector) -> Result<DVector<Complex64>> {
        self.factorization.solve(g, self.params.tolerance)
    }
}

/// Bit patterns of `(T, γ, N, ε)`.
type ParamKey = (u64, u64, usize, u64);

/// Compute-once store of [`Frame`]s keyed by parameter set.
///
/// Concurrent first requests for the same key block on a single build.
#[derive(Debug, Default)]
pub struct FrameCache {
    slots: Mutex<HashMap<ParamKey, Arc<OnceCell<Arc<Frame>>>>>,
    builds: AtomicUsize,
}

impl FrameCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache used by the convenience entry points.
    pub fn global() -> &'static FrameCache {
        static GLOBAL: OnceCell<FrameCache> = OnceCell::new();
        GLOBAL.get_or_init(FrameCache::new)
    }

    pub fn get(&self, params: &ExtensionParams) -> Result<Arc<Frame>> {
        let slot = {
            let mut slots = self.slots.lock().expect("frame cache poisoned");
            slots.entry(params.key()).or_default().clone()
        };
        slot.get_or_try_init(|| {
            self.builds.fetch_add(1, Ordering::SeqCst);
            Frame::build(*params).map(Arc::new)
        })
        .cloned()
    }

    /// Number of factorizations performed by this cache.
    pub fn factorization_count(&self) -> usize {
        self.builds.load(Ordering::SeqCst)
    }

    /// Drops every cached frame; the factorization count is kept.
    pub fn clear(&self) {
        self.slots.lock().expect("frame cache lock").clear();
    }
}

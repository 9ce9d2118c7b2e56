//! Singularity detection from coefficient norms, breakpoint localization by
//! sliding windows, and the corrected approximant.
//!
//! A subinterval whose samples are not in the smooth range of the frame
//! produces a coefficient vector with a norm many orders above its
//! neighbours. Shifting a window of the original length across the suspect
//! subinterval, one node at a time, and splitting there gives a pair of
//! solves whose norms collapse once the split lands on the singularity.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::approximant::{eval_series, sampling_map, ErrorReport, FunctionSource, LocalApproximant};
use crate::error::{Error, Result};
use crate::frame::{FrameCache, SampleVector};
use crate::geometry::ScaleMap;

/// Relative tolerance used to decide whether a partition is uniform.
const UNIFORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    Absolute,
    RelativeToMedian,
}

/// Rule for flagging a subinterval from its coefficient norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPolicy {
    mode: DetectionMode,
    threshold: f64,
}

impl DetectionPolicy {
    pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 1e4;

    pub fn new(mode: DetectionMode, threshold: f64) -> Result<Self> {
        let ok = match mode {
            DetectionMode::Absolute => threshold > 0.0,
            DetectionMode::RelativeToMedian => threshold > 1.0,
        };
        if !ok || !threshold.is_finite() {
            return Err(Error::invalid(format!("threshold {threshold} not allowed in {mode:?} mode")));
        }
        Ok(DetectionPolicy { mode, threshold })
    }

    pub fn relative(threshold: f64) -> Result<Self> {
        Self::new(DetectionMode::RelativeToMedian, threshold)
    }

    pub fn absolute(threshold: f64) -> Result<Self> {
        Self::new(DetectionMode::Absolute, threshold)
    }

    pub fn mode(&self) -> DetectionMode {
        self.mode
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl Default for DetectionPolicy {
    fn default() -> Self {
        DetectionPolicy { mode: DetectionMode::RelativeToMedian, threshold: Self::DEFAULT_RELATIVE_THRESHOLD }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// 1-based indices of subintervals whose coefficient norm exceeds the policy, ascending.
pub fn detect(apx: &LocalApproximant, policy: &DetectionPolicy) -> Result<Vec<usize>> {
    let norms = apx.coefficients().norms();
    let limit = match policy.mode {
        DetectionMode::Absolute => policy.threshold,
        DetectionMode::RelativeToMedian => {
            if norms.len() < 3 {
                return Err(Error::InsufficientContext(format!(
                    "relative detection needs at least 3 subintervals, got {}",
                    norms.len()
                )));
            }
            policy.threshold * median(norms)
        }
    };
    Ok(norms.iter().enumerate().filter(|(_, n)| **n > limit).map(|(k, _)| k + 1).collect())
}

/// One split position tried by [`localize`].
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedCandidate {
    pub i: usize,
    pub left: (f64, f64),
    pub right: (f64, f64),
    pub norm_left: f64,
    pub norm_right: f64,
}

/// Selected split of a flagged subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub k0: usize,
    pub i0: usize,
    pub x_break: f64,
    pub left_window: (f64, f64),
    pub right_window: (f64, f64),
    pub c_left: DVector<Complex64>,
    pub c_right: DVector<Complex64>,
    /// All tried candidates, `i = 1..m-2`.
    pub candidates: Vec<RefinedCandidate>,
}

impl Localization {
    pub fn norm_left(&self) -> f64 {
        self.c_left.norm()
    }

    pub fn norm_right(&self) -> f64 {
        self.c_right.norm()
    }
}

/// Localizes the singularity in subinterval `k0` using the process-wide frame cache.
pub fn localize(apx: &LocalApproximant, k0: usize, f: &FunctionSource) -> Result<Localization> {
    localize_with_cache(FrameCache::global(), apx, k0, f)
}

/// Localizes the singularity in subinterval `k0`.
///
/// Windows `IL_i = [x_{k0-1,i}, x_{k0,i}]` and `IR_i = [x_{k0,i}, x_{k0+1,i}]`
/// for `i = 1..m-2` consist of original grid nodes, so they are solved with
/// the same factorization. `f` is only evaluated on the nodes of subintervals
/// `k0-1`, `k0` and `k0+1`.
pub fn localize_with_cache(
    cache: &FrameCache,
    apx: &LocalApproximant,
    k0: usize,
    f: &FunctionSource,
) -> Result<Localization> {
    let p = apx.partition();
    p.check_index(k0)?;
    let kk = p.num_subintervals();
    if k0 == 1 || k0 == kk {
        return Err(Error::BoundaryUnsupported { k: k0 });
    }
    if !p.is_uniform(UNIFORM_TOL) {
        return Err(Error::GeometryMismatch("localization windows need a uniform partition".into()));
    }
    let params = apx.params();
    let frame = cache.get(params)?;
    let m = params.m();

    // nodes of I_{k0-1}, I_{k0}, I_{k0+1} with shared breakpoints once
    let mut nodes = Vec::with_capacity(3 * (m - 1) + 1);
    for k in k0 - 1..=k0 + 1 {
        let grid = p.grid(k, m)?;
        let skip = if k == k0 - 1 { 0 } else { 1 };
        nodes.extend_from_slice(&grid.nodes()[skip..]);
    }
    let values = nodes.iter().map(|&x| f.value_at(x)).collect::<Result<Vec<_>>>()?;

    let solve = |start: usize| -> Result<DVector<Complex64>> {
        let g = SampleVector::from_function_values(k0, &values[start..start + m]);
        frame.solve(&g)
    };
    let solved = (1..=m - 2)
        .into_par_iter()
        .map(|i| Ok((i, solve(i)?, solve(m - 1 + i)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<usize> = None;
    let mut candidates = Vec::with_capacity(solved.len());
    for (idx, (i, cl, cr)) in solved.iter().enumerate() {
        let cand = RefinedCandidate {
            i: *i,
            left: (nodes[*i], nodes[i + m - 1]),
            right: (nodes[i + m - 1], nodes[i + 2 * (m - 1)]),
            norm_left: cl.norm(),
            norm_right: cr.norm(),
        };
        let score = cand.norm_left + cand.norm_right;
        // strict comparison keeps the smallest i on ties
        if best.is_none_or(|b| {
            let c: &RefinedCandidate = &candidates[b];
            score < c.norm_left + c.norm_right
        }) {
            best = Some(idx);
        }
        candidates.push(cand);
    }
    let b = best.ok_or_else(|| Error::ComputationFailure("no localization candidates (m < 3)".into()))?;
    let (i0, c_left, c_right) = solved.into_iter().nth(b).expect("index from the same list");
    let chosen = &candidates[b];
    Ok(Localization {
        k0,
        i0,
        x_break: chosen.left.1,
        left_window: chosen.left,
        right_window: chosen.right,
        c_left,
        c_right,
        candidates,
    })
}

#[derive(Debug, Clone)]
struct Replacement {
    k0: usize,
    x_break: f64,
    left_map: ScaleMap,
    right_map: ScaleMap,
    c_left: DVector<Complex64>,
    c_right: DVector<Complex64>,
}

/// Approximant with flagged subintervals re-approximated on both sides of their breakpoint.
#[derive(Debug, Clone)]
pub struct CorrectedApproximant {
    base: LocalApproximant,
    replacements: Vec<Replacement>,
}

/// Replaces the flagged subintervals of `apx` by the split approximations in `locs`.
pub fn correct(apx: &LocalApproximant, locs: &[Localization]) -> Result<CorrectedApproximant> {
    let params = apx.params();
    let mut replacements: Vec<Replacement> = Vec::with_capacity(locs.len());
    for loc in locs {
        apx.partition().check_index(loc.k0)?;
        if replacements.iter().any(|r| r.k0 == loc.k0) {
            return Err(Error::invalid(format!("two localizations for subinterval {}", loc.k0)));
        }
        if loc.c_left.len() != params.num_modes() || loc.c_right.len() != params.num_modes() {
            return Err(Error::invalid("localization coefficients do not match the approximant's bandwidth"));
        }
        replacements.push(Replacement {
            k0: loc.k0,
            x_break: loc.x_break,
            left_map: sampling_map(loc.left_window.0, loc.left_window.1, params)?,
            right_map: sampling_map(loc.right_window.0, loc.right_window.1, params)?,
            c_left: loc.c_left.clone(),
            c_right: loc.c_right.clone(),
        });
    }
    replacements.sort_by_key(|r| r.k0);
    Ok(CorrectedApproximant { base: apx.clone(), replacements })
}

impl CorrectedApproximant {
    pub fn base(&self) -> &LocalApproximant {
        &self.base
    }

    /// `(k0, x_break)` of each replaced subinterval.
    pub fn breaks(&self) -> Vec<(usize, f64)> {
        self.replacements.iter().map(|r| (r.k0, r.x_break)).collect()
    }

    /// Value at `x`; the breakpoint itself belongs to the left window.
    ///
    /// A replaced subinterval covers its closed range `[x_{k0,0}, x_{k0,m-1}]`,
    /// so its left endpoint is taken from the left window rather than from
    /// the piece before it.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        let p = self.base.partition();
        let mut k = p.locate(x)?;
        if k < p.num_subintervals() && x == p.breakpoints()[k] && self.replacements.iter().any(|r| r.k0 == k + 1) {
            k += 1;
        }
        Ok(self.evaluate_in(k, x))
    }

    fn evaluate_in(&self, k: usize, x: f64) -> Complex64 {
        let scale = self.base.params().reconstruction_scale();
        match self.replacements.iter().find(|r| r.k0 == k) {
            Some(r) if x <= r.x_break => eval_series(&r.c_left, r.left_map.forward(x), scale),
            Some(r) => eval_series(&r.c_right, r.right_map.forward(x), scale),
            None => self.base.evaluate_piece(k, x),
        }
    }

    /// Error report on the same refined grid as [`LocalApproximant::error_report`].
    pub fn error_report(&self, f_ref: &FunctionSource, refine: usize) -> Result<ErrorReport> {
        self.report(f_ref, refine, 0.0)
    }

    /// Like [`error_report`](Self::error_report) but ignoring points within
    /// `radius` of any corrected breakpoint; `l2` covers the remaining points.
    pub fn error_report_excluding(&self, f_ref: &FunctionSource, refine: usize, radius: f64) -> Result<ErrorReport> {
        self.report(f_ref, refine, radius)
    }

    fn report(&self, f_ref: &FunctionSource, refine: usize, radius: f64) -> Result<ErrorReport> {
        if !f_ref.is_callable() {
            return Err(Error::invalid("error measurement needs a callable reference function"));
        }
        if refine == 0 {
            return Err(Error::invalid("refinement factor must be at least 1"));
        }
        let p = self.base.partition();
        let steps = refine * (self.base.params().m() - 1);
        let mut per_subinterval = Vec::with_capacity(p.num_subintervals());
        let mut sq = 0.0;
        for k in 1..=p.num_subintervals() {
            let (lo, hi) = p.subinterval(k)?;
            let dx = (hi - lo) / steps as f64;
            let mut worst: f64 = 0.0;
            for j in 0..=steps {
                let x = if j == steps { hi } else { lo + j as f64 * dx };
                if self.replacements.iter().any(|r| (x - r.x_break).abs() <= radius) {
                    continue;
                }
                let e = (f_ref.value_at(x)? - self.evaluate_in(k, x)).norm();
                worst = worst.max(e);
                let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
                sq += w * dx * e * e;
            }
            per_subinterval.push(worst);
        }
        let global_max = per_subinterval.iter().copied().fold(0.0, f64::max);
        Ok(ErrorReport { per_subinterval, global_max, l2: sq.sqrt(), refine })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximant::fit_with_cache;
    use crate::frame::ExtensionParams;
    use crate::geometry::{Interval, Partition};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    use std::sync::{Arc, Mutex};

    fn f8(corrected: bool) -> FunctionSource {
        FunctionSource::real(move |x| {
            if x <= -0.5 {
                1.0
            } else if x <= 0.0 {
                let s = (PI * x).sin();
                if corrected {
                    -s
                } else {
                    s
                }
            } else {
                x * x
            }
        })
    }

    fn setup(f: &FunctionSource, k: usize) -> (FrameCache, LocalApproximant) {
        let cache = FrameCache::new();
        let p = Partition::uniform(Interval::new(-1.0, 1.0).unwrap(), k).unwrap();
        let apx = fit_with_cache(&cache, f, &p, &ExtensionParams::defaults()).unwrap();
        (cache, apx)
    }

    #[test]
    fn policy_validation() {
        assert!(DetectionPolicy::relative(1.0).is_err());
        assert!(DetectionPolicy::relative(1.5).is_ok());
        assert!(DetectionPolicy::absolute(0.0).is_err());
        assert!(DetectionPolicy::absolute(0.5).is_ok());
        assert!(DetectionPolicy::absolute(f64::INFINITY).is_err());
        assert_eq!(DetectionPolicy::default().threshold(), 1e4);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn relative_detection_needs_three_pieces() {
        let (_, apx) = setup(&FunctionSource::real(|x| x), 2);
        assert!(matches!(detect(&apx, &DetectionPolicy::default()), Err(Error::InsufficientContext(_))));
        assert!(detect(&apx, &DetectionPolicy::absolute(1e300).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn detects_f8_on_21_pieces() {
        for corrected in [false, true] {
            let (_, apx) = setup(&f8(corrected), 21);
            assert_eq!(detect(&apx, &DetectionPolicy::default()).unwrap(), vec![6, 11], "corrected = {corrected}");
        }
        let (_, apx) = setup(&f8(true), 20);
        assert!(detect(&apx, &DetectionPolicy::default()).unwrap().is_empty());
    }

    #[test]
    fn raising_threshold_never_adds_flags() {
        let (_, apx) = setup(&f8(false), 21);
        let mut prev = usize::MAX;
        for t in [2.0, 10.0, 1e2, 1e4, 1e6, 1e8, 1e10, 1e12] {
            let n = detect(&apx, &DetectionPolicy::relative(t).unwrap()).unwrap().len();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn localize_rejects_boundary_and_nonuniform() {
        let f = f8(true);
        let (cache, apx) = setup(&f, 21);
        assert!(matches!(localize_with_cache(&cache, &apx, 1, &f), Err(Error::BoundaryUnsupported { k: 1 })));
        assert!(matches!(localize_with_cache(&cache, &apx, 21, &f), Err(Error::BoundaryUnsupported { k: 21 })));
        assert!(localize_with_cache(&cache, &apx, 22, &f).is_err());

        let p = Partition::with_interior_points(Interval::new(-1.0, 1.0).unwrap(), &[-0.5, -0.2, 0.0, 0.2, 0.5])
            .unwrap();
        let apx = fit_with_cache(&cache, &f, &p, &ExtensionParams::defaults()).unwrap();
        assert!(matches!(localize_with_cache(&cache, &apx, 3, &f), Err(Error::GeometryMismatch(_))));
    }

    #[test]
    fn localizes_f8_breaks_within_one_spacing() {
        let f = f8(true);
        let (cache, apx) = setup(&f, 21);
        let h = 2.0 / 21.0 / 18.0;
        for (k0, truth) in [(6, -0.5), (11, 0.0)] {
            let loc = localize_with_cache(&cache, &apx, k0, &f).unwrap();
            assert!((loc.x_break - truth).abs() <= h, "k0={k0}: {}", loc.x_break);
            assert_eq!(loc.candidates.len(), 17);
            let best = loc.norm_left() + loc.norm_right();
            assert!(loc.candidates.iter().all(|c| c.norm_left + c.norm_right >= best));
        }
    }

    #[test]
    fn kink_on_a_node_is_found_exactly() {
        let p = Partition::uniform(Interval::new(-1.0, 1.0).unwrap(), 9).unwrap();
        let x_star = p.grid(5, 19).unwrap().nodes()[7];
        let f = FunctionSource::real(move |x| (x - x_star).abs());
        let cache = FrameCache::new();
        let apx = fit_with_cache(&cache, &f, &p, &ExtensionParams::defaults()).unwrap();
        let loc = localize_with_cache(&cache, &apx, 5, &f).unwrap();
        assert_eq!(loc.i0, 7);
        assert_eq!(loc.x_break, x_star);
    }

    #[test]
    fn random_single_kink_is_flagged_and_localized() {
        let mut rng = StdRng::seed_from_u64(11);
        let k = 21;
        let p = Partition::uniform(Interval::new(-1.0, 1.0).unwrap(), k).unwrap();
        let width = 2.0 / k as f64;
        let h = width / 18.0;
        let cache = FrameCache::new();
        for _ in 0..6 {
            // keep x* away from breakpoints and out of the boundary pieces
            let k_star = rng.gen_range(2..k);
            let (lo, _) = p.subinterval(k_star).unwrap();
            let x_star = lo + width * rng.gen_range(0.15..0.85);
            let f = FunctionSource::real(move |x| (x - x_star).abs());
            let apx = fit_with_cache(&cache, &f, &p, &ExtensionParams::defaults()).unwrap();
            let flags = detect(&apx, &DetectionPolicy::default()).unwrap();
            assert_eq!(flags, vec![k_star], "x* = {x_star}");
            let loc = localize_with_cache(&cache, &apx, k_star, &f).unwrap();
            assert!((loc.x_break - x_star).abs() <= h, "x* = {x_star}, found {}", loc.x_break);
        }
    }

    #[test]
    fn localize_only_reads_neighbouring_pieces() {
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        let f = FunctionSource::real(move |x| {
            log.lock().unwrap().push(x);
            (x - 0.013).abs()
        });
        let (cache, apx) = setup(&f, 21);
        seen.lock().unwrap().clear();
        let k0 = apx.partition().locate(0.013).unwrap();
        localize_with_cache(&cache, &apx, k0, &f).unwrap();
        let lo = apx.partition().subinterval(k0 - 1).unwrap().0;
        let hi = apx.partition().subinterval(k0 + 1).unwrap().1;
        let seen = seen.lock().unwrap();
        assert!(!seen.is_empty());
        assert!(seen.iter().all(|&x| lo <= x && x <= hi));
    }

    #[test]
    fn correction_restores_accuracy_with_one_factorization() {
        let f = f8(true);
        let (cache, apx) = setup(&f, 21);
        let flags = detect(&apx, &DetectionPolicy::default()).unwrap();
        let locs: Vec<_> = flags.iter().map(|&k| localize_with_cache(&cache, &apx, k, &f).unwrap()).collect();
        let corrected = correct(&apx, &locs).unwrap();
        assert_eq!(cache.factorization_count(), 1);

        let h = 2.0 / 21.0 / 18.0;
        let before = apx.error_report(&f, 10).unwrap().global_max;
        let after = corrected.error_report_excluding(&f, 10, h).unwrap();
        assert!(before > 1e-6);
        // the kink at 0 is a grid node and is removed completely; -1/2 lies
        // halfway between two nodes, so its piece only improves
        assert!(after.per_subinterval[10] < 1e-12);
        assert!(after.per_subinterval[5] < before / 10.0);
        let untouched = apx.error_report(&f, 10).unwrap().per_subinterval;
        for k in (0..21).filter(|k| *k != 5 && *k != 10) {
            assert_eq!(after.per_subinterval[k], untouched[k]);
        }
        assert!((corrected.evaluate(0.7).unwrap().re - 0.49).abs() < 1e-9);
    }

    #[test]
    fn correction_dispatch() {
        let f = f8(true);
        let (cache, apx) = setup(&f, 21);
        let none = correct(&apx, &[]).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let x = rng.gen_range(-1.0..=1.0);
            assert_eq!(none.evaluate(x).unwrap(), apx.evaluate(x).unwrap());
        }

        let loc = localize_with_cache(&cache, &apx, 11, &f).unwrap();
        let c = correct(&apx, std::slice::from_ref(&loc)).unwrap();
        assert!(matches!(correct(&apx, &[loc.clone(), loc.clone()]), Err(Error::InvalidArgument(_))));
        // outside the flagged piece the base approximant is used unchanged
        assert_eq!(c.evaluate(0.7).unwrap(), apx.evaluate(0.7).unwrap());
        let scale = apx.params().reconstruction_scale();
        let left_map = sampling_map(loc.left_window.0, loc.left_window.1, apx.params()).unwrap();
        let right_map = sampling_map(loc.right_window.0, loc.right_window.1, apx.params()).unwrap();
        let at_break = eval_series(&loc.c_left, left_map.forward(loc.x_break), scale);
        assert_eq!(c.evaluate(loc.x_break).unwrap(), at_break);
        let (lo, hi) = apx.partition().subinterval(11).unwrap();
        assert_eq!(c.evaluate(lo).unwrap(), eval_series(&loc.c_left, left_map.forward(lo), scale));
        assert_eq!(c.evaluate(hi).unwrap(), eval_series(&loc.c_right, right_map.forward(hi), scale));
        let x = loc.x_break + 1e-3;
        assert_eq!(c.evaluate(x).unwrap(), eval_series(&loc.c_right, right_map.forward(x), scale));
        assert!(c.evaluate(1.5).is_err());
    }
}

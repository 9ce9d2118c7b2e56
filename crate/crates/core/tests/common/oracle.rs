//! Test-only reference implementations, independent of the library's solve path.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Singular values and vectors via one-sided (Hestenes) Jacobi rotations.
pub struct JacobiSvd {
    pub sigma: Vec<f64>,
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
}

pub fn jacobi_svd(a: &DMatrix<Complex64>) -> JacobiSvd {
    let (m, n) = a.shape();
    assert!(m >= n, "oracle expects a tall matrix");
    let mut w = a.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                // align the phase of column q with column p
                for r in 0..m {
                    w[(r, q)] *= phase.conj();
                }
                for r in 0..n {
                    v[(r, q)] *= phase.conj();
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let (x, y) = (w[(r, p)], w[(r, q)]);
                    w[(r, p)] = x * c - y * s;
                    w[(r, q)] = x * s + y * c;
                }
                for r in 0..n {
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = x * c - y * s;
                    v[(r, q)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<(f64, usize)> = (0..n).map(|j| (w.column(j).norm(), j)).collect();
    sigma.sort_by(|x, y| y.0.total_cmp(&x.0));
    let u = DMatrix::from_fn(m, n, |r, c| {
        let (s, j) = sigma[c];
        if s > 0.0 {
            w[(r, j)] / s
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let vv = DMatrix::from_fn(n, n, |r, c| v[(r, sigma[c].1)]);
    JacobiSvd { sigma: sigma.iter().map(|x| x.0).collect(), u, v: vv }
}

/// Hard-threshold pseudoinverse applied to `g`: components with `σ ≤ ε` are dropped.
pub fn dense_tsvd_oracle(a: &DMatrix<Complex64>, g: &DVector<Complex64>, epsilon: f64) -> DVector<Complex64> {
    let svd = jacobi_svd(a);
    let n = a.ncols();
    let mut c = DVector::<Complex64>::zeros(n);
    for j in 0..n {
        let s = svd.sigma[j];
        if s > epsilon {
            let coef = svd.u.column(j).dotc(g) / s;
            c += svd.v.column(j) * coef;
        }
    }
    c
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.nrows() >= a.ncols() {
        jacobi_svd(a).sigma[0]
    } else {
        jacobi_svd(&a.adjoint()).sigma[0]
    }
}

pub fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Direct summation of `scale · Σ_ℓ c_ℓ e^{iℓt}` with `ℓ = -N..=N`.
pub fn direct_fourier_sum(c: &[Complex64], t: f64, scale: f64) -> Complex64 {
    let n = (c.len() / 2) as i64;
    c.iter()
        .enumerate()
        .map(|(j, cj)| cj * Complex64::from_polar(1.0, (j as i64 - n) as f64 * t))
        .sum::<Complex64>()
        * scale
}

/// Composite trapezoid rule on equispaced samples.
pub fn trapezoid(values: &[f64], spacing: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    spacing * (inner + 0.5 * (values[0] + values[n - 1]))
}

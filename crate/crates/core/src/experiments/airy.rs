//! Airy function of the first kind for real argument.
//!
//! * `-4 ≤ x ≤ 2`: power series about 0 seeded with `Ai(0)` and `Ai'(0)`,
//!   summed through the recurrence of `y'' = x y`.
//! * `2 < x < 12`: the same recurrence stepped backward from the asymptotic
//!   values at 12. Ai dominates in that direction so the stepping is stable.
//! * `-10 < x < -4`: the same recurrence re-centred at `-4` and stepped in
//!   increments of at most 0.5, which avoids the cancellation the series about
//!   0 suffers further out.
//! * `x ≤ -10` and `x ≥ 12`: the standard asymptotic expansions, truncated at
//!   the smallest term.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_PI_4, PI};

const AI0: f64 = 0.355_028_053_887_817_239_26;
const AIP0: f64 = -0.258_819_403_792_806_798_41;

const SERIES_LEFT: f64 = -4.0;
const ASYMPTOTIC_LEFT: f64 = -10.0;
const SERIES_RIGHT: f64 = 2.0;
const ASYMPTOTIC_RIGHT: f64 = 12.0;
const MAX_STEP: f64 = 0.5;

/// `Ai(x)`.
pub fn airy_ai(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= ASYMPTOTIC_LEFT {
        asymptotic_negative(-x)
    } else if x < SERIES_LEFT {
        let (y, dy) = taylor_step(0.0, AI0, AIP0, SERIES_LEFT);
        march(SERIES_LEFT, y, dy, x)
    } else if x <= SERIES_RIGHT {
        taylor_step(0.0, AI0, AIP0, x).0
    } else if x < ASYMPTOTIC_RIGHT {
        let (y, dy) = asymptotic_positive(ASYMPTOTIC_RIGHT);
        march(ASYMPTOTIC_RIGHT, y, dy, x)
    } else {
        asymptotic_positive(x).0
    }
}

fn march(mut x0: f64, mut y: f64, mut dy: f64, x: f64) -> f64 {
    let steps = ((x - x0).abs() / MAX_STEP).ceil().max(1.0) as usize;
    let h = (x - x0) / steps as f64;
    for _ in 0..steps {
        (y, dy) = taylor_step(x0, y, dy, h);
        x0 += h;
    }
    y
}

// Taylor expansion of a solution of y'' = x y about x0, evaluated at x0 + h.
// Coefficients obey (n+2)(n+1) a_{n+2} = x0 a_n + a_{n-1}.
fn taylor_step(x0: f64, y0: f64, dy0: f64, h: f64) -> (f64, f64) {
    // (a_{n-3}, a_{n-2}, a_{n-1}) with a_{-1} = 0
    let (mut a3, mut a2, mut a1) = (0.0, y0, dy0);
    let mut y = y0 + dy0 * h;
    let mut dy = dy0;
    let mut hp = h; // h^{n-1}
    let scale = y0.abs() + dy0.abs();
    let mut small_run = 0;
    for n in 2..400usize {
        let an = (x0 * a2 + a3) / (n * (n - 1)) as f64;
        (a3, a2, a1) = (a2, a1, an);
        let term_d = n as f64 * an * hp;
        hp *= h;
        let term = an * hp;
        y += term;
        dy += term_d;
        if term.abs() + term_d.abs() <= 1e-18 * (scale + y.abs() + dy.abs()) {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    (y, dy)
}

fn asymptotic_terms(zeta: f64) -> Vec<f64> {
    // u_k / ζ^k with u_k = Γ(3k+1/2) / (54^k k! Γ(k+1/2)); stop at the smallest term
    let mut out = vec![1.0];
    let mut term = 1.0f64;
    for k in 1..200usize {
        let kf = k as f64;
        let ratio = (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf) / zeta;
        let next = term * ratio;
        if next.abs() >= term.abs() || next.abs() < 1e-18 {
            break;
        }
        term = next;
        out.push(term);
    }
    out
}

fn asymptotic_negative(z: f64) -> f64 {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let terms = asymptotic_terms(zeta);
    let (mut even, mut odd) = (0.0, 0.0);
    for (k, t) in terms.iter().enumerate() {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * t;
        } else {
            odd += sign * t;
        }
    }
    let phase = zeta - FRAC_PI_4;
    (phase.cos() * even + phase.sin() * odd) / (PI.sqrt() * z.powf(0.25))
}

// (Ai(x), Ai'(x)); the derivative series uses v_k = -(6k+1)/(6k-1) u_k
fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (mut sum, mut dsum) = (0.0, 0.0);
    for (k, t) in asymptotic_terms(zeta).iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        let v = if k == 0 { 1.0 } else { -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) };
        sum += sign * t;
        dsum += sign * v * t;
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e / x.powf(0.25) * sum, -e * x.powf(0.25) * dsum)
}

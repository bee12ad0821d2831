//! Bracketing root finders.

use crate::error::{Error, Result};

/// Bisection for a monotone function on `[lo, hi]`, returning `x` with
/// `f(x) ≈ target`. Stops when the bracket is narrower than
/// `rel_tol * max(|lo|, |hi|)` (or collapses to adjacent floats).
pub fn bisect_monotone<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let increasing = f(hi) >= f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = f(mid) > target;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Illinois (modified regula falsi) on a sign-changing bracket. Falls back to
/// bisection whenever a function value is not finite. Returns the abscissa
/// once `|f(x)| <= f_tol` or the bracket width drops below `x_tol`.
pub fn illinois<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, f_tol: f64, x_tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut side = 0i8;
    for _ in 0..500 {
        let c = if fa.is_finite() && fb.is_finite() {
            let c = (a * fb - b * fa) / (fb - fa);
            if c > a.min(b) && c < a.max(b) {
                c
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fc = f(c)?;
        if fc.abs() <= f_tol || (b - a).abs() <= x_tol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::RootFinding("iteration budget exhausted".into()))
}

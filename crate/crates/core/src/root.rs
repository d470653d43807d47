//! Scalar bisection on bracketed monotone functions.
//!
//! Every root-finding problem in this crate comes with a proof that the
//! objective is monotone (or at least single-crossing) on a known bracket,
//! so plain bisection is the method of record: it cannot escape the bracket
//! and its error halves every step.

use crate::error::{Error, Result};

/// Width at which a bracket is considered resolved.
pub const DEFAULT_XTOL: f64 = 1e-13;

/// Finds the root of `f` on `[a, b]`, assuming `f(a)` and `f(b)` have
/// opposite (or zero) signs. Exact zeros at an endpoint are returned
/// immediately, which matters at parameter boundaries (e.g. alignment
/// exactly 1) where the root sits on the bracket edge.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::input(format!("bisect: inverted bracket [{a}, {b}]")));
    }
    let fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let fb = f(b);
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::input(format!(
            "bisect: no sign change on [{a}, {b}] (f(a)={fa:.6e}, f(b)={fb:.6e})"
        )));
    }
    let (mut lo, mut hi, sign_lo) = (a, b, fa.signum());
    // 53 halvings exhaust f64 resolution on a unit bracket; allow slack.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

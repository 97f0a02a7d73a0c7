//! Bracketed bisection for strictly monotone scalar functions.

use crate::error::{Error, Result};

/// Iteration cap shared by utility inversion and the portfolio first-order condition.
pub const MAX_BISECTION_STEPS: usize = 200;

/// Bisects `f` on `[lo, hi]`, where `f(lo)` and `f(hi)` have opposite signs (or one is zero).
///
/// Stops when the midpoint can no longer be separated from an endpoint in `f64`, when `f`
/// hits zero exactly, or after `max_steps` halvings, and returns the final midpoint together
/// with the number of steps taken.
pub(crate) fn bisect<F>(f: F, mut lo: f64, mut hi: f64, max_steps: usize) -> Result<(f64, usize)>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Invariant(format!("invalid bracket [{lo}, {hi}]")));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0));
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Convergence(format!(
            "bracket [{lo}, {hi}] does not straddle a root (f = {f_lo}, {f_hi})"
        )));
    }
    let lo_negative = f_lo < 0.0;
    for step in 1..=max_steps {
        let mid = lo + (hi - lo) * 0.5;
        if mid <= lo || mid >= hi {
            return Ok((mid, step));
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, step));
        }
        if f_mid.is_nan() {
            return Err(Error::Convergence(format!("function is NaN at {mid}")));
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + (hi - lo) * 0.5, max_steps))
}

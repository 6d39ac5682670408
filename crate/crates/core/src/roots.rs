//! Bracketing root finders for the monotone branches of τ, τ′ and σ.

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;
pub const BRACKET_WIDTH: f64 = 1e-13;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `BRACKET_WIDTH` (relative to the
/// magnitude of the endpoints) or after `MAX_ITER` halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= BRACKET_WIDTH * (1.0 + lo.abs().max(hi.abs())) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves `f(x) = target` for an increasing `f` on the whole real line,
/// expanding the bracket geometrically from `[-1, 1]`.
pub fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64) -> Result<f64> {
    let g = |x: f64| f(x) - target;
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut n = 0;
    while g(lo) > 0.0 {
        lo *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::Solver(format!("cannot bracket level {target} from below")));
        }
    }
    n = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::Solver(format!("cannot bracket level {target} from above")));
        }
    }
    bisect(g, lo, hi)
}

//! Bracketing root finder.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[lo, hi]`.
///
/// Inverse quadratic interpolation and secant steps are accepted only while
/// they shrink the bracket at least as fast as bisection would.
pub fn brent<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }
    if f_lo.abs() < f_hi.abs() {
        std::mem::swap(&mut lo, &mut hi);
        std::mem::swap(&mut f_lo, &mut f_hi);
    }

    // `hi` is the best estimate, `lo` the contrapoint.
    let mut c = lo;
    let mut fc = f_lo;
    let mut d = hi - lo;
    let mut e = d;
    for _ in 0..max_iter {
        if fc.signum() == f_hi.signum() {
            c = lo;
            fc = f_lo;
            d = hi - lo;
            e = d;
        }
        if fc.abs() < f_hi.abs() {
            lo = hi;
            hi = c;
            c = lo;
            f_lo = f_hi;
            f_hi = fc;
            fc = f_lo;
        }
        let tol = 2.0 * f64::EPSILON * hi.abs() + 0.5 * xtol;
        let m = 0.5 * (c - hi);
        if m.abs() <= tol || f_hi == 0.0 {
            return Ok(hi);
        }
        if e.abs() >= tol && f_lo.abs() > f_hi.abs() {
            let s = f_hi / f_lo;
            let (mut p, mut q);
            if lo == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = f_lo / fc;
                let r = f_hi / fc;
                p = s * (2.0 * m * qq * (qq - r) - (hi - lo) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        lo = hi;
        f_lo = f_hi;
        hi += if d.abs() > tol { d } else { tol.copysign(m) };
        f_hi = f(hi);
        if f_hi.is_nan() {
            return Err(Error::RootFinding(format!("function is NaN at {hi}")));
        }
    }
    Err(Error::RootFinding(format!(
        "no convergence after {max_iter} iterations"
    )))
}

/// Plain bisection; returns the midpoint of the final bracket.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::RootFinding(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

//! Adaptive Simpson quadrature on compact intervals.

use crate::error::{Result, VolError};

/// Accept when the error estimate is below `max(abs, rel * |I|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-12 }
    }
}

const MAX_DEPTH: u32 = 48;

struct State {
    failed: bool,
    error: f64,
}

/// Integrates `f` over `[a, b]` (either orientation). Fails when the
/// integrand is not finite or a subinterval hits the recursion limit
/// without meeting its share of the tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(VolError::Quadrature { a, b, estimate: f64::NAN, error: f64::INFINITY });
    }
    if a == b {
        return Ok(0.0);
    }

    // coarse composite pass to size the relative target
    let panels = 32;
    let w = (b - a) / panels as f64;
    let mut coarse = 0.0;
    for i in 0..panels {
        let l = a + i as f64 * w;
        let r = l + w;
        coarse += w / 6.0 * (f(l) + 4.0 * f(0.5 * (l + r)) + f(r));
    }
    if !coarse.is_finite() {
        return Err(VolError::Quadrature { a, b, estimate: coarse, error: f64::INFINITY });
    }
    let eps = tol.abs.max(tol.rel * coarse.abs());

    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut st = State { failed: false, error: 0.0 };
    let est = recurse(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH, &mut st);
    if st.failed || !est.is_finite() {
        return Err(VolError::Quadrature { a, b, estimate: est, error: st.error });
    }
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    st: &mut State,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        st.failed = true;
        st.error = f64::INFINITY;
        return left + right;
    }
    if delta.abs() <= 15.0 * eps {
        st.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    if depth == 0 || m <= a.min(b) || m >= a.max(b) {
        st.failed = true;
        st.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, st)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, st)
}

//! Maximum-likelihood drift estimator from a discretely observed path pair.
//!
//! ```text
//! f = a / (sigma1^2 sigma2^2),   g = a / (sigma1 sigma2)
//! theta_hat = sum_k f_k (x[k+1] - x[k]) / sum_k g_k^2 h
//! ```
//!
//! Both integrals are left-point sums, the same coupling the simulator uses,
//! so on synthetic paths `theta_hat - theta = sum g dW / sum g^2 h` holds up
//! to rounding.

use crate::error::{Result, VolError};
use crate::models::{CoefFn, ModelSpec};
use crate::simulate::PathPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateResult {
    pub theta_hat: f64,
    /// `sum f dX`
    pub numerator: f64,
    /// `sum g^2 h`, the quadratic variation of `M = int g dW`.
    pub denominator: f64,
    pub horizon: f64,
    pub n_used: usize,
}

impl EstimateResult {
    fn from_sums(numerator: f64, denominator: f64, horizon: f64, n_used: usize) -> Result<Self> {
        if !numerator.is_finite() || !denominator.is_finite() {
            return Err(VolError::NonFiniteEstimate { numerator, denominator, n_used });
        }
        if !(denominator > 0.0) {
            return Err(VolError::NoInformation { denominator, n_used });
        }
        Ok(EstimateResult { theta_hat: numerator / denominator, numerator, denominator, horizon, n_used })
    }
}

#[inline]
fn ratios(spec: &ModelSpec, t: f64, x: f64, y: f64) -> Option<(f64, f64)> {
    let s1 = spec.sigma1(t, x);
    let s2 = spec.sigma2(t, y);
    if s1 == 0.0 || s2 == 0.0 || !(s1 * s2).is_finite() {
        return None;
    }
    // a/sigma1 first: keeps x^2 out of the linear model
    let r = spec.drift(t, x) / s1;
    Some((r / s1 / (s2 * s2), r / s2))
}

/// `(f, g)` at one point.
pub fn f_g_eval(spec: &ModelSpec, t: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    ratios(spec, t, x, y).ok_or(VolError::DegenerateVolatility { node: None, t, x, y })
}

/// Runs the left-point sums once over the path and snapshots them after
/// each requested number of steps. `term(k)` returns `(numerator term,
/// g^2)` for step `k`. Checkpoints beyond a failing node inherit its error.
fn sweep<F>(path: &PathPair, checkpoints: &[usize], mut term: F) -> Vec<Result<EstimateResult>>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    let h = path.grid.step();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut num = 0.0;
    let mut den = 0.0;
    let mut done = 0usize;
    let mut failure: Option<VolError> = None;
    for &n in checkpoints {
        if n == 0 || n > path.steps() {
            out.push(Err(VolError::InvalidGrid(format!(
                "cannot estimate over {n} steps of a {}-step path",
                path.steps()
            ))));
            continue;
        }
        while failure.is_none() && done < n {
            match term(done) {
                Ok((fdx, g2)) => {
                    num += fdx;
                    den += g2 * h;
                    done += 1;
                }
                Err(e) => failure = Some(e),
            }
        }
        out.push(match &failure {
            Some(e) if done < n => Err(e.clone()),
            _ if done < n => unreachable!(),
            _ => EstimateResult::from_sums(num, den, path.grid.time(n), n),
        });
    }
    out
}

fn check_path(path: &PathPair) -> Result<()> {
    path.check_lengths()?;
    if path.steps() == 0 {
        return Err(VolError::InvalidGrid("empty path".into()));
    }
    Ok(())
}

/// Estimates at several prefixes of one path in a single pass. The value at
/// `n` steps is bit-identical to `estimate_theta` on the `n`-step prefix.
pub fn estimate_at_steps(spec: &ModelSpec, path: &PathPair, checkpoints: &[usize]) -> Vec<Result<EstimateResult>> {
    if let Err(e) = check_path(path) {
        return checkpoints.iter().map(|_| Err(e.clone())).collect();
    }
    let grid = path.grid;
    sweep(path, checkpoints, |k| {
        let (t, x, y) = (grid.time(k), path.x[k], path.y[k]);
        let (f, g) = ratios(spec, t, x, y).ok_or(VolError::DegenerateVolatility { node: Some(k), t, x, y })?;
        Ok((f * (path.x[k + 1] - x), g * g))
    })
}

/// General estimator over the whole path.
pub fn estimate_theta(spec: &ModelSpec, path: &PathPair) -> Result<EstimateResult> {
    estimate_at_steps(spec, path, &[path.steps()]).remove(0)
}

/// Linear-model estimator `sum dX / (X sigma2^2) / sum h / sigma2^2`.
pub fn estimate_theta_linear(sigma2: &CoefFn, path: &PathPair) -> Result<EstimateResult> {
    check_path(path)?;
    let grid = path.grid;
    sweep(path, &[path.steps()], |k| {
        let (x, y) = (path.x[k], path.y[k]);
        let s2 = sigma2.eval(y);
        if x == 0.0 || s2 == 0.0 || !(x * s2).is_finite() {
            return Err(VolError::DegenerateVolatility { node: Some(k), t: grid.time(k), x, y });
        }
        let inv = 1.0 / (s2 * s2);
        Ok(((path.x[k + 1] - x) / x * inv, inv))
    })
    .remove(0)
}

/// `sum g dW / sum g^2 h`, i.e. `theta_hat - theta` on synthetic paths.
pub fn martingale_ratio(spec: &ModelSpec, path: &PathPair) -> Result<f64> {
    check_path(path)?;
    let dw = path.dw.as_ref().ok_or(VolError::MissingIncrements("martingale_ratio"))?;
    let grid = path.grid;
    let r = sweep(path, &[path.steps()], |k| {
        let (t, x, y) = (grid.time(k), path.x[k], path.y[k]);
        let (_, g) = ratios(spec, t, x, y).ok_or(VolError::DegenerateVolatility { node: Some(k), t, x, y })?;
        Ok((g * dw[k], g * g))
    })
    .remove(0)?;
    Ok(r.theta_hat)
}

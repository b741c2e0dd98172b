//! Euler integration of the coupled `(X, Y)` system.
//!
//! Both equations are stepped with left-point coefficients:
//!
//! ```text
//! y[k+1] = y[k] + alpha(y[k]) h + beta(y[k]) dW2[k]
//! x[k+1] = x[k] + theta a(t_k, x[k]) h + sigma1(t_k, x[k]) sigma2(y[k]) dW1[k]
//! dW2[k] = rho dW1[k] + sqrt(1 - rho^2) dW3[k]
//! ```
//!
//! CIR uses full truncation (coefficients see `max(y, 0)`, the stored path
//! holds the truncated value). GBM steps that land at or below zero are
//! clamped to [`GBM_FLOOR`]. Both events are counted in [`GuardCounts`].

pub mod noise;

use crate::error::{Result, VolError};
use crate::models::{ModelSpec, TimeGrid, VolKind};
pub use noise::{NoiseStream, LANE_X, LANE_Y};

pub const GBM_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GuardCounts {
    /// CIR steps whose raw state was negative.
    pub truncations: usize,
    /// GBM steps clamped to the floor.
    pub clamps: usize,
}

/// Synchronised trajectories on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPair {
    pub grid: TimeGrid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Increments of the driver of `X`; absent for observed data.
    pub dw: Option<Vec<f64>>,
    pub guards: GuardCounts,
}

impl PathPair {
    /// Observed-data path without driver increments.
    pub fn observed(grid: TimeGrid, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let path = PathPair { grid, x, y, dw: None, guards: GuardCounts::default() };
        path.check_lengths()?;
        Ok(path)
    }

    pub fn check_lengths(&self) -> Result<()> {
        let nodes = self.grid.steps() + 1;
        for len in [self.x.len(), self.y.len()] {
            if len != nodes {
                return Err(VolError::LengthMismatch { left: len, right: nodes });
            }
        }
        if let Some(dw) = &self.dw {
            if dw.len() != self.grid.steps() {
                return Err(VolError::LengthMismatch { left: dw.len(), right: self.grid.steps() });
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }
}

/// `n` independent `N(0, h)` increments.
pub fn wiener_increments(grid: &TimeGrid, stream: &NoiseStream) -> Vec<f64> {
    let sd = grid.step().sqrt();
    stream.normals().take(grid.steps()).map(|z| sd * z).collect()
}

/// `dw2 = rho dw1 + sqrt(1 - rho^2) dw3`.
pub fn correlate(dw1: &[f64], dw3: &[f64], rho: f64) -> Result<Vec<f64>> {
    if dw1.len() != dw3.len() {
        return Err(VolError::LengthMismatch { left: dw1.len(), right: dw3.len() });
    }
    if !(rho.abs() <= 1.0) {
        return Err(VolError::InvalidModel(format!("correlation {rho} outside [-1, 1]")));
    }
    let r = (1.0 - rho * rho).sqrt();
    Ok(dw1.iter().zip(dw3).map(|(a, b)| rho * a + r * b).collect())
}

/// Simulates one path pair. Lane [`LANE_X`] of `stream` drives `X`, lane
/// [`LANE_Y`] supplies the independent part of the driver of `Y`.
pub fn simulate_pair(spec: &ModelSpec, grid: &TimeGrid, stream: &NoiseStream) -> Result<PathPair> {
    let dw1 = wiener_increments(grid, &stream.with_lane(LANE_X));
    let dw3 = wiener_increments(grid, &stream.with_lane(LANE_Y));
    simulate_with_increments(spec, grid, dw1, &dw3)
}

/// Simulates from supplied increments: `dw1` drives `X`, `dw3` is the
/// independent part of the driver of `Y`. Both need `grid.steps()` entries.
pub fn simulate_with_increments(spec: &ModelSpec, grid: &TimeGrid, dw1: Vec<f64>, dw3: &[f64]) -> Result<PathPair> {
    if !(spec.rho.abs() <= 1.0) {
        return Err(VolError::InvalidModel(format!("correlation {} outside [-1, 1]", spec.rho)));
    }
    let n = grid.steps();
    let h = grid.step();
    if dw1.len() != n {
        return Err(VolError::LengthMismatch { left: dw1.len(), right: n });
    }
    let dw2 = correlate(&dw1, dw3, spec.rho)?;

    let alpha = spec.vol.drift_coef();
    let beta = spec.vol.diffusion_coef();
    let truncate = matches!(spec.vol.kind, VolKind::Cir { .. });
    let clamp = matches!(spec.vol.kind, VolKind::Gbm { .. });

    let mut x = Vec::with_capacity(n + 1);
    let mut y = Vec::with_capacity(n + 1);
    let mut guards = GuardCounts::default();
    let mut xk = spec.x0;
    let mut raw = spec.vol.y0;

    for k in 0..n {
        let t = grid.time(k);
        let yk = if truncate { raw.max(0.0) } else { raw };
        x.push(xk);
        y.push(yk);

        let mut next = raw + alpha.eval(yk) * h + beta.eval(yk) * dw2[k];
        if truncate && next < 0.0 {
            guards.truncations += 1;
        }
        if clamp && next <= 0.0 {
            guards.clamps += 1;
            next = GBM_FLOOR;
        }
        let x_next = xk + spec.theta * spec.drift(t, xk) * h + spec.sigma1(t, xk) * spec.sigma2(t, yk) * dw1[k];
        if !x_next.is_finite() || !next.is_finite() {
            return Err(VolError::NonFinite { step: k + 1, x: x_next, y: next });
        }
        xk = x_next;
        raw = next;
    }
    x.push(xk);
    y.push(if truncate { raw.max(0.0) } else { raw });

    Ok(PathPair { grid: *grid, x, y, dw: Some(dw1), guards })
}

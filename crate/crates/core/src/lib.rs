//! Simulation and drift estimation for scalar SDEs with multiplicative
//! stochastic volatility
//!
//! ```text
//! dX_t = theta a(t, X_t) dt + sigma1(t, X_t) sigma2(t, Y_t) dW_t
//! dY_t = alpha(Y_t) dt + beta(Y_t) dW^1_t
//! ```
//!
//! - [`models`]: coefficient catalog, volatility families, structural checks
//! - [`simulate`]: counter-based noise and the Euler integrator
//! - [`estimate`]: the maximum-likelihood estimator of `theta`
//! - [`scale`]: scale functions, boundary classification, ellipticity
//! - [`harness`]: Monte-Carlo experiments and the built-in study grid
//! - [`config`], [`io`]: key=value configuration and CSV formats

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positives
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod io;
pub mod models;
pub mod scale;
pub mod simulate;

pub use config::Config;
pub use error::{Result, VolError};
pub use estimate::{estimate_theta, estimate_theta_linear, f_g_eval, martingale_ratio, EstimateResult};
pub use harness::{run_experiment, ExperimentConfig, McSummary};
pub use models::{validate_spec, CoefFn, ModelSpec, TimeGrid, ValidationReport, VolKind, VolatilityModel};
pub use scale::{classify_a6, classify_a6_at, ellipticity_margin, scale_density, scale_function, A6Case, ScaleReport};
pub use simulate::{correlate, simulate_pair, simulate_with_increments, wiener_increments, NoiseStream, PathPair};

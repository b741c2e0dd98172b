//! Monte-Carlo experiments over many simulated paths.
//!
//! Path `i` is driven by `NoiseStream::new(master_seed, i)` and simulated
//! once to the largest horizon; shorter horizons are estimated from its
//! prefix. Paths run on the rayon pool, results are collected in path
//! order and reduced with pairwise sums, so summaries are bit-identical for
//! any worker count.

use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Result, VolError};
use crate::estimate::estimate_at_steps;
use crate::models::{validate_spec, CoefFn, ModelSpec, TimeGrid, VolKind};
use crate::scale::{classify_a6, ScaleReport};
use crate::simulate::{simulate_pair, GuardCounts, NoiseStream, PathPair};

/// Share of failed paths above which a summary is flagged.
pub const FAILURE_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub spec: ModelSpec,
    /// Strictly increasing estimation horizons.
    pub horizons: Vec<f64>,
    pub step: f64,
    pub n_paths: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(spec: ModelSpec, horizons: Vec<f64>, step: f64, n_paths: usize, master_seed: u64) -> Result<Self> {
        if n_paths < 2 {
            return Err(VolError::Config(format!("n_paths = {n_paths}, need at least 2")));
        }
        if n_paths > u32::MAX as usize {
            return Err(VolError::Config(format!("n_paths = {n_paths} exceeds the stream index range")));
        }
        if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(VolError::Config("horizons must be non-empty and strictly increasing".into()));
        }
        let cfg = ExperimentConfig { spec, horizons, step, n_paths, master_seed };
        cfg.checkpoints()?;
        Ok(cfg)
    }

    /// Grid of the longest horizon.
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(*self.horizons.last().expect("validated non-empty"), self.step)
    }

    /// Step counts of the horizons.
    pub fn checkpoints(&self) -> Result<Vec<usize>> {
        self.horizons.iter().map(|&t| TimeGrid::new(t, self.step).map(|g| g.steps())).collect()
    }

    pub fn stream(&self, path_index: usize) -> NoiseStream {
        NoiseStream::new(self.master_seed, path_index as u32)
    }

    pub fn simulate_path(&self, path_index: usize) -> Result<PathPair> {
        simulate_pair(&self.spec, &self.grid()?, &self.stream(path_index))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizonSummary {
    pub horizon: f64,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); zero when only one
    /// path succeeded.
    pub std: f64,
    pub n_ok: usize,
    pub n_fail: usize,
    /// Median of `|theta_hat - theta|` over successful paths.
    pub median_abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSummary {
    pub horizons: Vec<HorizonSummary>,
    pub n_paths: usize,
    /// Positivity guard activations summed over all paths.
    pub guards: GuardCounts,
    /// More than [`FAILURE_THRESHOLD`] of the paths failed at some horizon.
    pub flagged: bool,
    /// First failure in path order, for diagnostics.
    pub first_failure: Option<String>,
    /// Boundary classification of the configuration.
    pub scale: ScaleReport,
}

struct PathOutcome {
    estimates: Vec<std::result::Result<f64, VolError>>,
    guards: GuardCounts,
}

fn run_path(cfg: &ExperimentConfig, grid: &TimeGrid, checkpoints: &[usize], i: usize) -> PathOutcome {
    match simulate_pair(&cfg.spec, grid, &cfg.stream(i)) {
        Ok(path) => PathOutcome {
            estimates: estimate_at_steps(&cfg.spec, &path, checkpoints)
                .into_iter()
                .map(|r| r.map(|e| e.theta_hat))
                .collect(),
            guards: path.guards,
        },
        Err(e) => PathOutcome { estimates: vec![Err(e); checkpoints.len()], guards: GuardCounts::default() },
    }
}

/// Sum with `O(log n)` error growth and a fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Median of a non-empty slice.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn summarize(horizon: f64, theta: f64, values: &[f64], n_fail: usize) -> HorizonSummary {
    let n = values.len();
    let mean = pairwise_sum(values) / n as f64;
    let std = if n > 1 {
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&sq) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let errors: Vec<f64> = values.iter().map(|v| (v - theta).abs()).collect();
    HorizonSummary { horizon, mean, std, n_ok: n, n_fail, median_abs_error: median(&errors) }
}

/// Simulates every path to the largest horizon and summarizes the
/// estimates at each horizon. Fails when the structural checks fail or
/// when no path survives at some horizon.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<McSummary> {
    let report = validate_spec(&cfg.spec);
    if let Some(c) = report.failed().next() {
        return Err(VolError::Experiment(format!("structural check {} failed: {}", c.name, c.detail)));
    }
    let scale = classify_a6(&cfg.spec.vol, &cfg.spec.sigma2);
    let grid = cfg.grid()?;
    let checkpoints = cfg.checkpoints()?;

    let outcomes: Vec<PathOutcome> =
        (0..cfg.n_paths).into_par_iter().map(|i| run_path(cfg, &grid, &checkpoints, i)).collect();

    let mut guards = GuardCounts::default();
    let mut first_failure = None;
    for (i, o) in outcomes.iter().enumerate() {
        guards.truncations += o.guards.truncations;
        guards.clamps += o.guards.clamps;
        if first_failure.is_none() {
            if let Some(e) = o.estimates.iter().find_map(|r| r.as_ref().err()) {
                first_failure = Some(format!("path {i}: {e}"));
            }
        }
    }

    let mut horizons = Vec::with_capacity(cfg.horizons.len());
    for (j, &t) in cfg.horizons.iter().enumerate() {
        let values: Vec<f64> = outcomes.iter().filter_map(|o| o.estimates[j].as_ref().ok().copied()).collect();
        let n_fail = cfg.n_paths - values.len();
        if values.is_empty() {
            return Err(VolError::Experiment(format!(
                "all {} paths failed at T = {t}; {}",
                cfg.n_paths,
                first_failure.as_deref().unwrap_or("no diagnostics")
            )));
        }
        horizons.push(summarize(t, cfg.spec.theta, &values, n_fail));
    }
    let flagged = horizons.iter().any(|s| s.n_fail as f64 > FAILURE_THRESHOLD * cfg.n_paths as f64);
    Ok(McSummary { horizons, n_paths: cfg.n_paths, guards, flagged, first_failure, scale })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub horizon: f64,
    pub median_abs_error: f64,
}

impl McSummary {
    /// Median absolute estimation error per horizon, in ascending `T`.
    pub fn curve(&self) -> Vec<CurvePoint> {
        self.horizons.iter().map(|s| CurvePoint { horizon: s.horizon, median_abs_error: s.median_abs_error }).collect()
    }
}

/// Median absolute estimation error per horizon, in ascending `T`.
pub fn consistency_curve(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    Ok(run_experiment(cfg)?.curve())
}

/// Runs `f` on a pool of `workers` threads; `0` uses the global pool.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| VolError::Experiment(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// One of the built-in study configurations: a linear model
/// `dX = theta X dt + X sigma2(Y) dW` with the given volatility family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyRow {
    pub id: usize,
    pub vol: VolKind,
    pub sigma2: CoefFn,
}

impl StudyRow {
    /// `base` with this row's volatility family and `sigma2`, and the
    /// linear drift and diffusion.
    pub fn config(&self, base: &Config) -> Config {
        Config { a: CoefFn::IDENTITY, sigma1: CoefFn::IDENTITY, sigma2: self.sigma2, vol: self.vol, ..base.clone() }
    }
}

/// The seven built-in configurations of the `table1` sweep.
pub fn table1_rows() -> [StudyRow; 7] {
    use CoefFn::*;
    use VolKind::*;
    [
        StudyRow { id: 1, vol: Bachelier { alpha: 1.0, beta: 1.0 }, sigma2: Power { c: 1.0, p: 0.25 } },
        StudyRow { id: 2, vol: Gbm { alpha: 1.0, beta: 2.0 }, sigma2: SqrtY { c: 1.0 } },
        StudyRow { id: 3, vol: Gbm { alpha: 1.0, beta: 1.0 }, sigma2: Reciprocal1p { c: 1.0 } },
        // alpha(y) = y, beta = 1
        StudyRow { id: 4, vol: Vasicek { a: -1.0, b: 0.0, gamma: 1.0 }, sigma2: SinShift { c: 2.0, d: 1.0 } },
        // alpha(y) = -y, beta = 1
        StudyRow { id: 5, vol: Vasicek { a: 1.0, b: 0.0, gamma: 1.0 }, sigma2: SinShift { c: 2.0, d: 1.0 } },
        StudyRow { id: 6, vol: Cir { a: 1.0, b: 2.0, gamma: 1.0 }, sigma2: SqrtY { c: 1.0 } },
        StudyRow { id: 7, vol: Cir { a: 1.0, b: 2.0, gamma: 1.0 }, sigma2: Linear { m: 1.0, b: 0.0 } },
    ]
}

/// One output line of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Table1Record {
    pub config_id: usize,
    pub alpha: String,
    pub beta: String,
    pub sigma2: String,
    pub horizon: f64,
    pub mean: f64,
    pub std: f64,
    pub n_ok: usize,
    pub n_fail: usize,
}

/// Summary of one built-in configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub row: StudyRow,
    pub summary: McSummary,
}

impl StudyResult {
    pub fn records(&self) -> Vec<Table1Record> {
        let vol = crate::models::VolatilityModel { kind: self.row.vol, y0: 0.0 };
        self.summary
            .horizons
            .iter()
            .map(|s| Table1Record {
                config_id: self.row.id,
                alpha: vol.drift_coef().to_string(),
                beta: vol.diffusion_coef().to_string(),
                sigma2: self.row.sigma2.to_string(),
                horizon: s.horizon,
                mean: s.mean,
                std: s.std,
                n_ok: s.n_ok,
                n_fail: s.n_fail,
            })
            .collect()
    }
}

/// Runs every built-in configuration with the remaining settings
/// (`theta`, `x0`, `y0`, `rho`, `h`, horizons, `n_paths`, `seed`) taken from
/// `base`. All rows share the master seed.
pub fn run_table1(base: &Config) -> Result<Vec<StudyResult>> {
    table1_rows()
        .into_iter()
        .map(|row| {
            let summary = run_experiment(&row.config(base).experiment()?)?;
            Ok(StudyResult { row, summary })
        })
        .collect()
}

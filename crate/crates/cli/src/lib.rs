//! `volest` command-line front end.
//!
//! Every subcommand reads the flat key=value config (`--config FILE`),
//! applies `--set key=value` overrides and `--seed`, and writes its result
//! to stdout or, with `--out DIR`, to a fixed file name in `DIR`. Outputs
//! start with `#` comment lines echoing the resolved configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 a
//! failed `check`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use volest_core::config::Config;
use volest_core::estimate::estimate_theta;
use volest_core::harness::{self, run_experiment, run_table1, McSummary};
use volest_core::io;
use volest_core::models::{validate_spec, TimeGrid};
use volest_core::scale::{classify_a6_at, scale_density, scale_function};
use volest_core::simulate::{simulate_pair, NoiseStream};
use volest_core::VolError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

/// Environment variable capping the worker count (`0` = all cores).
pub const THREADS_VAR: &str = "VOLEST_THREADS";

const ESTIMATOR_NOTE: &str = "estimator: left-point sums of f dX and g^2 h on the simulation grid";
const NESTING_NOTE: &str = "horizons: one path per seed, shorter horizons estimated from its prefix";

#[derive(Debug, Parser)]
#[command(name = "volest", version, about = "Simulate and estimate drift in SDEs with stochastic volatility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Config file of key=value lines.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a config key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Directory to write outputs into instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path pair to the largest horizon and dump it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Path index within the seed's family of streams.
        #[arg(long, default_value_t = 0)]
        path: u32,
    },
    /// Estimate theta from a path CSV (`t,x,y[,dw]`).
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Path CSV to read.
        #[arg(long, short)]
        input: PathBuf,
    },
    /// Report the scale function and boundary classification of the volatility model.
    Scale {
        #[command(flatten)]
        common: Common,
        /// Reference point of the scale function; defaults to the family's.
        #[arg(long)]
        c: Option<f64>,
        /// Also emit this many (y, rho, s) samples on [c, c + 5].
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the structural checks and the boundary classification.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo sweep over the seven built-in configurations.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Median absolute estimation error per horizon.
    Curve {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate { common, .. }
            | Command::Estimate { common, .. }
            | Command::Scale { common, .. }
            | Command::Check { common }
            | Command::Table1 { common }
            | Command::Curve { common } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Estimate { .. } => "estimate",
            Command::Scale { .. } => "scale",
            Command::Check { .. } => "check",
            Command::Table1 { .. } => "table1",
            Command::Curve { .. } => "curve",
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<VolError> for Failure {
    fn from(e: VolError) -> Self {
        let code = match e {
            VolError::Config(_)
            | VolError::Parse { .. }
            | VolError::InvalidModel(_)
            | VolError::InvalidGrid(_)
            | VolError::Domain { .. }
            | VolError::Io(_) => EXIT_CONFIG,
            _ => EXIT_NUMERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

fn config_error(message: String) -> Failure {
    Failure { code: EXIT_CONFIG, message }
}

type Outcome = Result<i32, Failure>;

fn resolve(common: &Common) -> Result<Config, Failure> {
    let text = match &common.config {
        Some(p) => fs::read_to_string(p).map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = common.set.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    Ok(Config::parse_with_overrides(&text, &overrides)?)
}

fn workers() -> Result<usize, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map_err(|_| config_error(format!("{THREADS_VAR}=`{v}` is not a non-negative integer")))
        }
        _ => Ok(0),
    }
}

fn header(command: &str, cfg: &Config, notes: &[&str]) -> String {
    let mut h = format!("# volest {command}\n");
    for n in notes {
        h.push_str(&format!("# {n}\n"));
    }
    h.push_str(&cfg.header());
    h
}

/// Writes `bytes` to `dir/name` or to stdout.
fn emit(out: &Option<PathBuf>, name: &str, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    let io_err = |p: &Path, e: std::io::Error| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", p.display()) };
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| io_err(&path, e))
        }
        None => stdout.write_all(bytes).map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn flagged_exit(summary: &McSummary, stderr: &mut dyn Write) -> i32 {
    if summary.flagged {
        let _ = writeln!(
            stderr,
            "warning: more than {:.0}% of paths failed; first failure: {}",
            harness::FAILURE_THRESHOLD * 100.0,
            summary.first_failure.as_deref().unwrap_or("unknown")
        );
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}

fn guard_note(summary: &McSummary) -> String {
    format!(
        "guards: {} truncations, {} clamps; a6_case: {}",
        summary.guards.truncations, summary.guards.clamps, summary.scale.a6_case
    )
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let command = &cli.command;
    let common = command.common();
    let cfg = resolve(common)?;
    let name = command.name();
    match command {
        Command::Simulate { path, .. } => {
            let grid = TimeGrid::new(cfg.horizon(), cfg.step)?;
            let pair = simulate_pair(&cfg.spec()?, &grid, &NoiseStream::new(cfg.seed, *path))?;
            let note =
                format!("path: {path}; guards: {} truncations, {} clamps", pair.guards.truncations, pair.guards.clamps);
            let mut buf = Vec::new();
            io::write_path_csv(&mut buf, &pair, &header(name, &cfg, &[&note]))?;
            emit(&common.out, "path.csv", &buf, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Estimate { input, .. } => {
            let file = fs::File::open(input).map_err(|e| config_error(format!("{}: {e}", input.display())))?;
            let pair = io::read_path_csv(file)?;
            let spec = cfg.spec()?;
            let est = estimate_theta(&spec, &pair)?;
            let mut buf = Vec::new();
            io::write_estimate_csv(&mut buf, &[est], &header(name, &cfg, &[ESTIMATOR_NOTE]))?;
            emit(&common.out, "estimate.csv", &buf, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Scale { c, samples, .. } => {
            let vol = cfg.volatility()?;
            let c = c.unwrap_or_else(|| vol.default_reference());
            let report = classify_a6_at(&vol, &cfg.sigma2, c)?;
            let text = format!("{}{report}", header(name, &cfg, &[]));
            emit(&common.out, "scale.txt", text.as_bytes(), stdout)?;
            if let Some(n) = *samples {
                let dom = vol.domain();
                let hi = (c + 5.0).min(dom.upper);
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    let y = if n == 1 { c } else { c + (hi - c) * i as f64 / (n - 1) as f64 };
                    if !dom.contains(y) {
                        continue;
                    }
                    rows.push((y, scale_density(&vol, c, y)?, scale_function(&vol, c, y)?));
                }
                let mut buf = Vec::new();
                io::write_scale_samples_csv(&mut buf, &rows, "")?;
                emit(&common.out, "scale_samples.csv", &buf, stdout)?;
            }
            Ok(EXIT_OK)
        }
        Command::Check { .. } => {
            let spec = cfg.spec()?;
            let report = validate_spec(&spec);
            let scale = classify_a6_at(&spec.vol, &spec.sigma2, spec.vol.default_reference())?;
            let mut text = header(name, &cfg, &[]);
            let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &report.checks {
                let verdict = if c.satisfied { "ok" } else { "FAILED" };
                text.push_str(&format!("{:width$}  {verdict:6}  {}\n", c.name, c.detail));
            }
            text.push_str(&scale.to_string());
            emit(&common.out, "check.txt", text.as_bytes(), stdout)?;
            if report.all_satisfied() && scale.consistency_guaranteed {
                Ok(EXIT_OK)
            } else {
                let failed: Vec<&str> = report.failed().map(|c| c.name).collect();
                let _ = writeln!(stderr, "check failed: structural [{}], a6_case {}", failed.join(", "), scale.a6_case);
                Ok(EXIT_CHECK)
            }
        }
        Command::Table1 { .. } => {
            let results = harness::with_workers(workers()?, || run_table1(&cfg))??;
            let records: Vec<_> = results.iter().flat_map(|r| r.records()).collect();
            let mut notes = vec![
                ESTIMATOR_NOTE.to_string(),
                NESTING_NOTE.to_string(),
                "rows replace a, sigma1, sigma2 and vol.* below with their built-in values".to_string(),
            ];
            for r in &results {
                notes.push(format!("config {}: {}", r.row.id, guard_note(&r.summary)));
            }
            let notes: Vec<&str> = notes.iter().map(String::as_str).collect();
            let mut buf = Vec::new();
            io::write_table1_csv(&mut buf, &records, &header(name, &cfg, &notes))?;
            emit(&common.out, "table1.csv", &buf, stdout)?;
            Ok(results.iter().map(|r| flagged_exit(&r.summary, stderr)).max().unwrap_or(EXIT_OK))
        }
        Command::Curve { .. } => {
            let exp = cfg.experiment()?;
            let summary = harness::with_workers(workers()?, || run_experiment(&exp))??;
            let points = summary.curve();
            let note = guard_note(&summary);
            let mut buf = Vec::new();
            io::write_curve_csv(&mut buf, &points, &header(name, &cfg, &[ESTIMATOR_NOTE, NESTING_NOTE, &note]))?;
            emit(&common.out, "curve.csv", &buf, stdout)?;
            Ok(flagged_exit(&summary, stderr))
        }
    }
}

/// Parses `args` (including the program name), runs the subcommand, and
/// returns the process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

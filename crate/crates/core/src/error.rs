use thiserror::Error;

pub type Result<T, E = VolError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("{what} = {value} lies outside the state domain {domain}")]
    Domain { what: &'static str, value: f64, domain: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite state at step {step}: x = {x}, y = {y}")]
    NonFinite { step: usize, x: f64, y: f64 },

    #[error("degenerate volatility{} (t = {t}, x = {x}, y = {y}): sigma1*sigma2 = 0", node_suffix(*.node))]
    DegenerateVolatility { node: Option<usize>, t: f64, x: f64, y: f64 },

    #[error("no information: quadratic variation is {denominator} after {n_used} steps")]
    NoInformation { denominator: f64, n_used: usize },

    #[error("estimator overflow after {n_used} steps: numerator {numerator}, denominator {denominator}")]
    NonFiniteEstimate { numerator: f64, denominator: f64, n_used: usize },

    #[error("{0} requires the simulated Wiener increments, which observed paths do not carry")]
    MissingIncrements(&'static str),

    #[error("degenerate correlation: |rho| = {0} must be < 1")]
    DegenerateCorrelation(f64),

    #[error("quadrature did not reach tolerance on [{a}, {b}]: estimate {estimate}, error {error:e}")]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("io error: {0}")]
    Io(String),
}

fn node_suffix(node: Option<usize>) -> String {
    node.map(|k| format!(" at node {k}")).unwrap_or_default()
}

impl From<std::io::Error> for VolError {
    fn from(e: std::io::Error) -> Self {
        VolError::Io(e.to_string())
    }
}

impl From<csv::Error> for VolError {
    fn from(e: csv::Error) -> Self {
        VolError::Io(e.to_string())
    }
}

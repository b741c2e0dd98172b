//! Coefficient catalog, volatility diffusions and the coupled model
//!
//! ```text
//! dX_t = theta * a(t, X_t) dt + sigma1(t, X_t) * sigma2(t, Y_t) dW_t
//! dY_t = alpha(Y_t) dt + beta(Y_t) dW^1_t,      d<W, W^1>_t = rho dt
//! ```
//!
//! Coefficients come from a closed catalog ([`CoefFn`]) so that boundary
//! integrability questions can be answered from symbolic tail data instead
//! of numerics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, VolError};
use crate::scale::{self, Side};

/// Open interval `(lower, upper)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    pub const POSITIVE: Domain = Domain { lower: 0.0, upper: f64::INFINITY };

    pub fn contains(&self, y: f64) -> bool {
        self.lower < y && y < self.upper
    }

    /// Closure membership, infinite endpoints included.
    pub fn contains_closed(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                v.to_string()
            }
        };
        write!(f, "({}, {})", end(self.lower), end(self.upper))
    }
}

/// Boundary point approached by a tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    PosInf,
    NegInf,
    /// `y -> 0+`, the left end of the positive half-line.
    ZeroPlus,
}

/// Asymptotic size of `|f(y)|` near a boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// `|f(y)|` is bounded above and below by constant multiples of `|y|^p`.
    Power(f64),
    /// `|f(y)|` stays within `[m, M]` for some `0 < m <= M < inf`.
    BoundedAwayFromZero,
}

impl Tail {
    pub fn exponent(self) -> f64 {
        match self {
            Tail::Power(p) => p,
            Tail::BoundedAwayFromZero => 0.0,
        }
    }
}

/// Closed catalog of scalar coefficient functions of one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefFn {
    /// `c`
    Constant { c: f64 },
    /// `m*y + b`
    Linear { m: f64, b: f64 },
    /// `c*|y|^p`
    Power { c: f64, p: f64 },
    /// `c*sqrt(|y|)`
    SqrtAbs { c: f64 },
    /// `c/(1 + y)`
    Reciprocal1p { c: f64 },
    /// `c + d*sin(y)`
    SinShift { c: f64, d: f64 },
    /// `a*(b - y)`
    AffineMeanRev { a: f64, b: f64 },
    /// `c*sqrt(y)`, defined for `y >= 0` only
    SqrtY { c: f64 },
}

impl CoefFn {
    pub const IDENTITY: CoefFn = CoefFn::Linear { m: 1.0, b: 0.0 };
    pub const ONE: CoefFn = CoefFn::Constant { c: 1.0 };

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            CoefFn::Constant { c } => c,
            CoefFn::Linear { m, b } => m * y + b,
            CoefFn::Power { c, p } => c * y.abs().powf(p),
            CoefFn::SqrtAbs { c } => c * y.abs().sqrt(),
            CoefFn::Reciprocal1p { c } => c / (1.0 + y),
            CoefFn::SinShift { c, d } => c + d * y.sin(),
            CoefFn::AffineMeanRev { a, b } => a * (b - y),
            CoefFn::SqrtY { c } => c * y.sqrt(),
        }
    }

    /// Whether every value of `domain` is a valid argument.
    pub fn defined_on(&self, domain: Domain) -> bool {
        match *self {
            CoefFn::SqrtY { .. } => domain.lower >= 0.0,
            _ => true,
        }
    }

    /// Bounded on every compact subset of `domain`.
    pub fn locally_bounded_on(&self, domain: Domain) -> bool {
        match *self {
            CoefFn::Power { p, .. } if p < 0.0 => !domain.contains(0.0),
            CoefFn::Reciprocal1p { .. } => !domain.contains(-1.0),
            _ => self.defined_on(domain),
        }
    }

    /// Whether `f^{-2}` is integrable on every compact subset of `domain`,
    /// decided from the location and order of zeros.
    pub fn inverse_square_locally_integrable_on(&self, domain: Domain) -> bool {
        if !self.defined_on(domain) {
            return false;
        }
        match *self {
            CoefFn::Constant { c } => c != 0.0,
            CoefFn::Linear { m, b } => {
                if m == 0.0 {
                    b != 0.0
                } else {
                    !domain.contains(-b / m)
                }
            }
            CoefFn::AffineMeanRev { a, b } => a != 0.0 && !domain.contains(b),
            // zero of order p at the origin
            CoefFn::Power { c, p } => c != 0.0 && (p <= 0.0 || 2.0 * p < 1.0 || !domain.contains(0.0)),
            CoefFn::SqrtAbs { c } => c != 0.0 && !domain.contains(0.0),
            CoefFn::Reciprocal1p { c } => c != 0.0,
            // |c| <= |d| gives periodic zeros, present in every unbounded domain
            CoefFn::SinShift { c, d } => c.abs() > d.abs(),
            CoefFn::SqrtY { c } => c != 0.0,
        }
    }

    /// Symbolic asymptotics of `|f|` at a boundary. `None` when the catalog
    /// member has no power-law description there (oscillating zeros,
    /// identically zero, undefined).
    pub fn tail(&self, at: Boundary) -> Option<Tail> {
        use Boundary::*;
        let power = |p: f64| {
            if p == 0.0 {
                Tail::BoundedAwayFromZero
            } else {
                Tail::Power(p)
            }
        };
        let linear = |m: f64, b: f64| match at {
            PosInf | NegInf if m != 0.0 => Some(Tail::Power(1.0)),
            PosInf | NegInf if b != 0.0 => Some(Tail::BoundedAwayFromZero),
            ZeroPlus if b != 0.0 => Some(Tail::BoundedAwayFromZero),
            ZeroPlus if m != 0.0 => Some(Tail::Power(1.0)),
            _ => None,
        };
        match *self {
            CoefFn::Constant { c } => (c != 0.0).then_some(Tail::BoundedAwayFromZero),
            CoefFn::Linear { m, b } => linear(m, b),
            CoefFn::AffineMeanRev { a, b } => linear(-a, a * b),
            CoefFn::Power { c, p } => (c != 0.0).then(|| power(p)),
            CoefFn::SqrtAbs { c } => (c != 0.0).then_some(Tail::Power(0.5)),
            CoefFn::Reciprocal1p { c } => match (c != 0.0, at) {
                (false, _) => None,
                (true, ZeroPlus) => Some(Tail::BoundedAwayFromZero),
                (true, _) => Some(Tail::Power(-1.0)),
            },
            CoefFn::SinShift { c, d } => {
                if c.abs() > d.abs() || (at == ZeroPlus && c != 0.0) {
                    Some(Tail::BoundedAwayFromZero)
                } else if at == ZeroPlus && d != 0.0 {
                    // sin y ~ y
                    Some(Tail::Power(1.0))
                } else {
                    None
                }
            }
            CoefFn::SqrtY { c } => match (c != 0.0, at) {
                (true, PosInf | ZeroPlus) => Some(Tail::Power(0.5)),
                _ => None,
            },
        }
    }

    fn name(&self) -> &'static str {
        match self {
            CoefFn::Constant { .. } => "const",
            CoefFn::Linear { .. } => "linear",
            CoefFn::Power { .. } => "power",
            CoefFn::SqrtAbs { .. } => "sqrt_abs",
            CoefFn::Reciprocal1p { .. } => "recip1p",
            CoefFn::SinShift { .. } => "sin_shift",
            CoefFn::AffineMeanRev { .. } => "mean_rev",
            CoefFn::SqrtY { .. } => "sqrt_y",
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            CoefFn::Constant { c } | CoefFn::SqrtAbs { c } | CoefFn::Reciprocal1p { c } | CoefFn::SqrtY { c } => {
                vec![c]
            }
            CoefFn::Linear { m, b } => vec![m, b],
            CoefFn::Power { c, p } => vec![c, p],
            CoefFn::SinShift { c, d } => vec![c, d],
            CoefFn::AffineMeanRev { a, b } => vec![a, b],
        }
    }
}

impl fmt::Display for CoefFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.name(), params.join(","))
    }
}

impl FromStr for CoefFn {
    type Err = VolError;

    /// Parses `kind(p1,p2,...)`, e.g. `power(1,0.25)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| VolError::Config(format!("coefficient `{s}`: {msg}"));
        let open = s.find('(').ok_or_else(|| bad("expected kind(params)"))?;
        if !s.ends_with(')') {
            return Err(bad("missing closing parenthesis"));
        }
        let kind = s[..open].trim();
        let inner = &s[open + 1..s.len() - 1];
        let params = parse_list(inner).map_err(|e| bad(&e))?;
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("{kind} takes {n} parameter(s), got {}", params.len())))
            }
        };
        let coef = match kind {
            "const" | "constant" => {
                want(1)?;
                CoefFn::Constant { c: params[0] }
            }
            "linear" => {
                want(2)?;
                CoefFn::Linear { m: params[0], b: params[1] }
            }
            "power" => {
                want(2)?;
                CoefFn::Power { c: params[0], p: params[1] }
            }
            "sqrt_abs" => {
                want(1)?;
                CoefFn::SqrtAbs { c: params[0] }
            }
            "recip1p" => {
                want(1)?;
                CoefFn::Reciprocal1p { c: params[0] }
            }
            "sin_shift" => {
                want(2)?;
                CoefFn::SinShift { c: params[0], d: params[1] }
            }
            "mean_rev" => {
                want(2)?;
                CoefFn::AffineMeanRev { a: params[0], b: params[1] }
            }
            "sqrt_y" => {
                want(1)?;
                CoefFn::SqrtY { c: params[0] }
            }
            other => return Err(bad(&format!("unknown coefficient kind `{other}`"))),
        };
        if coef.params().iter().any(|p| !p.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        Ok(coef)
    }
}

/// Comma-separated list of reals; empty input is an empty list.
pub(crate) fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim()))).collect()
}

/// Parametric families for the volatility driver `Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VolKind {
    /// `dY = alpha dt + beta dW`
    Bachelier { alpha: f64, beta: f64 },
    /// `dY = a(b - Y) dt + gamma dW`
    Vasicek { a: f64, b: f64, gamma: f64 },
    /// `dY = alpha Y dt + beta Y dW`
    Gbm { alpha: f64, beta: f64 },
    /// `dY = a(b - Y) dt + gamma sqrt(Y) dW`
    Cir { a: f64, b: f64, gamma: f64 },
}

impl VolKind {
    pub fn name(&self) -> &'static str {
        match self {
            VolKind::Bachelier { .. } => "bachelier",
            VolKind::Vasicek { .. } => "vasicek",
            VolKind::Gbm { .. } => "gbm",
            VolKind::Cir { .. } => "cir",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            VolKind::Bachelier { alpha, beta } | VolKind::Gbm { alpha, beta } => vec![alpha, beta],
            VolKind::Vasicek { a, b, gamma } | VolKind::Cir { a, b, gamma } => vec![a, b, gamma],
        }
    }

    pub fn from_parts(kind: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(VolError::Config(format!("vol.kind={kind} takes {n} parameters, got {}", params.len())))
            }
        };
        Ok(match kind.trim() {
            "bachelier" => {
                want(2)?;
                VolKind::Bachelier { alpha: params[0], beta: params[1] }
            }
            "vasicek" | "ou" => {
                want(3)?;
                VolKind::Vasicek { a: params[0], b: params[1], gamma: params[2] }
            }
            "gbm" => {
                want(2)?;
                VolKind::Gbm { alpha: params[0], beta: params[1] }
            }
            "cir" => {
                want(3)?;
                VolKind::Cir { a: params[0], b: params[1], gamma: params[2] }
            }
            other => return Err(VolError::Config(format!("unknown vol.kind `{other}`"))),
        })
    }

    pub fn domain(&self) -> Domain {
        match self {
            VolKind::Bachelier { .. } | VolKind::Vasicek { .. } => Domain::REAL_LINE,
            VolKind::Gbm { .. } | VolKind::Cir { .. } => Domain::POSITIVE,
        }
    }
}

/// The volatility diffusion together with its starting point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolatilityModel {
    pub kind: VolKind,
    pub y0: f64,
}

impl VolatilityModel {
    /// Checked constructor: rejects parameter sets that violate the family's
    /// constraints (including the Feller condition for CIR) and starting
    /// points outside the domain.
    pub fn new(kind: VolKind, y0: f64) -> Result<Self> {
        let vol = VolatilityModel { kind, y0 };
        if let Some(c) = vol.structural_checks().into_iter().find(|c| !c.satisfied) {
            return Err(VolError::InvalidModel(format!("{}: {}", c.name, c.detail)));
        }
        Ok(vol)
    }

    pub fn bachelier(alpha: f64, beta: f64, y0: f64) -> Result<Self> {
        Self::new(VolKind::Bachelier { alpha, beta }, y0)
    }

    pub fn vasicek(a: f64, b: f64, gamma: f64, y0: f64) -> Result<Self> {
        Self::new(VolKind::Vasicek { a, b, gamma }, y0)
    }

    pub fn gbm(alpha: f64, beta: f64, y0: f64) -> Result<Self> {
        Self::new(VolKind::Gbm { alpha, beta }, y0)
    }

    pub fn cir(a: f64, b: f64, gamma: f64, y0: f64) -> Result<Self> {
        Self::new(VolKind::Cir { a, b, gamma }, y0)
    }

    pub fn domain(&self) -> Domain {
        self.kind.domain()
    }

    pub fn is_positive(&self) -> bool {
        self.domain() == Domain::POSITIVE
    }

    /// Drift `alpha(y)` as a catalog member.
    pub fn drift_coef(&self) -> CoefFn {
        match self.kind {
            VolKind::Bachelier { alpha, .. } => CoefFn::Constant { c: alpha },
            VolKind::Vasicek { a, b, .. } | VolKind::Cir { a, b, .. } => CoefFn::AffineMeanRev { a, b },
            VolKind::Gbm { alpha, .. } => CoefFn::Linear { m: alpha, b: 0.0 },
        }
    }

    /// Diffusion `beta(y)` as a catalog member.
    pub fn diffusion_coef(&self) -> CoefFn {
        match self.kind {
            VolKind::Bachelier { beta, .. } => CoefFn::Constant { c: beta },
            VolKind::Vasicek { gamma, .. } => CoefFn::Constant { c: gamma },
            VolKind::Gbm { beta, .. } => CoefFn::Linear { m: beta, b: 0.0 },
            VolKind::Cir { gamma, .. } => CoefFn::SqrtY { c: gamma },
        }
    }

    #[inline]
    pub fn alpha(&self, y: f64) -> f64 {
        self.drift_coef().eval(y)
    }

    #[inline]
    pub fn beta(&self, y: f64) -> f64 {
        self.diffusion_coef().eval(y)
    }

    /// Default reference point of the scale function: 0 for Bachelier,
    /// `b` for Vasicek and CIR, 1 for GBM.
    pub fn default_reference(&self) -> f64 {
        match self.kind {
            VolKind::Bachelier { .. } => 0.0,
            VolKind::Vasicek { b, .. } | VolKind::Cir { b, .. } => b,
            VolKind::Gbm { .. } => 1.0,
        }
    }

    /// Parameter, Feller, domain and non-degeneracy checks for the driver alone.
    pub fn structural_checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let finite = self.kind.params().iter().all(|p| p.is_finite()) && self.y0.is_finite();
        let (params_ok, detail) = match self.kind {
            VolKind::Bachelier { beta, .. } | VolKind::Gbm { beta, .. } => {
                (beta != 0.0, "beta must be nonzero".to_string())
            }
            VolKind::Vasicek { gamma, .. } => (gamma > 0.0, "gamma must be positive".to_string()),
            VolKind::Cir { a, b, gamma } => {
                (a > 0.0 && b > 0.0 && gamma > 0.0, "a, b, gamma must be positive".to_string())
            }
        };
        out.push(Check::new(
            "vol_parameters",
            finite && params_ok,
            format!("{} {:?}: {}", self.kind.name(), self.kind.params(), detail),
        ));
        if let VolKind::Cir { a, b, gamma } = self.kind {
            out.push(Check::new(
                "feller",
                2.0 * a * b >= gamma * gamma,
                format!("2ab = {} vs gamma^2 = {}", 2.0 * a * b, gamma * gamma),
            ));
        }
        out.push(Check::new(
            "y0_in_domain",
            self.domain().contains(self.y0),
            format!("y0 = {} in {}", self.y0, self.domain()),
        ));
        // beta(y) != 0 on J: constant or linear-through-origin on (0, inf)
        let beta_ok = match self.kind {
            VolKind::Bachelier { beta, .. } | VolKind::Gbm { beta, .. } => beta != 0.0,
            VolKind::Vasicek { gamma, .. } | VolKind::Cir { gamma, .. } => gamma != 0.0,
        };
        out.push(Check::new(
            "beta_nonvanishing",
            beta_ok,
            format!("beta = {} on {}", self.diffusion_coef(), self.domain()),
        ));
        out
    }
}

/// The full coupled system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    /// Drift parameter; only used to simulate.
    pub theta: f64,
    pub a: CoefFn,
    pub sigma1: CoefFn,
    pub sigma2: CoefFn,
    pub vol: VolatilityModel,
    pub x0: f64,
    /// Correlation between the drivers of `X` and `Y`.
    pub rho: f64,
}

impl ModelSpec {
    /// `dX = theta X dt + X sigma2(Y) dW`.
    pub fn linear(theta: f64, sigma2: CoefFn, vol: VolatilityModel, x0: f64, rho: f64) -> Self {
        ModelSpec { theta, a: CoefFn::IDENTITY, sigma1: CoefFn::IDENTITY, sigma2, vol, x0, rho }
    }

    pub fn is_linear(&self) -> bool {
        self.a == CoefFn::IDENTITY && self.sigma1 == CoefFn::IDENTITY
    }

    // Coefficients are time-homogeneous; `t` is kept in the signatures.
    #[inline]
    pub fn drift(&self, _t: f64, x: f64) -> f64 {
        self.a.eval(x)
    }

    #[inline]
    pub fn sigma1(&self, _t: f64, x: f64) -> f64 {
        self.sigma1.eval(x)
    }

    #[inline]
    pub fn sigma2(&self, _t: f64, y: f64) -> f64 {
        self.sigma2.eval(y)
    }
}

/// Uniform grid `t_k = k*h`, `k = 0..=n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    step: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(VolError::InvalidGrid(format!("step h = {step} must be positive")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(VolError::InvalidGrid(format!("horizon T = {horizon} must be positive")));
        }
        let ratio = horizon / step;
        let n = ratio.round();
        if n < 1.0 || n > u32::MAX as f64 {
            return Err(VolError::InvalidGrid(format!("T/h = {ratio} steps is out of range")));
        }
        if (n * step - horizon).abs() > 1e-9 * horizon {
            return Err(VolError::InvalidGrid(format!("step h = {step} does not divide horizon T = {horizon}")));
        }
        Ok(TimeGrid { horizon, step, n: n as usize })
    }

    pub fn from_steps(n: usize, step: f64) -> Result<Self> {
        if n == 0 {
            return Err(VolError::InvalidGrid("need at least one step".into()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(VolError::InvalidGrid(format!("step h = {step} must be positive")));
        }
        Ok(TimeGrid { horizon: n as f64 * step, step, n })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// Grid of the first `n` steps.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.n {
            return Err(VolError::InvalidGrid(format!("prefix of {n} steps exceeds {}", self.n)));
        }
        Self::from_steps(n, self.step)
    }
}

/// One structural assumption and whether it holds.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub satisfied: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, satisfied: bool, detail: String) -> Self {
        Check { name, satisfied, detail }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.satisfied)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Structural assumptions of the coupled model. Never fails; the caller
/// decides what to do with violations.
pub fn validate_spec(spec: &ModelSpec) -> ValidationReport {
    let vol = &spec.vol;
    let dom = vol.domain();
    let mut checks =
        vec![Check::new("correlation_bounded", spec.rho.abs() <= 1.0, format!("|rho| = {}", spec.rho.abs()))];
    checks.push(Check::new(
        "finite_inputs",
        spec.theta.is_finite() && spec.x0.is_finite(),
        format!("theta = {}, x0 = {}", spec.theta, spec.x0),
    ));
    let vol_checks = vol.structural_checks();
    let vol_ok = vol_checks.iter().all(|c| c.satisfied);
    checks.extend(vol_checks);

    // Catalog coefficients are continuous, so a nonvanishing beta gives
    // local integrability of beta^-2 and alpha*beta^-2.
    let beta_ok = checks.iter().any(|c| c.name == "beta_nonvanishing" && c.satisfied);
    checks.push(Check::new(
        "drift_diffusion_locally_integrable",
        beta_ok,
        "beta^-2 and alpha*beta^-2 locally integrable on J".into(),
    ));
    checks.push(Check::new(
        "sigma2_locally_bounded",
        spec.sigma2.locally_bounded_on(dom),
        format!("sigma2 = {} on {dom}", spec.sigma2),
    ));
    if vol_ok {
        for (name, side) in [("no_exit_right", Side::Right), ("no_exit_left", Side::Left)] {
            let (ok, detail) = match scale::non_exit(vol, side) {
                Some(true) => (true, "boundary not reached in finite time".to_string()),
                Some(false) => (false, "driver can exit J through this boundary".to_string()),
                None => (false, "undecided".to_string()),
            };
            checks.push(Check::new(name, ok, detail));
        }
    }
    checks.push(Check::new(
        "inverse_square_locally_integrable",
        beta_ok && spec.sigma2.inverse_square_locally_integrable_on(dom),
        format!("beta^-2 sigma2^-2 with sigma2 = {} on {dom}", spec.sigma2),
    ));
    if spec.is_linear() {
        checks.push(Check::new("x0_nonzero", spec.x0 != 0.0, format!("x0 = {}", spec.x0)));
    }
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<CoefFn> {
        vec![
            CoefFn::Constant { c: 1.5 },
            CoefFn::Linear { m: 2.0, b: -1.0 },
            CoefFn::Power { c: 1.0, p: 0.25 },
            CoefFn::Power { c: 2.0, p: -0.5 },
            CoefFn::SqrtAbs { c: 1.0 },
            CoefFn::Reciprocal1p { c: 1.0 },
            CoefFn::SinShift { c: 2.0, d: 1.0 },
            CoefFn::AffineMeanRev { a: 1.0, b: 2.0 },
            CoefFn::SqrtY { c: 1.0 },
        ]
    }

    #[test]
    fn coef_display_round_trips() {
        for coef in catalog() {
            let back: CoefFn = coef.to_string().parse().unwrap();
            assert_eq!(back, coef);
        }
        assert_eq!("power(1,0.25)".parse::<CoefFn>().unwrap(), CoefFn::Power { c: 1.0, p: 0.25 });
    }

    #[test]
    fn coef_parse_errors() {
        assert!("power(1)".parse::<CoefFn>().is_err());
        assert!("cosh(1)".parse::<CoefFn>().is_err());
        assert!("const 1".parse::<CoefFn>().is_err());
        assert!("const(x)".parse::<CoefFn>().is_err());
        assert!("const(inf)".parse::<CoefFn>().is_err());
    }

    #[test]
    fn evaluation_is_total_on_domain() {
        use rand_chacha::ChaCha8Rng;
        use rand_core::{RngCore, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut unif = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        for coef in catalog() {
            for dom in [Domain::REAL_LINE, Domain::POSITIVE] {
                if !coef.locally_bounded_on(dom) {
                    continue;
                }
                for _ in 0..10_000 {
                    // log-uniform magnitudes over 1e-6 .. 1e6
                    let mag = 10f64.powf(12.0 * unif() - 6.0);
                    let y = if dom.lower < 0.0 && unif() < 0.5 { -mag } else { mag };
                    assert!(coef.eval(y).is_finite(), "{coef} at {y}");
                }
            }
        }
    }

    #[test]
    fn power_tail_matches_numeric_ratio() {
        let y = 1e6;
        for coef in catalog() {
            if let Some(tail) = coef.tail(Boundary::PosInf) {
                let ratio = (coef.eval(2.0 * y) / coef.eval(y)).abs();
                let expect = 2f64.powf(tail.exponent());
                if matches!(tail, Tail::BoundedAwayFromZero) {
                    // bounded ratio only
                    assert!(ratio > 0.0 && ratio.is_finite(), "{coef}");
                } else {
                    assert!((ratio / expect - 1.0).abs() < 0.01, "{coef}: {ratio} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn tails_of_oscillating_and_zero_members_are_unknown() {
        assert_eq!(CoefFn::SinShift { c: 0.0, d: 1.0 }.tail(Boundary::PosInf), None);
        assert_eq!(CoefFn::SinShift { c: 1.0, d: 1.0 }.tail(Boundary::NegInf), None);
        assert_eq!(CoefFn::Constant { c: 0.0 }.tail(Boundary::PosInf), None);
        assert_eq!(CoefFn::SqrtY { c: 1.0 }.tail(Boundary::NegInf), None);
        assert_eq!(CoefFn::SinShift { c: 2.0, d: 1.0 }.tail(Boundary::PosInf), Some(Tail::BoundedAwayFromZero));
        assert_eq!(CoefFn::Reciprocal1p { c: 1.0 }.tail(Boundary::PosInf), Some(Tail::Power(-1.0)));
        assert_eq!(CoefFn::SqrtY { c: 1.0 }.tail(Boundary::ZeroPlus), Some(Tail::Power(0.5)));
        assert_eq!(CoefFn::IDENTITY.tail(Boundary::ZeroPlus), Some(Tail::Power(1.0)));
    }

    #[test]
    fn local_integrability_of_inverse_square() {
        let r = Domain::REAL_LINE;
        let p = Domain::POSITIVE;
        assert!(CoefFn::Power { c: 1.0, p: 0.25 }.inverse_square_locally_integrable_on(r));
        assert!(!CoefFn::SqrtAbs { c: 1.0 }.inverse_square_locally_integrable_on(r));
        assert!(CoefFn::SqrtAbs { c: 1.0 }.inverse_square_locally_integrable_on(p));
        assert!(!CoefFn::IDENTITY.inverse_square_locally_integrable_on(r));
        assert!(CoefFn::IDENTITY.inverse_square_locally_integrable_on(p));
        assert!(CoefFn::SinShift { c: 2.0, d: 1.0 }.inverse_square_locally_integrable_on(r));
        assert!(!CoefFn::SinShift { c: 0.5, d: 1.0 }.inverse_square_locally_integrable_on(p));
        assert!(!CoefFn::SqrtY { c: 1.0 }.inverse_square_locally_integrable_on(r));
        assert!(!CoefFn::Reciprocal1p { c: 1.0 }.locally_bounded_on(r));
        assert!(CoefFn::Reciprocal1p { c: 1.0 }.locally_bounded_on(p));
    }

    #[test]
    fn cir_feller_condition() {
        assert!(VolatilityModel::cir(1.0, 1.0, 1.0, 1.0).is_ok());
        let err = VolatilityModel::cir(1.0, 0.1, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("feller"), "{err}");

        let pass = VolatilityModel { kind: VolKind::Cir { a: 1.0, b: 1.0, gamma: 1.0 }, y0: 1.0 };
        let fail = VolatilityModel { kind: VolKind::Cir { a: 1.0, b: 0.1, gamma: 1.0 }, y0: 1.0 };
        let spec = |vol| ModelSpec::linear(2.0, CoefFn::SqrtY { c: 1.0 }, vol, 1.0, 0.0);
        assert!(validate_spec(&spec(pass)).get("feller").unwrap().satisfied);
        let report = validate_spec(&spec(fail));
        assert!(!report.get("feller").unwrap().satisfied);
        assert!(!report.all_satisfied());
    }

    #[test]
    fn bachelier_zero_drift_passes_everything() {
        let vol = VolatilityModel::bachelier(0.0, 1.0, 0.0).unwrap();
        let spec = ModelSpec::linear(2.0, CoefFn::ONE, vol, 1.0, 0.0);
        let report = validate_spec(&spec);
        assert!(report.all_satisfied(), "{:?}", report.failed().collect::<Vec<_>>());
    }

    #[test]
    fn validation_flags_violations() {
        let vol = VolatilityModel { kind: VolKind::Gbm { alpha: 1.0, beta: 1.0 }, y0: -1.0 };
        let mut spec = ModelSpec::linear(2.0, CoefFn::ONE, vol, 0.0, 1.5);
        let report = validate_spec(&spec);
        for name in ["correlation_bounded", "y0_in_domain", "x0_nonzero"] {
            assert!(!report.get(name).unwrap().satisfied, "{name}");
        }
        spec.vol = VolatilityModel::bachelier(0.0, 1.0, 0.0).unwrap();
        spec.sigma2 = CoefFn::Power { c: 1.0, p: -0.5 };
        assert!(!validate_spec(&spec).get("sigma2_locally_bounded").unwrap().satisfied);
        spec.sigma2 = CoefFn::SqrtAbs { c: 1.0 };
        assert!(!validate_spec(&spec).get("inverse_square_locally_integrable").unwrap().satisfied);
        assert!(VolatilityModel::vasicek(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(VolatilityModel::gbm(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn time_grid_invariants() {
        let g = TimeGrid::new(10.0, 1e-3).unwrap();
        assert_eq!(g.steps(), 10_000);
        assert!((g.time(g.steps()) - 10.0).abs() <= 10.0 * f64::EPSILON * 4.0);
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(0.0, 0.1).is_err());
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::new(0.01, 1.0).is_err());
        assert_eq!(g.prefix(5).unwrap().steps(), 5);
        assert!(g.prefix(10_001).is_err());
    }
}

//! Scale density and scale function of the volatility diffusion,
//! boundary classification, and the ellipticity margin of the coupled
//! diffusion matrix.
//!
//! ```text
//! rho(y) = exp(-2 * int_c^y alpha(u) / beta(u)^2 du)
//! s(y)   = int_c^y rho(u) du
//! ```
//!
//! Each family has a canonical reference point `c0` at which the density
//! has a simple closed form (`0` for Bachelier, `b` for Vasicek, `1` for
//! GBM and CIR). Any other reference point is a renormalisation:
//! `rho_c = rho_c0 / rho_c0(c)` and `s_c(y) = (S(y) - S(c)) / rho_c0(c)`.
//!
//! Whether the driver keeps `int sigma2^-2(Y_s) ds` divergent is decided
//! from boundary values of `s` and power-law tails, never by integrating
//! to infinity numerically.

pub mod quadrature;

use std::f64::consts::PI;
use std::fmt;

use statrs::function::erf::erf;

use crate::error::{Result, VolError};
use crate::models::{Boundary, CoefFn, Tail, VolKind, VolatilityModel};
use quadrature::{adaptive_simpson, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Value of the scale function at an end of `J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryValue {
    Finite(f64),
    /// `+inf` at the right end, `-inf` at the left end.
    Infinite,
}

impl BoundaryValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, BoundaryValue::Finite(_))
    }
}

impl fmt::Display for BoundaryValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryValue::Finite(v) => write!(f, "finite({v})"),
            BoundaryValue::Infinite => write!(f, "infinite"),
        }
    }
}

/// Which of the four boundary alternatives guarantees divergence of
/// `int_0^inf sigma2^-2(Y_s) ds`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A6Case {
    /// `s(r) = inf`, `s(l) = -inf`
    I,
    /// `s(r) < inf`, `s(l) = -inf`, perpetual integral diverges at `r`
    Ii,
    /// `s(r) = inf`, `s(l) > -inf`, perpetual integral diverges at `l`
    Iii,
    /// both finite, both perpetual integrals diverge
    Iv,
    NotSatisfied,
    Indeterminate,
}

impl A6Case {
    pub fn guarantees_consistency(self) -> bool {
        matches!(self, A6Case::I | A6Case::Ii | A6Case::Iii | A6Case::Iv)
    }
}

impl fmt::Display for A6Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            A6Case::I => "i",
            A6Case::Ii => "ii",
            A6Case::Iii => "iii",
            A6Case::Iv => "iv",
            A6Case::NotSatisfied => "not_satisfied",
            A6Case::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleReport {
    pub c: f64,
    pub s_at_r: BoundaryValue,
    pub s_at_l: BoundaryValue,
    pub a6_case: A6Case,
    pub consistency_guaranteed: bool,
    /// Which closed form (if any) backs `s(y)`.
    pub s_form: &'static str,
    pub notes: Vec<String>,
}

impl fmt::Display for ScaleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "c: {}", self.c)?;
        writeln!(f, "s_form: {}", self.s_form)?;
        writeln!(f, "s_at_l: {}", self.s_at_l)?;
        writeln!(f, "s_at_r: {}", self.s_at_r)?;
        writeln!(f, "a6_case: {}", self.a6_case)?;
        writeln!(f, "consistency_guaranteed: {}", self.consistency_guaranteed)?;
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

// GBM density exponent 2*alpha^2/beta^2, snapped to 1 within rounding so
// that beta^2 = 2 alpha^2 lands on the logarithmic branch.
fn gbm_exponent(alpha: f64, beta: f64) -> f64 {
    let k = 2.0 * alpha * alpha / (beta * beta);
    if (k - 1.0).abs() <= 1e-12 {
        1.0
    } else {
        k
    }
}

// CIR: rho_1(y) = y^-q * exp(kappa * (y - 1)).
fn cir_exponents(a: f64, b: f64, gamma: f64) -> (f64, f64) {
    let g2 = gamma * gamma;
    (2.0 * a * b / g2, 2.0 * a / g2)
}

fn canonical_reference(kind: &VolKind) -> f64 {
    match *kind {
        VolKind::Bachelier { .. } => 0.0,
        VolKind::Vasicek { b, .. } => b,
        VolKind::Gbm { .. } | VolKind::Cir { .. } => 1.0,
    }
}

/// `ln rho` with the canonical reference point.
fn log_density_canonical(kind: &VolKind, y: f64) -> f64 {
    match *kind {
        VolKind::Bachelier { alpha, beta } => -2.0 * alpha * y / (beta * beta),
        VolKind::Vasicek { a, b, gamma } => a * (y - b) * (y - b) / (gamma * gamma),
        VolKind::Gbm { alpha, beta } => -gbm_exponent(alpha, beta) * y.ln(),
        VolKind::Cir { a, b, gamma } => {
            let (q, kappa) = cir_exponents(a, b, gamma);
            -q * y.ln() + kappa * (y - 1.0)
        }
    }
}

/// Closed-form `S(y) = int_c0^y rho_c0`, where one exists.
fn closed_form_canonical(kind: &VolKind, y: f64) -> Option<f64> {
    match *kind {
        VolKind::Bachelier { alpha, beta } => {
            if alpha == 0.0 {
                Some(y)
            } else {
                let k = 2.0 * alpha / (beta * beta);
                Some(-(-k * y).exp_m1() / k)
            }
        }
        VolKind::Vasicek { a, b, gamma } => {
            if a == 0.0 {
                Some(y - b)
            } else if a < 0.0 {
                let r = (-a).sqrt();
                Some(gamma / r * PI.sqrt() / 2.0 * erf(r * (y - b) / gamma))
            } else {
                None
            }
        }
        VolKind::Gbm { alpha, beta } => {
            let k = gbm_exponent(alpha, beta);
            if k == 1.0 {
                Some(y.ln())
            } else {
                Some((y.powf(1.0 - k) - 1.0) / (1.0 - k))
            }
        }
        VolKind::Cir { .. } => None,
    }
}

fn form_name(kind: &VolKind) -> &'static str {
    match *kind {
        VolKind::Bachelier { alpha: 0.0, .. } => "linear",
        VolKind::Bachelier { .. } => "exponential",
        VolKind::Vasicek { a: 0.0, .. } => "linear",
        VolKind::Vasicek { a, .. } if a < 0.0 => "erf",
        VolKind::Gbm { alpha, beta } if gbm_exponent(alpha, beta) == 1.0 => "ln y",
        VolKind::Gbm { .. } => "power",
        _ => "quadrature",
    }
}

fn canonical_density(kind: &VolKind) -> impl Fn(f64) -> f64 + '_ {
    move |u| log_density_canonical(kind, u).exp()
}

/// `S(y)` by closed form when available, otherwise by quadrature from `c0`.
fn s_canonical(kind: &VolKind, y: f64) -> Result<f64> {
    match closed_form_canonical(kind, y) {
        Some(v) => Ok(v),
        None => adaptive_simpson(canonical_density(kind), canonical_reference(kind), y, Tolerance::default()),
    }
}

/// `S` at an end of `J`.
fn boundary_canonical(kind: &VolKind, side: Side) -> Result<BoundaryValue> {
    use BoundaryValue::*;
    Ok(match (*kind, side) {
        (VolKind::Bachelier { alpha, beta }, _) => {
            let limit = beta * beta / (2.0 * alpha);
            match side {
                Side::Right if alpha > 0.0 => Finite(limit),
                Side::Left if alpha < 0.0 => Finite(limit),
                _ => Infinite,
            }
        }
        (VolKind::Vasicek { a, gamma, .. }, _) => {
            if a < 0.0 {
                let half = gamma * PI.sqrt() / (2.0 * (-a).sqrt());
                Finite(if side == Side::Right { half } else { -half })
            } else {
                Infinite
            }
        }
        (VolKind::Gbm { alpha, beta }, _) => {
            let k = gbm_exponent(alpha, beta);
            match side {
                Side::Right if k > 1.0 => Finite(1.0 / (k - 1.0)),
                Side::Left if k < 1.0 => Finite(-1.0 / (1.0 - k)),
                _ => Infinite,
            }
        }
        (VolKind::Cir { .. }, Side::Right) => Infinite,
        (VolKind::Cir { a, b, gamma }, Side::Left) => {
            let (q, kappa) = cir_exponents(a, b, gamma);
            if q >= 1.0 {
                Infinite
            } else {
                // u = v^(1/(1-q)) removes the u^-q singularity at 0
                let e = 1.0 / (1.0 - q);
                let g = |v: f64| (kappa * (v.powf(e) - 1.0)).exp() * e;
                Finite(-adaptive_simpson(g, 0.0, 1.0, Tolerance::default())?)
            }
        }
    })
}

fn check_reference(vol: &VolatilityModel, c: f64) -> Result<()> {
    if vol.domain().contains(c) {
        Ok(())
    } else {
        Err(VolError::Domain { what: "reference point c", value: c, domain: vol.domain().to_string() })
    }
}

/// `rho(y)` normalised so that `rho(c) = 1`.
pub fn scale_density(vol: &VolatilityModel, c: f64, y: f64) -> Result<f64> {
    check_reference(vol, c)?;
    if !vol.domain().contains(y) {
        return Err(VolError::Domain { what: "y", value: y, domain: vol.domain().to_string() });
    }
    Ok((log_density_canonical(&vol.kind, y) - log_density_canonical(&vol.kind, c)).exp())
}

/// `s(y) = int_c^y rho(u) du` for `y` in the closure of `J`; boundary
/// points (including infinite ones) map to `+-inf` or the finite limit.
pub fn scale_function(vol: &VolatilityModel, c: f64, y: f64) -> Result<f64> {
    check_reference(vol, c)?;
    let dom = vol.domain();
    if !dom.contains_closed(y) || y.is_nan() {
        return Err(VolError::Domain { what: "y", value: y, domain: dom.to_string() });
    }
    let kind = &vol.kind;
    let norm = (-log_density_canonical(kind, c)).exp();
    let at_c = s_canonical(kind, c)?;
    if y == dom.lower || y == dom.upper {
        let side = if y == dom.upper { Side::Right } else { Side::Left };
        return Ok(match boundary_canonical(kind, side)? {
            BoundaryValue::Finite(v) => (v - at_c) * norm,
            BoundaryValue::Infinite if side == Side::Right => f64::INFINITY,
            BoundaryValue::Infinite => f64::NEG_INFINITY,
        });
    }
    match closed_form_canonical(kind, y) {
        Some(v) => Ok((v - at_c) * norm),
        None => scale_function_quadrature(vol, c, y),
    }
}

/// `s(y)` by adaptive Simpson on `[c, y]` regardless of closed forms.
pub fn scale_function_quadrature(vol: &VolatilityModel, c: f64, y: f64) -> Result<f64> {
    check_reference(vol, c)?;
    if !vol.domain().contains(y) {
        return Err(VolError::Domain { what: "y", value: y, domain: vol.domain().to_string() });
    }
    let kind = &vol.kind;
    let lc = log_density_canonical(kind, c);
    adaptive_simpson(|u| (log_density_canonical(kind, u) - lc).exp(), c, y, Tolerance::default())
}

/// Boundary value of `s` relative to reference `c`.
pub fn scale_boundary(vol: &VolatilityModel, c: f64, side: Side) -> Result<BoundaryValue> {
    check_reference(vol, c)?;
    let kind = &vol.kind;
    Ok(match boundary_canonical(kind, side)? {
        BoundaryValue::Finite(v) => {
            let norm = (-log_density_canonical(kind, c)).exp();
            BoundaryValue::Finite((v - s_canonical(kind, c)?) * norm)
        }
        BoundaryValue::Infinite => BoundaryValue::Infinite,
    })
}

/// Near a boundary where `s` is finite,
/// `|s(B) - s(y)| / (rho(y) beta(y)^2)` behaves like `|y|^e`.
/// Returns the boundary and `e`.
pub(crate) fn perpetual_weight(kind: &VolKind, side: Side) -> Option<(Boundary, f64)> {
    match (*kind, side) {
        (VolKind::Bachelier { alpha, .. }, Side::Right) if alpha > 0.0 => Some((Boundary::PosInf, 0.0)),
        (VolKind::Bachelier { alpha, .. }, Side::Left) if alpha < 0.0 => Some((Boundary::NegInf, 0.0)),
        (VolKind::Vasicek { a, .. }, Side::Right) if a < 0.0 => Some((Boundary::PosInf, -1.0)),
        (VolKind::Vasicek { a, .. }, Side::Left) if a < 0.0 => Some((Boundary::NegInf, -1.0)),
        (VolKind::Gbm { alpha, beta }, Side::Right) if gbm_exponent(alpha, beta) > 1.0 => {
            Some((Boundary::PosInf, -1.0))
        }
        (VolKind::Gbm { alpha, beta }, Side::Left) if gbm_exponent(alpha, beta) < 1.0 => {
            Some((Boundary::ZeroPlus, -1.0))
        }
        (VolKind::Cir { a, b, gamma }, Side::Left) if cir_exponents(a, b, gamma).0 < 1.0 => {
            Some((Boundary::ZeroPlus, 0.0))
        }
        _ => None,
    }
}

/// Is `|y|^e * sigma^-2(y)` non-integrable at the boundary, with
/// `|sigma| ~ |y|^p`?
fn weighted_inverse_square_diverges(at: Boundary, e: f64, tail: Tail) -> bool {
    let exponent = e - 2.0 * tail.exponent();
    match at {
        Boundary::PosInf | Boundary::NegInf => exponent >= -1.0,
        Boundary::ZeroPlus => exponent <= -1.0,
    }
}

/// `s(B) = +-inf`, or the perpetual integral of `1/(rho beta^2 sigma^2)`
/// weighted by `|s(B) - s|` diverges at `B`. `None` when the tail of
/// `sigma` is unknown there.
fn side_diverges(kind: &VolKind, side: Side, sigma: &CoefFn) -> Option<bool> {
    match perpetual_weight(kind, side) {
        None => Some(true),
        Some((at, e)) => sigma.tail(at).map(|t| weighted_inverse_square_diverges(at, e, t)),
    }
}

/// The driver does not reach the boundary on `side` in finite time.
pub fn non_exit(vol: &VolatilityModel, side: Side) -> Option<bool> {
    side_diverges(&vol.kind, side, &CoefFn::ONE)
}

fn boundary_label(at: Boundary) -> &'static str {
    match at {
        Boundary::PosInf => "+inf",
        Boundary::NegInf => "-inf",
        Boundary::ZeroPlus => "0+",
    }
}

/// Classifies the boundary alternative for `vol` and `sigma2`, reporting
/// boundary values of `s` relative to the family's default reference.
pub fn classify_a6(vol: &VolatilityModel, sigma2: &CoefFn) -> ScaleReport {
    classify_with_reference(vol, sigma2, vol.default_reference())
}

/// [`classify_a6`] with boundary values relative to reference `c`.
pub fn classify_a6_at(vol: &VolatilityModel, sigma2: &CoefFn, c: f64) -> Result<ScaleReport> {
    check_reference(vol, c)?;
    Ok(classify_with_reference(vol, sigma2, c))
}

fn classify_with_reference(vol: &VolatilityModel, sigma2: &CoefFn, c: f64) -> ScaleReport {
    let kind = &vol.kind;
    let mut notes = Vec::new();

    let boundary = |side| match scale_boundary(vol, c, side) {
        Ok(v) => v,
        Err(_) => match boundary_canonical(kind, side) {
            Ok(BoundaryValue::Infinite) => BoundaryValue::Infinite,
            _ => BoundaryValue::Finite(f64::NAN),
        },
    };
    let s_at_r = boundary(Side::Right);
    let s_at_l = boundary(Side::Left);

    let mut side_test = |side: Side| -> Option<bool> {
        let (at, e) = perpetual_weight(kind, side)?;
        let verdict = sigma2.tail(at).map(|t| weighted_inverse_square_diverges(at, e, t));
        let outcome = match verdict {
            Some(true) => "diverges",
            Some(false) => "converges",
            None => "unknown tail of sigma2",
        };
        notes.push(format!("perpetual integral at {}: |y|^{} * sigma2^-2 {}", boundary_label(at), e, outcome));
        verdict
    };

    let a6_case = match (s_at_r.is_finite(), s_at_l.is_finite()) {
        (false, false) => A6Case::I,
        (true, false) => match side_test(Side::Right) {
            Some(true) => A6Case::Ii,
            Some(false) => A6Case::NotSatisfied,
            None => A6Case::Indeterminate,
        },
        (false, true) => match side_test(Side::Left) {
            Some(true) => A6Case::Iii,
            Some(false) => A6Case::NotSatisfied,
            None => A6Case::Indeterminate,
        },
        (true, true) => {
            let r = side_test(Side::Right);
            let l = side_test(Side::Left);
            match (r, l) {
                (Some(false), _) | (_, Some(false)) => A6Case::NotSatisfied,
                (Some(true), Some(true)) => A6Case::Iv,
                _ => A6Case::Indeterminate,
            }
        }
    };

    let dom = vol.domain();
    notes.push(format!(
        "sigma2^-2 locally integrable on {dom}: {}",
        if sigma2.inverse_square_locally_integrable_on(dom) { "yes" } else { "no" }
    ));
    if let VolKind::Gbm { alpha, beta } = *kind {
        let printed = gbm_exponent(alpha, beta);
        let from_drift = 2.0 * alpha / (beta * beta);
        // the two exponents agree exactly when alpha^2 = alpha
        if alpha != 0.0 && alpha != 1.0 {
            notes.push(format!(
                "gbm density exponent uses 2*alpha^2/beta^2 = {printed}; the drift alpha*y alone gives 2*alpha/beta^2 = {from_drift}"
            ));
        }
    }

    ScaleReport {
        c,
        s_at_r,
        s_at_l,
        a6_case,
        consistency_guaranteed: a6_case.guarantees_consistency(),
        s_form: form_name(kind),
        notes,
    }
}

/// `Q(l1, l2) = |B l|^2` for `B = [[s12, 0], [rho*beta, sqrt(1-rho^2)*beta]]`.
pub fn quadratic_form(sigma1sigma2: f64, beta: f64, rho: f64, l1: f64, l2: f64) -> f64 {
    let s2 = sigma1sigma2 * sigma1sigma2;
    let b2 = beta * beta;
    let r = (1.0 - rho * rho).sqrt();
    (s2 + b2 * rho * rho) * l1 * l1 + b2 * (1.0 - rho * rho) * l2 * l2 + 2.0 * rho * r * b2 * l1 * l2
}

/// Smallest singular value of the coupled diffusion matrix, i.e. the
/// largest `eps` with `|B l| >= eps |l|` for all `l`.
pub fn ellipticity_margin(sigma1sigma2: f64, beta: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(VolError::DegenerateCorrelation(rho.abs()));
    }
    if !(sigma1sigma2 > 0.0 && beta > 0.0) || !sigma1sigma2.is_finite() || !beta.is_finite() {
        return Err(VolError::InvalidModel(format!(
            "ellipticity needs sigma1*sigma2 > 0 and beta > 0, got {sigma1sigma2}, {beta}"
        )));
    }
    let s2 = sigma1sigma2 * sigma1sigma2;
    let b2 = beta * beta;
    let one_m = 1.0 - rho * rho;
    let m11 = s2 + rho * rho * b2;
    let m22 = one_m * b2;
    let m12 = rho * one_m.sqrt() * b2;
    let half_gap = 0.5 * (m11 - m22);
    let lambda_max = 0.5 * (m11 + m22) + (half_gap * half_gap + m12 * m12).sqrt();
    // det = s2 * b2 * (1 - rho^2); avoids cancellation in the small eigenvalue
    let lambda_min = s2 * b2 * one_m / lambda_max;
    Ok(lambda_min.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn density_examples() {
        let bach = VolatilityModel::bachelier(0.0, 1.0, 0.0).unwrap();
        for y in [-3.0, 0.0, 7.5] {
            assert_eq!(scale_density(&bach, 0.0, y).unwrap(), 1.0);
        }
        let vas = VolatilityModel::vasicek(-1.0, 0.7, 1.0, 0.0).unwrap();
        assert_eq!(scale_density(&vas, 0.7, 0.7).unwrap(), 1.0);
        // 2*alpha^2/beta^2 = 1, so rho(y) = 1/y with c = 1
        let gbm = VolatilityModel::gbm(1.0, 2f64.sqrt(), 1.0).unwrap();
        assert!(close(scale_density(&gbm, 1.0, 2.0).unwrap(), 0.5, 1e-15));
        assert!(scale_density(&gbm, 1.0, -1.0).is_err());
        assert!(scale_density(&gbm, 0.0, 1.0).is_err());
    }

    #[test]
    fn scale_function_examples() {
        let gbm = VolatilityModel::gbm(1.0, 2f64.sqrt(), 1.0).unwrap();
        assert!(close(scale_function(&gbm, 1.0, std::f64::consts::E).unwrap(), 1.0, 1e-15));
        let bach = VolatilityModel::bachelier(0.0, 1.0, 0.0).unwrap();
        assert_eq!(scale_function(&bach, 0.0, 3.0).unwrap(), 3.0);
        let vas = VolatilityModel::vasicek(-1.0, 0.0, 1.0, 0.0).unwrap();
        let s_inf = scale_function(&vas, 0.0, f64::INFINITY).unwrap();
        assert!(close(s_inf, 0.886_226_925_452_758, 1e-12), "{s_inf}");
        assert!(close(scale_function(&vas, 0.0, f64::NEG_INFINITY).unwrap(), -s_inf, 1e-15));
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let models = [
            VolatilityModel::bachelier(1.0, 1.0, 1.0).unwrap(),
            VolatilityModel::bachelier(-0.5, 2.0, 1.0).unwrap(),
            VolatilityModel::vasicek(-1.0, 0.0, 1.0, 1.0).unwrap(),
            VolatilityModel::vasicek(-2.0, 1.0, 0.5, 1.0).unwrap(),
            VolatilityModel::gbm(1.0, 2.0, 1.0).unwrap(),
            VolatilityModel::gbm(1.0, 1.0, 1.0).unwrap(),
            VolatilityModel::gbm(1.0, 2f64.sqrt(), 1.0).unwrap(),
        ];
        for vol in models {
            for c in [vol.default_reference(), vol.default_reference() + 0.5] {
                for i in 1..=20 {
                    let y = c + 0.25 * i as f64;
                    let closed = scale_function(&vol, c, y).unwrap();
                    let quad = scale_function_quadrature(&vol, c, y).unwrap();
                    assert!(
                        (closed - quad).abs() <= 1e-9 * closed.abs().max(1.0),
                        "{vol:?} c={c} y={y}: {closed} vs {quad}"
                    );
                }
            }
        }
    }

    #[test]
    fn scale_function_increases() {
        let models = [
            VolatilityModel::bachelier(1.0, 1.0, 1.0).unwrap(),
            VolatilityModel::vasicek(1.0, 0.0, 1.0, 1.0).unwrap(),
            VolatilityModel::gbm(1.0, 2.0, 1.0).unwrap(),
            VolatilityModel::cir(1.0, 2.0, 1.0, 1.0).unwrap(),
        ];
        for vol in models {
            let c = vol.default_reference();
            let lo = if vol.is_positive() { 0.05 } else { -3.0 };
            let mut prev = f64::NEG_INFINITY;
            for i in 0..1000 {
                let y = lo + (4.0 - lo) * i as f64 / 999.0;
                let s = scale_function(&vol, c, y).unwrap();
                assert!(s > prev, "{vol:?} at {y}");
                prev = s;
            }
        }
    }

    #[test]
    fn boundary_values() {
        let gbm = VolatilityModel::gbm(1.0, 2.0, 1.0).unwrap();
        // exponent 1/2: s(y) = 2(sqrt(y) - 1)
        assert_eq!(scale_boundary(&gbm, 1.0, Side::Left).unwrap(), BoundaryValue::Finite(-2.0));
        assert_eq!(scale_boundary(&gbm, 1.0, Side::Right).unwrap(), BoundaryValue::Infinite);
        assert_eq!(scale_function(&gbm, 1.0, 0.0).unwrap(), -2.0);
        let cir = VolatilityModel::cir(1.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(scale_boundary(&cir, 2.0, Side::Left).unwrap(), BoundaryValue::Infinite);
        // non-Feller CIR reaches 0: s(0) finite, checked against direct quadrature
        let bad = VolatilityModel { kind: VolKind::Cir { a: 1.0, b: 0.1, gamma: 1.0 }, y0: 1.0 };
        let BoundaryValue::Finite(s0) = scale_boundary(&bad, 1.0, Side::Left).unwrap() else {
            panic!("expected finite s(0)");
        };
        let near = scale_function_quadrature(&bad, 1.0, 1e-9).unwrap();
        assert!((s0 - near).abs() < 1e-3, "{s0} vs {near}");
        assert_eq!(non_exit(&bad, Side::Left), Some(false));
        assert_eq!(non_exit(&cir, Side::Left), Some(true));
    }

    #[test]
    fn perpetual_weight_exponents_match_numerics() {
        // |s(B) - s(y)| / (rho beta^2) ~ C |y|^e; check the log-slope.
        let cases = [
            (VolatilityModel::bachelier(1.0, 1.0, 1.0).unwrap(), Side::Right, 5.0, 10.0),
            (VolatilityModel::vasicek(-1.0, 0.0, 1.0, 1.0).unwrap(), Side::Right, 2.5, 5.0),
            (VolatilityModel::vasicek(-1.0, 0.0, 1.0, 1.0).unwrap(), Side::Left, -2.5, -5.0),
            (VolatilityModel::gbm(1.0, 1.0, 1.0).unwrap(), Side::Right, 1e3, 2e3),
            (VolatilityModel::gbm(1.0, 2.0, 1.0).unwrap(), Side::Left, 1e-3, 5e-4),
        ];
        for (vol, side, y1, y2) in cases {
            let (_, e) = perpetual_weight(&vol.kind, side).unwrap();
            let c = vol.default_reference();
            let BoundaryValue::Finite(sb) = scale_boundary(&vol, c, side).unwrap() else { panic!() };
            let ratio = |y: f64| {
                let beta = vol.beta(y);
                (sb - scale_function(&vol, c, y).unwrap()).abs() / (scale_density(&vol, c, y).unwrap() * beta * beta)
            };
            let slope = (ratio(y2) / ratio(y1)).ln() / (y2.abs() / y1.abs()).ln();
            // erfc tail correction is O(1/y^2) at these points
            assert!((slope - e).abs() < 0.12, "{vol:?} {side:?}: slope {slope} vs {e}");
        }
    }

    #[test]
    fn classifier_examples() {
        let bach0 = VolatilityModel::bachelier(0.0, 1.0, 1.0).unwrap();
        let r = classify_a6(&bach0, &CoefFn::Power { c: 1.0, p: 0.25 });
        assert_eq!(r.a6_case, A6Case::I);
        assert!(r.consistency_guaranteed);

        let cir = VolatilityModel::cir(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_a6(&cir, &CoefFn::SqrtY { c: 1.0 }).a6_case, A6Case::I);

        let gbm = VolatilityModel::gbm(1.0, 2.0, 1.0).unwrap();
        let r = classify_a6(&gbm, &CoefFn::SqrtY { c: 1.0 });
        assert_eq!(r.a6_case, A6Case::Iii);
        assert!(r.s_at_l.is_finite() && !r.s_at_r.is_finite());

        let gbm_ln = VolatilityModel::gbm(1.0, 2f64.sqrt(), 1.0).unwrap();
        let r = classify_a6(&gbm_ln, &CoefFn::ONE);
        assert_eq!((r.a6_case, r.s_form), (A6Case::I, "ln y"));

        for a in [0.0, 0.5, 3.0] {
            let v = VolatilityModel::vasicek(a, 1.0, 1.0, 0.0).unwrap();
            let r = classify_a6(&v, &CoefFn::SinShift { c: 2.0, d: 1.0 });
            assert!(r.consistency_guaranteed, "a = {a}");
        }
    }

    #[test]
    fn classifier_negative_and_unknown() {
        // Bachelier with positive drift needs sigma2^-2 non-integrable at +inf
        let bach = VolatilityModel::bachelier(1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_a6(&bach, &CoefFn::Power { c: 1.0, p: 0.5 }).a6_case, A6Case::Ii);
        assert_eq!(classify_a6(&bach, &CoefFn::IDENTITY).a6_case, A6Case::NotSatisfied);
        let r = classify_a6(&bach, &CoefFn::SinShift { c: 0.0, d: 1.0 });
        assert_eq!(r.a6_case, A6Case::Indeterminate);
        assert!(!r.consistency_guaranteed);

        // explosive OU needs y^-1 sigma2^-2 non-integrable at both ends
        let ou = VolatilityModel::vasicek(-1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_a6(&ou, &CoefFn::SinShift { c: 2.0, d: 1.0 }).a6_case, A6Case::Iv);
        assert_eq!(classify_a6(&ou, &CoefFn::Power { c: 1.0, p: 0.25 }).a6_case, A6Case::NotSatisfied);
        assert_eq!(classify_a6(&ou, &CoefFn::SinShift { c: 1.0, d: 1.0 }).a6_case, A6Case::Indeterminate);

        // GBM with s(+inf) finite: needs y^-1 sigma2^-2 non-integrable at +inf
        let gbm = VolatilityModel::gbm(1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_a6(&gbm, &CoefFn::Reciprocal1p { c: 1.0 }).a6_case, A6Case::Ii);
        assert_eq!(classify_a6(&gbm, &CoefFn::SqrtY { c: 1.0 }).a6_case, A6Case::NotSatisfied);
    }

    #[test]
    fn gbm_exponent_discrepancy_is_noted() {
        let gbm = VolatilityModel::gbm(2.0, 2.0, 1.0).unwrap();
        let r = classify_a6(&gbm, &CoefFn::ONE);
        assert!(r.notes.iter().any(|n| n.contains("2*alpha^2/beta^2")));
        let gbm1 = VolatilityModel::gbm(1.0, 2.0, 1.0).unwrap();
        assert!(!classify_a6(&gbm1, &CoefFn::ONE).notes.iter().any(|n| n.contains("alpha^2")));
    }

    #[test]
    fn ellipticity_examples() {
        assert!((ellipticity_margin(2.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ellipticity_margin(1.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(ellipticity_margin(1.0, 1.0, 1.0), Err(VolError::DegenerateCorrelation(_))));
        assert!(ellipticity_margin(0.0, 1.0, 0.5).is_err());

        let eps = ellipticity_margin(1.0, 1.0, 0.5).unwrap();
        let grid = (0..10_000)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / 10_000.0;
                quadratic_form(1.0, 1.0, 0.5, phi.cos(), phi.sin()).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((eps - grid).abs() < 1e-6, "{eps} vs {grid}");
        assert!(eps <= grid);
    }
}

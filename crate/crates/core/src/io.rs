//! CSV formats.
//!
//! Every writer emits fixed column order and `{:.16e}` reals (17
//! significant digits, exact round trip), so outputs for a fixed seed are
//! byte-stable. Lines starting with `#` are header comments; readers skip
//! them.

use std::io::{Read, Write};

use crate::error::{Result, VolError};
use crate::estimate::EstimateResult;
use crate::harness::{CurvePoint, Table1Record};
use crate::models::TimeGrid;
use crate::simulate::PathPair;

pub const PATH_HEADER: &str = "t,x,y,dw";
pub const ESTIMATE_HEADER: &str = "T,theta_hat,numerator,denominator,n_used";
pub const TABLE1_HEADER: [&str; 9] = ["config_id", "alpha", "beta", "sigma2", "T", "mean", "std", "n_ok", "n_fail"];
pub const CURVE_HEADER: &str = "T,median_abs_error";
pub const SCALE_SAMPLES_HEADER: &str = "y,rho,s";

/// Relative tolerance on the uniformity of time stamps read from CSV.
const GRID_TOLERANCE: f64 = 1e-9;

/// Fixed real formatting used by every writer.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn comments<W: Write>(w: &mut W, header: &str) -> Result<()> {
    for line in header.lines() {
        if line.starts_with('#') {
            writeln!(w, "{line}")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

/// One row per node; `dw` is empty on the last row and for observed paths.
pub fn write_path_csv<W: Write>(w: &mut W, path: &PathPair, header: &str) -> Result<()> {
    path.check_lengths()?;
    comments(w, header)?;
    writeln!(w, "{PATH_HEADER}")?;
    for k in 0..=path.steps() {
        let dw = match &path.dw {
            Some(dw) if k < dw.len() => fmt_real(dw[k]),
            _ => String::new(),
        };
        writeln!(w, "{},{},{},{}", fmt_real(path.grid.time(k)), fmt_real(path.x[k]), fmt_real(path.y[k]), dw)?;
    }
    Ok(())
}

/// Reads a path in the dump format (the `dw` column is optional). The
/// grid is inferred from the time stamps, which must start at 0 and be
/// uniformly spaced.
pub fn read_path_csv<R: Read>(r: R) -> Result<PathPair> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let has_dw = match cols.as_slice() {
        ["t", "x", "y", "dw"] => true,
        ["t", "x", "y"] => false,
        _ => {
            return Err(VolError::Parse {
                line: 1,
                msg: format!("expected header `{PATH_HEADER}` or `t,x,y`, got `{}`", cols.join(",")),
            })
        }
    };

    let (mut t, mut x, mut y, mut dw) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| -> Result<Option<f64>> {
            match rec.get(i) {
                None | Some("") => Ok(None),
                Some(s) => s
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Some)
                    .ok_or_else(|| VolError::Parse { line, msg: format!("`{s}` is not a finite number") }),
            }
        };
        let need = |i: usize, name: &str| -> Result<f64> {
            field(i)?.ok_or_else(|| VolError::Parse { line, msg: format!("missing {name}") })
        };
        t.push(need(0, "t")?);
        x.push(need(1, "x")?);
        y.push(need(2, "y")?);
        dw.push(if has_dw { field(3)? } else { None });
    }

    if t.len() < 2 {
        return Err(VolError::InvalidGrid(format!("need at least two nodes, got {}", t.len())));
    }
    let n = t.len() - 1;
    let horizon = t[n];
    if t[0] != 0.0 || !(horizon > 0.0) {
        return Err(VolError::InvalidGrid(format!("time stamps must run from 0 to T > 0, got {} .. {horizon}", t[0])));
    }
    let grid = TimeGrid::from_steps(n, horizon / n as f64)?;
    if let Some(k) = (0..=n).find(|&k| (t[k] - grid.time(k)).abs() > GRID_TOLERANCE * horizon) {
        return Err(VolError::InvalidGrid(format!("non-uniform time stamp at node {k}: {} vs {}", t[k], grid.time(k))));
    }

    let increments: Option<Vec<f64>> = dw[..n].iter().copied().collect();
    let path = match increments {
        Some(inc) if has_dw => PathPair { dw: Some(inc), ..PathPair::observed(grid, x, y)? },
        _ => PathPair::observed(grid, x, y)?,
    };
    path.check_lengths()?;
    Ok(path)
}

pub fn write_estimate_csv<W: Write>(w: &mut W, results: &[EstimateResult], header: &str) -> Result<()> {
    comments(w, header)?;
    writeln!(w, "{ESTIMATE_HEADER}")?;
    for e in results {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_real(e.horizon),
            fmt_real(e.theta_hat),
            fmt_real(e.numerator),
            fmt_real(e.denominator),
            e.n_used
        )?;
    }
    Ok(())
}

pub fn write_table1_csv<W: Write>(w: &mut W, records: &[Table1Record], header: &str) -> Result<()> {
    comments(w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TABLE1_HEADER)?;
    for r in records {
        out.write_record([
            r.config_id.to_string(),
            r.alpha.clone(),
            r.beta.clone(),
            r.sigma2.clone(),
            fmt_real(r.horizon),
            fmt_real(r.mean),
            fmt_real(r.std),
            r.n_ok.to_string(),
            r.n_fail.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Parses the records written by [`write_table1_csv`].
pub fn read_table1_csv<R: Read>(r: R) -> Result<Vec<Table1Record>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |what: &str| VolError::Parse { line, msg: format!("bad {what}") };
        let get = |i: usize| rec.get(i).ok_or_else(|| bad(TABLE1_HEADER[i]));
        let num = |i: usize| get(i)?.parse::<f64>().map_err(|_| bad(TABLE1_HEADER[i]));
        let int = |i: usize| get(i)?.parse::<usize>().map_err(|_| bad(TABLE1_HEADER[i]));
        out.push(Table1Record {
            config_id: int(0)?,
            alpha: get(1)?.to_string(),
            beta: get(2)?.to_string(),
            sigma2: get(3)?.to_string(),
            horizon: num(4)?,
            mean: num(5)?,
            std: num(6)?,
            n_ok: int(7)?,
            n_fail: int(8)?,
        });
    }
    Ok(out)
}

pub fn write_curve_csv<W: Write>(w: &mut W, points: &[CurvePoint], header: &str) -> Result<()> {
    comments(w, header)?;
    writeln!(w, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(w, "{},{}", fmt_real(p.horizon), fmt_real(p.median_abs_error))?;
    }
    Ok(())
}

/// `(y, rho(y), s(y))` samples.
pub fn write_scale_samples_csv<W: Write>(w: &mut W, samples: &[(f64, f64, f64)], header: &str) -> Result<()> {
    comments(w, header)?;
    writeln!(w, "{SCALE_SAMPLES_HEADER}")?;
    for &(y, rho, s) in samples {
        writeln!(w, "{},{},{}", fmt_real(y), fmt_real(rho), fmt_real(s))?;
    }
    Ok(())
}

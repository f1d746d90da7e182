use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{optimize_chsh, optimize_chsh_over_p, OptimizerConfig};
use crate::error::{check, Error, Result};
use crate::model::ModelParams;

/// A violation is declared at `s_star > 2 + VIOLATION_MARGIN`.
pub const VIOLATION_MARGIN: f64 = 1e-4;

/// A model parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "T")]
    T,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "n0")]
    N0,
}

impl Axis {
    pub fn get(self, params: &ModelParams) -> f64 {
        match self {
            Axis::P => params.p,
            Axis::T => params.t,
            Axis::Eta => params.eta,
            Axis::N0 => params.n0,
        }
    }

    pub fn set(self, params: ModelParams, value: f64) -> ModelParams {
        let mut out = params;
        match self {
            Axis::P => out.p = value,
            Axis::T => out.t = value,
            Axis::Eta => out.eta = value,
            Axis::N0 => out.n0 = value,
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::T => "T",
            Axis::Eta => "eta",
            Axis::N0 => "n0",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Axis::P),
            "T" | "t" => Ok(Axis::T),
            "eta" => Ok(Axis::Eta),
            "n0" => Ok(Axis::N0),
            _ => Err(Error::InvalidParameter {
                name: "axis",
                value: f64::NAN,
                constraint: "axis in {p, T, eta, n0}",
            }),
        }
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping at width `tol`.
pub fn bisect<F>(mut lo: f64, mut hi: f64, tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { lo, hi, f_lo, f_hi });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates where the optimized CHSH value crosses `2 + VIOLATION_MARGIN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    /// Width of the final bracket.
    pub tol: f64,
    /// Optimize `p` at every trial point; otherwise use `fixed.p`.
    pub optimize_p: bool,
}

impl ThresholdScan {
    pub fn new(axis: Axis, lo: f64, hi: f64) -> Self {
        Self {
            axis,
            lo,
            hi,
            tol: 1e-3,
            optimize_p: true,
        }
    }
}

/// Crossing coordinate of `s_star(axis) - (2 + VIOLATION_MARGIN)`.
///
/// `s_star` must be monotone over the bracket; the other coordinates come from `fixed`.
pub fn threshold_scan(
    scan: &ThresholdScan,
    fixed: &ModelParams,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    check(
        scan.axis != Axis::P || !scan.optimize_p,
        "axis",
        f64::NAN,
        "axis != p when p is optimized",
    )?;
    check(scan.lo < scan.hi, "lo", scan.lo, "lo < hi")?;
    check(scan.tol > 0.0, "tol", scan.tol, "tol > 0")?;
    bisect(scan.lo, scan.hi, scan.tol, |x| {
        let params = scan.axis.set(*fixed, x);
        let s = if scan.optimize_p {
            optimize_chsh_over_p(&params, cfg)?.result.s_star
        } else {
            optimize_chsh(&params, cfg)?.s_star
        };
        Ok(s - (2.0 + VIOLATION_MARGIN))
    })
}

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OracleSession, TruncationPolicy};
use crate::error::{check, Error, Result};
use crate::model::{ClosedForm, ModelParams};

/// Candidate relations between the closed-form `alpha2` and the displacement
/// physically applied to the lossy mode, `beta = c(T) * alpha2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConventionRule {
    #[serde(rename = "T")]
    T,
    #[serde(rename = "sqrt(T)")]
    SqrtT,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "1/sqrt(T)")]
    InvSqrtT,
}

impl ConventionRule {
    pub const ALL: [ConventionRule; 4] = [Self::T, Self::SqrtT, Self::One, Self::InvSqrtT];

    pub fn factor(self, t: f64) -> f64 {
        match self {
            Self::T => t,
            Self::SqrtT => t.sqrt(),
            Self::One => 1.0,
            Self::InvSqrtT => 1.0 / t.sqrt(),
        }
    }
}

impl fmt::Display for ConventionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::T => "T",
            Self::SqrtT => "sqrt(T)",
            Self::One => "1",
            Self::InvSqrtT => "1/sqrt(T)",
        })
    }
}

/// Outcome of the convention calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alpha2Convention {
    /// Passing rule; `None` when `T = 1` makes every candidate equivalent.
    pub rule: Option<ConventionRule>,
    /// Scaling constant at the calibration point.
    pub constant: f64,
    /// Maximal closed-form/oracle deviation for each candidate.
    pub deviations: Vec<(ConventionRule, f64)>,
}

impl Alpha2Convention {
    /// Scaling to apply at transmission `t`.
    pub fn factor(&self, t: f64) -> f64 {
        self.rule.map_or(1.0, |r| r.factor(t))
    }
}

const PASS_THRESHOLD: f64 = 1e-6;

const ALPHA1_GRID: [(f64, f64); 2] = [(0.6, 0.0), (-0.3, 0.4)];
const ALPHA2_GRID: [(f64, f64); 4] = [(0.3, 0.0), (0.8, 0.0), (-0.5, 0.5), (1.2, -0.2)];

/// Determines which candidate scaling makes oracle and closed form agree.
///
/// Deterministic: a fixed amplitude grid, ground-state mechanics.
pub fn calibrate_alpha2_convention(
    p: f64,
    t: f64,
    eta: f64,
    policy: &TruncationPolicy,
) -> Result<Alpha2Convention> {
    check(p > 0.0 && p < 1.0, "p", p, "0 < p < 1")?;
    check(t > 0.0 && t <= 1.0, "T", t, "0 < T <= 1")?;
    check(eta > 0.0 && eta <= 1.0, "eta", eta, "0 < eta <= 1")?;
    if t == 1.0 {
        return Ok(Alpha2Convention {
            rule: None,
            constant: 1.0,
            deviations: ConventionRule::ALL.iter().map(|&r| (r, 0.0)).collect(),
        });
    }

    let form = ClosedForm::new(&ModelParams::ground(p, t, eta)?)?;
    let mut session = OracleSession::new(p, 0.0, t, *policy)?;
    let mut deviations = Vec::with_capacity(4);
    for rule in ConventionRule::ALL {
        let c = rule.factor(t);
        let mut worst = 0.0f64;
        for &(r1, i1) in &ALPHA1_GRID {
            for &(r2, i2) in &ALPHA2_GRID {
                let (a1, a2) = (Complex64::new(r1, i1), Complex64::new(r2, i2));
                let oracle = session.probabilities(eta, a1, a2 * c)?.triple;
                worst = worst.max(oracle.max_abs_diff(&form.triple(a1, a2)));
            }
        }
        deviations.push((rule, worst));
    }

    let passing: Vec<_> = deviations
        .iter()
        .filter(|(_, d)| *d < PASS_THRESHOLD)
        .map(|(r, _)| *r)
        .collect();
    match passing.as_slice() {
        [rule] => Ok(Alpha2Convention {
            rule: Some(*rule),
            constant: rule.factor(t),
            deviations,
        }),
        _ => Err(Error::AmbiguousConvention {
            passing: passing.len(),
        }),
    }
}

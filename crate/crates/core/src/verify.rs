//! Randomized comparison of the closed forms against the Fock-space oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check, Result};
use crate::model::{ClosedForm, ModelParams, ProbabilityTriple};
use crate::oracle::{
    calibrate_alpha2_convention, Alpha2Convention, OracleSession, TruncationPolicy,
};

/// Calibration point used whenever the suite contains lossy cases.
pub const CALIBRATION_POINT: (f64, f64, f64) = (0.1, 0.5, 0.9);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleCheckConfig {
    pub cases: usize,
    pub seed: u64,
    pub p_max: f64,
    pub t_range: (f64, f64),
    pub eta_range: (f64, f64),
    pub n0_max: f64,
    /// Settings are drawn uniformly from the disk of this radius.
    pub alpha_max: f64,
    pub policy: TruncationPolicy,
    pub threshold: f64,
    /// Shifts every closed-form joint by this amount before comparison.
    #[serde(skip_serializing_if = "is_zero")]
    pub corrupt: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            cases: 100,
            seed: 2015,
            p_max: 0.3,
            t_range: (0.1, 1.0),
            eta_range: (0.3, 1.0),
            n0_max: 0.2,
            alpha_max: 1.5,
            policy: TruncationPolicy::default(),
            threshold: 1e-6,
            corrupt: 0.0,
        }
    }
}

impl OracleCheckConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.cases >= 1, "cases", self.cases as f64, "cases >= 1")?;
        check(
            (0.0..1.0).contains(&self.p_max),
            "p_max",
            self.p_max,
            "0 <= p_max < 1",
        )?;
        let (t_lo, t_hi) = self.t_range;
        check(t_lo > 0.0 && t_lo <= 1.0, "t_range.0", t_lo, "0 < T <= 1")?;
        check(
            t_hi >= t_lo && t_hi <= 1.0,
            "t_range.1",
            t_hi,
            "t_range.0 <= T <= 1",
        )?;
        let (e_lo, e_hi) = self.eta_range;
        check(
            e_lo > 0.0 && e_lo <= 1.0,
            "eta_range.0",
            e_lo,
            "0 < eta <= 1",
        )?;
        check(
            e_hi >= e_lo && e_hi <= 1.0,
            "eta_range.1",
            e_hi,
            "eta_range.0 <= eta <= 1",
        )?;
        check(
            self.n0_max.is_finite() && self.n0_max >= 0.0,
            "n0_max",
            self.n0_max,
            "n0_max >= 0",
        )?;
        check(
            self.alpha_max.is_finite() && self.alpha_max >= 0.0,
            "alpha_max",
            self.alpha_max,
            "alpha_max >= 0",
        )?;
        check(
            self.threshold.is_finite() && self.threshold > 0.0,
            "threshold",
            self.threshold,
            "threshold > 0",
        )?;
        check(self.corrupt.is_finite(), "corrupt", self.corrupt, "finite")?;
        self.policy.validate()
    }

    fn lossless_only(&self) -> bool {
        self.t_range == (1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub params: ModelParams,
    pub alpha1: Complex64,
    /// Closed-form coordinate of the second setting.
    pub alpha2: Complex64,
    /// Displacement applied to the lossy mode in the oracle.
    pub alpha2_physical: Complex64,
    pub closed_form: ProbabilityTriple,
    pub oracle: ProbabilityTriple,
    pub deviation: f64,
    pub cutoff: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub config: OracleCheckConfig,
    pub convention: Alpha2Convention,
    pub max_deviation: f64,
    pub passed: bool,
    pub cases: Vec<CaseRecord>,
}

fn disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(r, phi)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Parameter and settings draws of the suite, in case order.
pub fn draw_cases(cfg: &OracleCheckConfig) -> Vec<(ModelParams, Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.cases)
        .map(|_| {
            let params = ModelParams {
                p: uniform(&mut rng, (0.0, cfg.p_max)),
                t: uniform(&mut rng, cfg.t_range),
                eta: uniform(&mut rng, cfg.eta_range),
                n0: uniform(&mut rng, (0.0, cfg.n0_max)),
            };
            let a1 = disk(&mut rng, cfg.alpha_max);
            let a2 = disk(&mut rng, cfg.alpha_max);
            (params, a1, a2)
        })
        .collect()
}

fn run_case(
    cfg: &OracleCheckConfig,
    convention: &Alpha2Convention,
    (params, alpha1, alpha2): (ModelParams, Complex64, Complex64),
) -> Result<CaseRecord> {
    let mut closed_form = ClosedForm::new(&params)?.triple(alpha1, alpha2);
    closed_form.joint += cfg.corrupt;
    let alpha2_physical = alpha2 * convention.factor(params.t);
    let converged = OracleSession::new(params.p, params.n0, params.t, cfg.policy)?.probabilities(
        params.eta,
        alpha1,
        alpha2_physical,
    )?;
    Ok(CaseRecord {
        params,
        alpha1,
        alpha2,
        alpha2_physical,
        closed_form,
        oracle: converged.triple,
        deviation: closed_form.max_abs_diff(&converged.triple),
        cutoff: converged.cutoff,
        residual: converged.residual,
    })
}

/// Calibrates the second-arm convention, then compares closed form and oracle
/// on every drawn case. Non-convergence of any case is an error.
pub fn oracle_check(cfg: &OracleCheckConfig) -> Result<OracleCheckReport> {
    cfg.validate()?;
    let convention = if cfg.lossless_only() {
        Alpha2Convention {
            rule: None,
            constant: 1.0,
            deviations: Vec::new(),
        }
    } else {
        let (p, t, eta) = CALIBRATION_POINT;
        calibrate_alpha2_convention(p, t, eta, &cfg.policy)?
    };
    let cases = draw_cases(cfg)
        .into_par_iter()
        .map(|case| run_case(cfg, &convention, case))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = cases.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(OracleCheckReport {
        config: cfg.clone(),
        convention,
        max_deviation,
        passed: max_deviation <= cfg.threshold,
        cases,
    })
}

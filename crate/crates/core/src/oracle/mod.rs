//! Brute-force verification of the closed forms in a truncated Fock basis.
//!
//! Nothing here reuses [`crate::model`]: the state is prepared by exponentiating
//! the squeezing generator on a thermal seed, loss is a Kraus channel on the
//! mapped mode, and each no-click element is `D(a)^dag (1 - eta)^n D(a)` with
//! the displacement obtained by matrix exponentiation. The per-mode cutoff is
//! doubled until the reported probabilities stop moving.

mod calibrate;
mod povm;
mod state;

pub use calibrate::{calibrate_alpha2_convention, Alpha2Convention, ConventionRule};
pub use povm::{displacement, no_click_operator, NoClickOperator};
pub use state::{build_state, build_state_at, loss_kraus, TwoModeDensityMatrix};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::model::ProbabilityTriple;

/// How the Fock basis is truncated and when a result counts as converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Initial per-mode cutoff `N` (levels `0..=N`).
    pub n_start: usize,
    /// Hard cap on the per-mode cutoff.
    pub n_max: usize,
    /// Extra levels used while exponentiating generators, dropped afterwards.
    pub guard: usize,
    /// Convergence tolerance on probabilities and on the trace deficit.
    pub tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            n_start: 12,
            n_max: 64,
            guard: 8,
            tol: 1e-9,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        check(
            self.n_start >= 4,
            "n_start",
            self.n_start as f64,
            "n_start >= 4",
        )?;
        check(
            self.n_max >= self.n_start,
            "n_max",
            self.n_max as f64,
            "n_max >= n_start",
        )?;
        check(self.tol > 0.0, "tol", self.tol, "tol > 0")
    }

    /// Cutoffs visited by the doubling schedule, ending at `n_max`.
    pub fn ladder(&self) -> Vec<usize> {
        let mut out = vec![self.n_start];
        let mut n = self.n_start;
        while n < self.n_max {
            n = (2 * n).min(self.n_max);
            out.push(n);
        }
        out
    }
}

/// Oracle probabilities together with the cutoff at which they were accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleTriple {
    pub triple: ProbabilityTriple,
    pub cutoff: usize,
    /// Largest change of any probability across the final doubling.
    pub residual: f64,
}

pub(crate) fn validate_state_inputs(p: f64, n0: f64, t: f64) -> Result<()> {
    check(
        p.is_finite() && (0.0..1.0).contains(&p),
        "p",
        p,
        "0 <= p < 1",
    )?;
    check(n0.is_finite() && n0 >= 0.0, "n0", n0, "n0 >= 0")?;
    check(
        t.is_finite() && (0.0..=1.0).contains(&t),
        "T",
        t,
        "0 <= T <= 1",
    )
}

pub(crate) fn validate_eta(eta: f64) -> Result<()> {
    check(
        eta.is_finite() && (0.0..=1.0).contains(&eta),
        "eta",
        eta,
        "0 <= eta <= 1",
    )
}

/// Lazily built states for one `(p, n0, T)`, one per cutoff on the ladder.
///
/// Probabilities for many settings can then share the expensive state build.
#[derive(Debug)]
pub struct OracleSession {
    p: f64,
    n0: f64,
    t: f64,
    policy: TruncationPolicy,
    states: Vec<(usize, TwoModeDensityMatrix)>,
}

impl OracleSession {
    pub fn new(p: f64, n0: f64, t: f64, policy: TruncationPolicy) -> Result<Self> {
        validate_state_inputs(p, n0, t)?;
        policy.validate()?;
        Ok(Self {
            p,
            n0,
            t,
            policy,
            states: Vec::new(),
        })
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    fn state(&mut self, cutoff: usize) -> &TwoModeDensityMatrix {
        let idx = match self.states.iter().position(|(n, _)| *n == cutoff) {
            Some(i) => i,
            None => {
                let rho = build_state_at(self.p, self.n0, self.t, cutoff, self.policy.guard);
                self.states.push((cutoff, rho));
                self.states.len() - 1
            }
        };
        &self.states[idx].1
    }

    /// Triple at a fixed cutoff, no convergence check.
    pub fn probabilities_at(
        &mut self,
        cutoff: usize,
        eta: f64,
        alpha1: Complex64,
        alpha2_physical: Complex64,
    ) -> ProbabilityTriple {
        let guard = self.policy.guard;
        let o1 = NoClickOperator::build(eta, alpha1, cutoff, guard);
        let o2 = NoClickOperator::build(eta, alpha2_physical, cutoff, guard);
        self.state(cutoff).triple(&o1, &o2)
    }

    /// Triple converged by cutoff doubling.
    pub fn probabilities(
        &mut self,
        eta: f64,
        alpha1: Complex64,
        alpha2_physical: Complex64,
    ) -> Result<OracleTriple> {
        validate_eta(eta)?;
        let tol = self.policy.tol;
        let ladder = self.policy.ladder();
        let mut prev = self.probabilities_at(ladder[0], eta, alpha1, alpha2_physical);
        let mut residual = f64::INFINITY;
        for &cutoff in &ladder[1..] {
            let next = self.probabilities_at(cutoff, eta, alpha1, alpha2_physical);
            residual = next.max_abs_diff(&prev);
            let deficit = self.state(cutoff).trace_deficit();
            if residual < tol && deficit <= tol {
                return Ok(OracleTriple {
                    triple: next,
                    cutoff,
                    residual,
                });
            }
            prev = next;
        }
        Err(Error::NonConvergence {
            cutoff: self.policy.n_max,
            residual,
            tol,
        })
    }
}

/// `Tr(rho O1 x O2)`, `Tr(rho O1 x 1)` and `Tr(rho 1 x O2)`, converged per `policy`.
///
/// `alpha2_physical` is the displacement actually applied to the lossy mode.
pub fn oracle_probabilities(
    p: f64,
    n0: f64,
    t: f64,
    eta: f64,
    alpha1: Complex64,
    alpha2_physical: Complex64,
    policy: &TruncationPolicy,
) -> Result<OracleTriple> {
    OracleSession::new(p, n0, t, *policy)?.probabilities(eta, alpha1, alpha2_physical)
}

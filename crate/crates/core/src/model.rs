//! Closed-form click statistics for the lossy two-mode squeezed thermal state
//! measured with displaced, non-number-resolving photon counters.
//!
//! Outcome `+1` is the absence of a click, `-1` is at least one click. Arm 1
//! carries the photon created together with the phonon, arm 2 carries the
//! mapped phonon and sees the mapping efficiency `T` as loss. Both detectors
//! share the efficiency `eta`; the lossy arm behaves like a detector of
//! efficiency `eta' = eta * T` once loss is commuted through the displacement.
//!
//! The thermal expressions (mechanics starting with `n0` excitations) are the
//! ones evaluated by every public operation. The [`ground`] submodule holds the
//! independent `n0 = 0` transcription used to check the thermal reduction.
//!
//! Setting convention: the arm-2 amplitude `alpha2` is the canonical setting
//! coordinate. The displacement physically applied behind the lossy channel is
//! `T * alpha2`; see [`crate::oracle::calibrate_alpha2_convention`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check, Result};

/// Default bound on `|alpha|` for a measurement setting.
pub const DEFAULT_SETTING_BOUND: f64 = 3.0;

/// Abstract Bell-test parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Pair-emission parameter, `1 - p` is the probability that both modes are empty.
    pub p: f64,
    /// Phonon-to-photon mapping efficiency.
    #[serde(rename = "T")]
    pub t: f64,
    /// Detector efficiency, shared by both arms.
    pub eta: f64,
    /// Initial mean mechanical occupation.
    pub n0: f64,
}

impl ModelParams {
    pub fn new(p: f64, t: f64, eta: f64, n0: f64) -> Result<Self> {
        let params = Self { p, t, eta, n0 };
        params.validate()?;
        Ok(params)
    }

    /// Ground-state mechanics, `n0 = 0`.
    pub fn ground(p: f64, t: f64, eta: f64) -> Result<Self> {
        Self::new(p, t, eta, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.p.is_finite() && (0.0..1.0).contains(&self.p),
            "p",
            self.p,
            "0 <= p < 1",
        )?;
        check(
            self.t.is_finite() && (0.0..=1.0).contains(&self.t),
            "T",
            self.t,
            "0 <= T <= 1",
        )?;
        check(
            self.eta.is_finite() && (0.0..=1.0).contains(&self.eta),
            "eta",
            self.eta,
            "0 <= eta <= 1",
        )?;
        check(
            self.n0.is_finite() && self.n0 >= 0.0,
            "n0",
            self.n0,
            "n0 >= 0",
        )
    }

    /// Effective efficiency of the lossy arm, `eta * T`.
    pub fn eta_mapped(&self) -> f64 {
        self.eta * self.t
    }

    pub fn with_p(self, p: f64) -> Self {
        Self { p, ..self }
    }
}

/// One complex displacement amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct Setting(Complex64);

impl Setting {
    /// Setting bounded by [`DEFAULT_SETTING_BOUND`].
    pub fn new(alpha: Complex64) -> Result<Self> {
        Self::bounded(alpha, DEFAULT_SETTING_BOUND)
    }

    pub fn bounded(alpha: Complex64, bound: f64) -> Result<Self> {
        check(
            alpha.re.is_finite(),
            "alpha.re",
            alpha.re,
            "a finite real part",
        )?;
        check(
            alpha.im.is_finite(),
            "alpha.im",
            alpha.im,
            "a finite imaginary part",
        )?;
        check(
            alpha.norm() <= bound,
            "|alpha|",
            alpha.norm(),
            "|alpha| <= the configured setting bound",
        )?;
        Ok(Self(alpha))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn alpha(&self) -> Complex64 {
        self.0
    }

    /// Unvalidated constructor for optimizer internals that project onto the bound.
    pub(crate) fn raw(alpha: Complex64) -> Self {
        Self(alpha)
    }
}

impl TryFrom<Complex64> for Setting {
    type Error = crate::Error;

    fn try_from(alpha: Complex64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<Setting> for Complex64 {
    fn from(s: Setting) -> Self {
        s.0
    }
}

/// The four CHSH settings `(alpha1, alpha1', alpha2, alpha2')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsQuad {
    pub a1: Setting,
    pub a1p: Setting,
    pub a2: Setting,
    pub a2p: Setting,
}

impl SettingsQuad {
    pub fn new(a1: Setting, a1p: Setting, a2: Setting, a2p: Setting) -> Self {
        Self { a1, a1p, a2, a2p }
    }

    pub fn from_real(a1: f64, a1p: f64, a2: f64, a2p: f64) -> Result<Self> {
        Ok(Self::new(
            Setting::real(a1)?,
            Setting::real(a1p)?,
            Setting::real(a2)?,
            Setting::real(a2p)?,
        ))
    }

    /// Amplitudes in `[a1, a1p, a2, a2p]` order.
    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.a1.0, self.a1p.0, self.a2.0, self.a2p.0]
    }
}

/// `P(+1,+1)` together with both `P(+1)` marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTriple {
    pub joint: f64,
    pub marg1: f64,
    pub marg2: f64,
}

impl ProbabilityTriple {
    /// Correlator of the `+-1` outcomes built from this triple.
    pub fn correlator(&self) -> f64 {
        correlator_from(self.joint, self.marg1, self.marg2)
    }

    /// Range and Frechet-bound consistency, up to `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let in_unit = |x: f64| (-tol..=1.0 + tol).contains(&x);
        in_unit(self.joint)
            && in_unit(self.marg1)
            && in_unit(self.marg2)
            && self.joint <= self.marg1.min(self.marg2) + tol
            && self.joint >= (self.marg1 + self.marg2 - 1.0).max(0.0) - tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.joint - other.joint)
            .abs()
            .max((self.marg1 - other.marg1).abs())
            .max((self.marg2 - other.marg2).abs())
    }
}

fn correlator_from(joint: f64, marg1: f64, marg2: f64) -> f64 {
    1.0 - 2.0 * (marg1 + marg2) + 4.0 * joint
}

/// Coefficients of the thermal closed forms, computed once per parameter set.
///
/// All three probabilities share the structure `(1 - p) / D * exp(-Q / D)` with
/// `Q` a quadratic form in the amplitudes. Evaluating `Q / D` as one real
/// argument keeps them finite for any amplitude.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm {
    weight: f64,
    // marginal of arm 1: (1-p)/d1 * exp(-c1 |a1|^2)
    d1: f64,
    c1: f64,
    // marginal of arm 2: (1-p)/d2 * exp(-c2 |a2|^2)
    d2: f64,
    c2: f64,
    // joint: (1-p)/dj * exp(-(j1 |a1|^2 + j2 |a2|^2 + jx Re(a1 a2)))
    dj: f64,
    j1: f64,
    j2: f64,
    jx: f64,
}

impl ClosedForm {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::from_valid(params))
    }

    pub(crate) fn from_valid(params: &ModelParams) -> Self {
        let ModelParams { p, t, eta, n0 } = *params;
        let eta_m = eta * t;
        let eta_n = eta * (1.0 + n0);
        let weight = 1.0 - p;

        // p (eta + eta n0 - 1) + 1
        let d1 = 1.0 - p * (1.0 - eta_n);
        // eta' n0 + (eta' - 1) p + 1
        let d2 = 1.0 - p * (1.0 - eta_m) + eta_m * n0;
        // eta' n0 - (eta' - 1) p (eta + eta n0 - 1) + 1
        let dj = 1.0 - p * (1.0 - eta_n) * (1.0 - eta_m) + eta_m * n0;

        let c1 = eta * weight / d1;
        let c2 = eta_m * weight * t / d2;
        let j1 = eta * d2 / dj;
        let j2 = eta_m * t * d1 / dj;
        // Re(a1 a2) appears as (a1* a2* + a1 a2) = 2 Re(a1 a2).
        let jx = 2.0 * eta * eta_m * (1.0 + n0) * p.sqrt() * t.sqrt() / dj;

        Self {
            weight,
            d1,
            c1,
            d2,
            c2,
            dj,
            j1,
            j2,
            jx,
        }
    }

    pub fn marginal_one(&self, a1: Complex64) -> f64 {
        self.weight / self.d1 * (-self.c1 * a1.norm_sqr()).exp()
    }

    pub fn marginal_two(&self, a2: Complex64) -> f64 {
        self.weight / self.d2 * (-self.c2 * a2.norm_sqr()).exp()
    }

    pub fn joint(&self, a1: Complex64, a2: Complex64) -> f64 {
        let arg = self.j1 * a1.norm_sqr() + self.j2 * a2.norm_sqr() + self.jx * (a1 * a2).re;
        self.weight / self.dj * (-arg).exp()
    }

    pub fn triple(&self, a1: Complex64, a2: Complex64) -> ProbabilityTriple {
        ProbabilityTriple {
            joint: self.joint(a1, a2),
            marg1: self.marginal_one(a1),
            marg2: self.marginal_two(a2),
        }
    }

    pub fn correlator(&self, a1: Complex64, a2: Complex64) -> f64 {
        correlator_from(
            self.joint(a1, a2),
            self.marginal_one(a1),
            self.marginal_two(a2),
        )
    }

    /// Signed `E(a1,a2) + E(a1',a2) + E(a1,a2') - E(a1',a2')`.
    pub fn chsh(&self, [a1, a1p, a2, a2p]: [Complex64; 4]) -> f64 {
        let (m1, m1p) = (self.marginal_one(a1), self.marginal_one(a1p));
        let (m2, m2p) = (self.marginal_two(a2), self.marginal_two(a2p));
        correlator_from(self.joint(a1, a2), m1, m2)
            + correlator_from(self.joint(a1p, a2), m1p, m2)
            + correlator_from(self.joint(a1, a2p), m1, m2p)
            - correlator_from(self.joint(a1p, a2p), m1p, m2p)
    }
}

/// `P(+1 | alpha1)` on the arm that keeps the photon.
pub fn marginal_one(params: &ModelParams, a1: Setting) -> Result<f64> {
    Ok(ClosedForm::new(params)?.marginal_one(a1.alpha()))
}

/// `P(+1 | alpha2)` on the mapped (lossy) arm.
pub fn marginal_two(params: &ModelParams, a2: Setting) -> Result<f64> {
    Ok(ClosedForm::new(params)?.marginal_two(a2.alpha()))
}

/// `P(+1 +1 | alpha1 alpha2)`.
pub fn joint(params: &ModelParams, a1: Setting, a2: Setting) -> Result<f64> {
    Ok(ClosedForm::new(params)?.joint(a1.alpha(), a2.alpha()))
}

pub fn probabilities(params: &ModelParams, a1: Setting, a2: Setting) -> Result<ProbabilityTriple> {
    Ok(ClosedForm::new(params)?.triple(a1.alpha(), a2.alpha()))
}

pub fn correlator(params: &ModelParams, a1: Setting, a2: Setting) -> Result<f64> {
    Ok(ClosedForm::new(params)?.correlator(a1.alpha(), a2.alpha()))
}

/// Signed CHSH combination; the Bell test compares `|S|` with 2.
pub fn chsh(params: &ModelParams, quad: &SettingsQuad) -> Result<f64> {
    Ok(ClosedForm::new(params)?.chsh(quad.amplitudes()))
}

/// Ground-state (`n0 = 0`) expressions, transcribed separately from the thermal ones.
pub mod ground {
    use num_complex::Complex64;

    use super::ModelParams;

    pub fn marginal_one(params: &ModelParams, a1: Complex64) -> f64 {
        let ModelParams { p, eta, .. } = *params;
        let den = 1.0 - p * (1.0 - eta);
        (1.0 - p) / den * (-(eta * (1.0 - p) / den) * a1.norm_sqr()).exp()
    }

    pub fn marginal_two(params: &ModelParams, a2: Complex64) -> f64 {
        let ModelParams { p, t, eta, .. } = *params;
        let eta_m = eta * t;
        let den = 1.0 - p * (1.0 - eta_m);
        (1.0 - p) / den * (-(eta_m * (1.0 - p) * t / den) * a2.norm_sqr()).exp()
    }

    /// The cross term carries a minus sign, matching the squeezed state with
    /// amplitude `-sqrt(p)` on the `|n, n>` ladder.
    pub fn joint(params: &ModelParams, a1: Complex64, a2: Complex64) -> f64 {
        let ModelParams { p, t, eta, .. } = *params;
        let eta_m = eta * t;
        let den = 1.0 - p * (1.0 - eta) * (1.0 - eta_m);
        let local = (eta * (1.0 - p * (1.0 - eta_m)) / den) * a1.norm_sqr()
            + (eta_m * t * (1.0 - p * (1.0 - eta)) / den) * a2.norm_sqr();
        let cross = (2.0 * eta * eta_m * p.sqrt() * t.sqrt() / den) * (a1 * a2).re;
        (1.0 - p) / den * (-(local + cross)).exp()
    }
}

//! Cavity-linewidth scan of the optimized CHSH value for a device operating point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{model_from_device, regime_check, DeviceConfig, RegimeReport};
use crate::error::{check, Result};
use crate::model::{ModelParams, SettingsQuad};
use crate::optimizer::{optimize_chsh, optimize_chsh_over_p, OptimizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeasibilityConfig {
    /// Operating point; its `kappa_hz` is replaced by each scan value.
    pub device: DeviceConfig,
    pub eta: f64,
    pub kappa_min_hz: f64,
    pub kappa_max_hz: f64,
    /// Linearly spaced scan points, both ends included.
    pub kappa_steps: usize,
    pub target: f64,
    pub tolerance: f64,
    pub margin: f64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self {
            device: DeviceConfig::nanobeam(),
            eta: 0.9,
            kappa_min_hz: 50e6,
            kappa_max_hz: 1e9,
            kappa_steps: 20,
            target: 2.19,
            tolerance: 0.05,
            margin: 10.0,
        }
    }
}

impl FeasibilityConfig {
    pub fn validate(&self) -> Result<()> {
        check(
            self.kappa_min_hz.is_finite() && self.kappa_min_hz > 0.0,
            "kappa_min",
            self.kappa_min_hz,
            "kappa_min > 0",
        )?;
        check(
            self.kappa_max_hz.is_finite() && self.kappa_max_hz >= self.kappa_min_hz,
            "kappa_max",
            self.kappa_max_hz,
            "kappa_max >= kappa_min",
        )?;
        check(
            self.kappa_steps >= 1,
            "kappa_steps",
            self.kappa_steps as f64,
            "kappa_steps >= 1",
        )?;
        check(
            self.tolerance.is_finite() && self.tolerance >= 0.0,
            "tolerance",
            self.tolerance,
            "tolerance >= 0",
        )?;
        check(self.target.is_finite(), "target", self.target, "finite")?;
        let mut dev = self.device.to_angular();
        dev.kappa = std::f64::consts::TAU * self.kappa_min_hz;
        dev.validate()?;
        ModelParams::new(0.0, 1.0, self.eta, dev.n0)?;
        regime_check(&dev, self.margin).map(|_| ())
    }

    pub fn kappa_grid_hz(&self) -> Vec<f64> {
        if self.kappa_steps == 1 {
            return vec![self.kappa_min_hz];
        }
        let span = self.kappa_max_hz - self.kappa_min_hz;
        (0..self.kappa_steps)
            .map(|i| {
                if i + 1 == self.kappa_steps {
                    self.kappa_max_hz
                } else {
                    self.kappa_min_hz + span * i as f64 / (self.kappa_steps - 1) as f64
                }
            })
            .collect()
    }
}

/// Best `p` at fixed `T`, with the pump photon number that would produce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpOptimum {
    pub p: f64,
    pub s_star: f64,
    /// `None` when the pulse length or coupling is zero and no pump produces pairs.
    pub n_plus: Option<f64>,
    /// Regime report with `n_plus` replaced by the optimal pump.
    pub regime: Option<RegimeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityPoint {
    pub kappa_hz: f64,
    pub params: ModelParams,
    pub regime: RegimeReport,
    /// Settings-optimized CHSH at the device pump `n_plus`.
    pub s_star: f64,
    pub quad: SettingsQuad,
    pub pump_optimum: PumpOptimum,
}

/// Where (if anywhere) the scan lands within tolerance of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetMatch {
    /// Some regime-passing point lies within tolerance.
    pub attained: bool,
    /// Some point lies within tolerance, regime flags ignored.
    pub attained_ignoring_regime: bool,
    /// Point closest to the target among regime-passing points, or among all
    /// points when none passes.
    pub kappa_hz: f64,
    pub s_star: f64,
    pub regime_pass: bool,
    /// Point closest to the target regardless of regime flags.
    pub closest_kappa_hz: f64,
    pub closest_s_star: f64,
    pub closest_regime_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySummary {
    pub target: f64,
    pub tolerance: f64,
    /// Device pump photon number as given.
    pub device_pump: TargetMatch,
    /// Pump photon number optimized per point.
    pub optimized_pump: TargetMatch,
    /// Largest settings-optimized CHSH at the device pump among regime-passing points.
    pub best_regime_passing: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub config: FeasibilityConfig,
    pub points: Vec<FeasibilityPoint>,
    pub summary: FeasibilitySummary,
}

/// Pump photon number that yields pair probability `p` during the first pulse:
/// inverse of `p = 1 - exp(-4 g0^2 n_plus T1 / kappa)`.
fn n_plus_for(p: f64, g0: f64, kappa: f64, t1: f64) -> Option<f64> {
    let rate = 4.0 * g0 * g0 * t1 / kappa;
    (rate > 0.0).then(|| -(-p).ln_1p() / rate)
}

fn scan_point(
    cfg: &FeasibilityConfig,
    opt: &OptimizerConfig,
    kappa_hz: f64,
) -> Result<FeasibilityPoint> {
    let mut dev = cfg.device.to_angular();
    dev.kappa = std::f64::consts::TAU * kappa_hz;
    let (params, _) = model_from_device(&dev, cfg.eta)?;
    let regime = regime_check(&dev, cfg.margin)?;
    let at_device = optimize_chsh(&params, opt)?;

    let best = optimize_chsh_over_p(&params, opt)?;
    let n_plus = n_plus_for(best.p_star, dev.g0, dev.kappa, dev.t1);
    let pump_regime = match n_plus {
        Some(n) => {
            let mut pumped = dev;
            pumped.n_plus = n;
            Some(regime_check(&pumped, cfg.margin)?)
        }
        None => None,
    };
    Ok(FeasibilityPoint {
        kappa_hz,
        params,
        regime,
        s_star: at_device.s_star,
        quad: at_device.quad,
        pump_optimum: PumpOptimum {
            p: best.p_star,
            s_star: best.result.s_star,
            n_plus,
            regime: pump_regime,
        },
    })
}

fn closest(target: f64, tolerance: f64, candidates: &[(f64, f64, bool)]) -> TargetMatch {
    let distance = |c: &(f64, f64, bool)| (c.1 - target).abs();
    // first index wins ties
    let pick = |key: &dyn Fn(&(f64, f64, bool)) -> (bool, f64)| {
        candidates[1..].iter().fold(
            candidates[0],
            |best, c| {
                if key(c) < key(&best) {
                    *c
                } else {
                    best
                }
            },
        )
    };
    let preferred = pick(&|c| (!c.2, distance(c)));
    let any = pick(&|c| (false, distance(c)));
    let within = |c: &&(f64, f64, bool)| distance(c) <= tolerance;
    TargetMatch {
        attained: candidates.iter().filter(within).any(|c| c.2),
        attained_ignoring_regime: candidates.iter().any(|c| within(&c)),
        kappa_hz: preferred.0,
        s_star: preferred.1,
        regime_pass: preferred.2,
        closest_kappa_hz: any.0,
        closest_s_star: any.1,
        closest_regime_pass: any.2,
    }
}

pub fn feasibility_scan(
    cfg: &FeasibilityConfig,
    opt: &OptimizerConfig,
) -> Result<FeasibilityReport> {
    cfg.validate()?;
    opt.validate()?;
    let points = cfg
        .kappa_grid_hz()
        .into_par_iter()
        .map(|k| scan_point(cfg, opt, k))
        .collect::<Result<Vec<_>>>()?;

    let device: Vec<_> = points
        .iter()
        .map(|pt| (pt.kappa_hz, pt.s_star, pt.regime.all_pass()))
        .collect();
    let pumped: Vec<_> = points
        .iter()
        .map(|pt| {
            let pass = pt.pump_optimum.regime.is_some_and(|r| r.all_pass());
            (pt.kappa_hz, pt.pump_optimum.s_star, pass)
        })
        .collect();
    let best_regime_passing =
        device
            .iter()
            .filter(|c| c.2)
            .fold(None, |acc: Option<(f64, f64)>, c| match acc {
                Some(a) if a.1 >= c.1 => Some(a),
                _ => Some((c.0, c.1)),
            });
    Ok(FeasibilityReport {
        config: cfg.clone(),
        summary: FeasibilitySummary {
            target: cfg.target,
            tolerance: cfg.tolerance,
            device_pump: closest(cfg.target, cfg.tolerance, &device),
            optimized_pump: closest(cfg.target, cfg.tolerance, &pumped),
            best_regime_passing,
        },
        points,
    })
}

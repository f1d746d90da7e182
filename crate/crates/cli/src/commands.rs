use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use optobell_core::device::{
    effective_rates, model_from_device, regime_check, DEFAULT_REGIME_MARGIN,
};
use optobell_core::feasibility::{feasibility_scan, FeasibilityConfig};
use optobell_core::model::{probabilities, Setting};
use optobell_core::optimizer::{optimize_chsh, optimize_chsh_over_p, Axis};
use optobell_core::sweep::{render_svg, run_sweep, write_csv, PStrategy, SweepSpec};
use optobell_core::verify::oracle_check;
use optobell_core::{Complex64, Error, ModelParams, OptimizerConfig};
use serde_json::json;

use crate::config::FileConfig;
use crate::record::{Outputs, RunRecord};
use crate::{Cli, Command};

pub const VERIFICATION_FAILURE: u8 = 1;
pub const INVALID_INPUT: u8 = 2;

struct Ctx<'a> {
    cli: &'a Cli,
    file: FileConfig,
    start: Instant,
}

pub fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let ctx = Ctx {
        cli,
        file: FileConfig::load(cli.common.config.as_deref())?,
        start: Instant::now(),
    };
    match &cli.command {
        Command::Probe { alpha1, alpha2 } => ctx.probe(*alpha1, *alpha2),
        Command::Chsh { optimize_p } => ctx.chsh(*optimize_p),
        Command::Sweep { svg, .. } => ctx.sweep(svg.clone()),
        Command::OracleCheck {
            cases,
            lossless,
            corrupt,
        } => ctx.oracle_check(*cases, *lossless, *corrupt),
        Command::Device { kappa_hz, margin } => ctx.device(*kappa_hz, *margin),
        Command::Feasibility {
            kappa_min,
            kappa_max,
            kappa_steps,
        } => ctx.feasibility(*kappa_min, *kappa_max, *kappa_steps),
    }
}

impl Ctx<'_> {
    /// Model parameters from flags, then the config file, then the lossless
    /// ground-state defaults. `p` has no default unless `p_default` is given.
    fn model(&self, p_default: Option<f64>) -> anyhow::Result<ModelParams> {
        let (c, m) = (&self.cli.common, &self.file.model);
        let p =
            c.p.or(m.p)
                .or(p_default)
                .ok_or_else(|| anyhow!("missing model parameter `p`"))?;
        let t = c.t.or(m.t).unwrap_or(1.0);
        let eta = c.eta.or(m.eta).unwrap_or(1.0);
        let n0 = c.n0.or(m.n0).unwrap_or(0.0);
        Ok(ModelParams::new(p, t, eta, n0)?)
    }

    fn optimizer(&self) -> anyhow::Result<OptimizerConfig> {
        let (c, o) = (&self.cli.common, &self.file.optimizer);
        let defaults = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            restarts: c.restarts.or(o.restarts).unwrap_or(defaults.restarts),
            real_only: !c.complex && o.real_only.unwrap_or(defaults.real_only),
            seed: c.seed.or(o.seed).unwrap_or(defaults.seed),
            ..defaults
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn json_path(&self) -> Option<PathBuf> {
        self.cli
            .common
            .out
            .clone()
            .or_else(|| self.file.output.json.clone())
    }

    fn emit(
        &self,
        mut record: RunRecord,
        out: &mut Outputs,
        path: Option<PathBuf>,
    ) -> anyhow::Result<()> {
        if self.cli.common.timing {
            record.wall_clock_s = Some(self.start.elapsed().as_secs_f64());
        }
        let text = record.to_json()?;
        if let Some(path) = path {
            out.file(path, text.clone());
        }
        out.print(&text);
        Ok(())
    }

    fn single(&self, record: RunRecord) -> anyhow::Result<ExitCode> {
        let mut out = Outputs::default();
        self.emit(record, &mut out, self.json_path())?;
        out.commit()?;
        Ok(ExitCode::SUCCESS)
    }

    fn probe(
        &self,
        alpha1: Option<Complex64>,
        alpha2: Option<Complex64>,
    ) -> anyhow::Result<ExitCode> {
        let params = self.model(None)?;
        let s = &self.file.settings;
        let zero = Complex64::new(0.0, 0.0);
        let a1 = alpha1.or(s.alpha1).unwrap_or(zero);
        let a2 = alpha2.or(s.alpha2).unwrap_or(zero);
        let triple = probabilities(&params, Setting::new(a1)?, Setting::new(a2)?)?;
        let record = RunRecord::new(
            "probe",
            None,
            json!({ "model": params, "alpha1": a1, "alpha2": a2 }),
            json!({
                "joint": triple.joint,
                "marg1": triple.marg1,
                "marg2": triple.marg2,
                "correlator": triple.correlator(),
            }),
        )?;
        self.single(record)
    }

    fn chsh(&self, optimize_p: bool) -> anyhow::Result<ExitCode> {
        let params = self.model(optimize_p.then_some(0.0))?;
        let cfg = self.optimizer()?;
        let (outputs, params) = if optimize_p {
            let best = optimize_chsh_over_p(&params, &cfg)?;
            let mut v = serde_json::to_value(best.result)?;
            v["p_star"] = json!(best.p_star);
            (v, params.with_p(best.p_star))
        } else {
            (serde_json::to_value(optimize_chsh(&params, &cfg)?)?, params)
        };
        let inputs = json!({ "model": params, "optimize_p": optimize_p, "optimizer": cfg });
        self.single(RunRecord::new("chsh", Some(cfg.seed), inputs, outputs)?)
    }

    fn sweep_spec(&self) -> anyhow::Result<SweepSpec> {
        let Command::Sweep {
            axis,
            min,
            max,
            steps,
            strategy,
            series,
            ..
        } = &self.cli.command
        else {
            unreachable!("sweep spec outside the sweep command")
        };
        let f = &self.file.sweep;
        let missing = |name: &str| anyhow!("missing sweep parameter `{name}`");
        let axis = axis.or(f.axis).ok_or_else(|| missing("axis"))?;
        let strategy = strategy.or(f.strategy).unwrap_or(PStrategy::Fixed);
        let p_free = strategy == PStrategy::Optimized || axis == Axis::P;
        Ok(SweepSpec {
            axis,
            min: min.or(f.min).ok_or_else(|| missing("min"))?,
            max: max.or(f.max).ok_or_else(|| missing("max"))?,
            steps: steps.or(f.steps).ok_or_else(|| missing("steps"))?,
            fixed: self.model(p_free.then_some(0.0))?,
            strategy,
            series: series.clone().or_else(|| f.series.clone()),
        })
    }

    fn sweep(&self, svg: Option<PathBuf>) -> anyhow::Result<ExitCode> {
        let spec = self.sweep_spec()?;
        let cfg = self.optimizer()?;
        let rows = run_sweep(&spec, &cfg)?;

        let mut csv = Vec::new();
        write_csv(&rows, &mut csv).context("cannot format CSV")?;
        let csv_path = self
            .cli
            .common
            .out
            .clone()
            .or_else(|| self.file.output.csv.clone());
        let svg_path = svg.or_else(|| self.file.output.svg.clone());

        let mut out = Outputs::default();
        if let Some(path) = &svg_path {
            out.file(path.clone(), render_svg(&spec, &rows));
        }
        let record = RunRecord::new(
            "sweep",
            Some(cfg.seed),
            json!({ "sweep": spec, "optimizer": cfg }),
            json!({
                "rows": rows.len(),
                "csv": csv_path,
                "svg": svg_path,
                "max_s_star": rows.iter().map(|r| r.s_star).fold(f64::NEG_INFINITY, f64::max),
            }),
        )?;
        match csv_path {
            Some(path) => {
                out.file(path, csv);
                self.emit(record, &mut out, self.file.output.json.clone())?;
            }
            None => {
                out.print(std::str::from_utf8(&csv)?);
                if let Some(path) = self.file.output.json.clone() {
                    out.file(path, record.to_json()?);
                }
            }
        }
        out.commit()?;
        Ok(ExitCode::SUCCESS)
    }

    fn oracle_check(
        &self,
        cases: Option<usize>,
        lossless: bool,
        corrupt: Option<f64>,
    ) -> anyhow::Result<ExitCode> {
        let mut cfg = self.file.oracle_check.clone().unwrap_or_default();
        cfg.cases = cases.unwrap_or(cfg.cases);
        cfg.seed = self.cli.common.seed.unwrap_or(cfg.seed);
        if lossless {
            cfg.t_range = (1.0, 1.0);
        }
        cfg.corrupt = corrupt.unwrap_or(cfg.corrupt);
        let report = match oracle_check(&cfg) {
            Ok(report) => report,
            Err(e @ Error::InvalidParameter { .. }) => return Err(e.into()),
            Err(e) => {
                eprintln!("verification failed: {e}");
                return Ok(ExitCode::from(VERIFICATION_FAILURE));
            }
        };
        let passed = report.passed;
        let mut outputs = serde_json::to_value(&report)?;
        outputs
            .as_object_mut()
            .expect("report is an object")
            .remove("config");
        let record = RunRecord::new("oracle-check", Some(cfg.seed), &cfg, outputs)?;
        let mut out = Outputs::default();
        self.emit(record, &mut out, self.json_path())?;
        out.commit()?;
        if passed {
            Ok(ExitCode::SUCCESS)
        } else {
            eprintln!(
                "verification failed: max deviation {:e} exceeds {:e}",
                report.max_deviation, cfg.threshold
            );
            Ok(ExitCode::from(VERIFICATION_FAILURE))
        }
    }

    fn eta(&self, default: f64) -> f64 {
        self.cli
            .common
            .eta
            .or(self.file.model.eta)
            .unwrap_or(default)
    }

    fn device(&self, kappa_hz: Option<f64>, margin: Option<f64>) -> anyhow::Result<ExitCode> {
        let mut dev_hz = self.file.device()?;
        dev_hz.kappa_hz = kappa_hz.unwrap_or(dev_hz.kappa_hz);
        let margin = margin.unwrap_or(DEFAULT_REGIME_MARGIN);
        let eta = self.eta(1.0);
        let dev = dev_hz.to_angular();
        let (params, _) = model_from_device(&dev, eta)?;
        let regime = regime_check(&dev, margin)?;
        let (gbar_plus, gbar_minus) = effective_rates(&dev)?;
        let tau = std::f64::consts::TAU;
        let record = RunRecord::new(
            "device",
            None,
            json!({ "device": dev_hz, "eta": eta, "margin": margin }),
            json!({
                "params": params,
                "regime": regime,
                "gbar_plus_hz": gbar_plus / tau,
                "gbar_minus_hz": gbar_minus / tau,
            }),
        )?;
        self.single(record)
    }

    fn feasibility(
        &self,
        kappa_min: Option<f64>,
        kappa_max: Option<f64>,
        kappa_steps: Option<usize>,
    ) -> anyhow::Result<ExitCode> {
        let f = &self.file.feasibility;
        let defaults = FeasibilityConfig::default();
        let cfg = FeasibilityConfig {
            device: self.file.device()?,
            eta: self.eta(defaults.eta),
            kappa_min_hz: kappa_min
                .or(f.kappa_min_hz)
                .unwrap_or(defaults.kappa_min_hz),
            kappa_max_hz: kappa_max
                .or(f.kappa_max_hz)
                .unwrap_or(defaults.kappa_max_hz),
            kappa_steps: kappa_steps
                .or(f.kappa_steps)
                .unwrap_or(defaults.kappa_steps),
            target: f.target.unwrap_or(defaults.target),
            tolerance: f.tolerance.unwrap_or(defaults.tolerance),
            margin: f.margin.unwrap_or(defaults.margin),
        };
        let opt = self.optimizer()?;
        let report = feasibility_scan(&cfg, &opt)?;
        let record = RunRecord::new(
            "feasibility",
            Some(opt.seed),
            json!({ "feasibility": cfg, "optimizer": opt }),
            json!({ "summary": report.summary, "points": report.points }),
        )?;
        self.single(record)
    }
}

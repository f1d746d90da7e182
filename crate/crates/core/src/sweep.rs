//! One-dimensional parameter sweeps of the optimized CHSH value, with CSV and
//! SVG renderings.

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check, Result};
use crate::model::{ModelParams, Setting, SettingsQuad};
use crate::optimizer::{optimize_chsh, optimize_chsh_over_p, Axis, OptimizerConfig};

/// How `p` is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PStrategy {
    #[serde(rename = "fixed-p")]
    Fixed,
    #[serde(rename = "p-optimized")]
    Optimized,
}

/// Several curves in one sweep, one per value of `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Values of the non-swept parameters.
    pub fixed: ModelParams,
    pub strategy: PStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check(
            self.min.is_finite() && self.max.is_finite() && self.min < self.max,
            "min",
            self.min,
            "min < max",
        )?;
        check(self.steps >= 2, "steps", self.steps as f64, "steps >= 2")?;
        check(
            !(self.axis == Axis::P && self.strategy == PStrategy::Optimized),
            "axis",
            f64::NAN,
            "axis != p for the p-optimized strategy",
        )?;
        if let Some(series) = &self.series {
            check(
                series.axis != self.axis,
                "series.axis",
                f64::NAN,
                "series axis differs from the swept axis",
            )?;
            check(
                !series.values.is_empty(),
                "series.values",
                0.0,
                "at least one series value",
            )?;
        }
        for params in self.curves() {
            for x in [self.min, self.max] {
                let probe = self.axis.set(params, x);
                let probe = match self.strategy {
                    PStrategy::Optimized => probe.with_p(0.0),
                    PStrategy::Fixed => probe,
                };
                probe.validate()?;
            }
        }
        Ok(())
    }

    /// Evenly spaced grid including both end points.
    pub fn grid(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    /// Base parameters of each curve.
    pub fn curves(&self) -> Vec<ModelParams> {
        match &self.series {
            None => vec![self.fixed],
            Some(s) => s
                .values
                .iter()
                .map(|&v| s.axis.set(self.fixed, v))
                .collect(),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub params: ModelParams,
    pub s_star: f64,
    pub quad: SettingsQuad,
    pub converged: bool,
}

/// Evaluates every grid point of every curve. Points run in parallel; rows
/// come back in curve-major grid order.
pub fn run_sweep(spec: &SweepSpec, cfg: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    let points: Vec<(f64, ModelParams)> = spec
        .curves()
        .into_iter()
        .flat_map(|base| grid.iter().map(move |&x| (x, spec.axis.set(base, x))))
        .collect();
    points
        .par_iter()
        .map(|&(x, params)| {
            let (params, result) = match spec.strategy {
                PStrategy::Fixed => (params, optimize_chsh(&params, cfg)?),
                PStrategy::Optimized => {
                    let best = optimize_chsh_over_p(&params, cfg)?;
                    (params.with_p(best.p_star), best.result)
                }
            };
            Ok(SweepRow {
                axis_value: x,
                params,
                s_star: result.s_star,
                quad: result.quad,
                converged: result.converged,
            })
        })
        .collect()
}

/// Rounds to 12 significant digits, the precision of all written outputs.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub const CSV_HEADER: &str =
    "axis_value,p,T,eta,n0,s_star,a1_re,a1_im,a1p_re,a1p_im,a2_re,a2_im,a2p_re,a2p_im,converged";

/// Flat CSV layout of a [`SweepRow`]; field order is the column order.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    axis_value: f64,
    p: f64,
    #[serde(rename = "T")]
    t: f64,
    eta: f64,
    n0: f64,
    s_star: f64,
    a1_re: f64,
    a1_im: f64,
    a1p_re: f64,
    a1p_im: f64,
    a2_re: f64,
    a2_im: f64,
    a2p_re: f64,
    a2p_im: f64,
    converged: bool,
}

impl From<&SweepRow> for CsvRecord {
    fn from(row: &SweepRow) -> Self {
        let [a1, a1p, a2, a2p] = row
            .quad
            .amplitudes()
            .map(|a| Complex64::new(round_sig12(a.re), round_sig12(a.im)));
        Self {
            axis_value: round_sig12(row.axis_value),
            p: round_sig12(row.params.p),
            t: round_sig12(row.params.t),
            eta: round_sig12(row.params.eta),
            n0: round_sig12(row.params.n0),
            s_star: round_sig12(row.s_star),
            a1_re: a1.re,
            a1_im: a1.im,
            a1p_re: a1p.re,
            a1p_im: a1p.im,
            a2_re: a2.re,
            a2_im: a2.im,
            a2p_re: a2p.re,
            a2p_im: a2p.im,
            converged: row.converged,
        }
    }
}

impl From<CsvRecord> for SweepRow {
    fn from(r: CsvRecord) -> Self {
        let s = |re, im| Setting::raw(Complex64::new(re, im));
        Self {
            axis_value: r.axis_value,
            params: ModelParams {
                p: r.p,
                t: r.t,
                eta: r.eta,
                n0: r.n0,
            },
            s_star: r.s_star,
            quad: SettingsQuad::new(
                s(r.a1_re, r.a1_im),
                s(r.a1p_re, r.a1p_im),
                s(r.a2_re, r.a2_im),
                s(r.a2p_re, r.a2p_im),
            ),
            converged: r.converged,
        }
    }
}

/// Writes the header and one row per grid point, numbers at 12 significant digits.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        writer.serialize(CsvRecord::from(row))?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses the output of [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> csv::Result<Vec<SweepRow>> {
    csv::Reader::from_reader(input)
        .deserialize::<CsvRecord>()
        .map(|r| r.map(SweepRow::from))
        .collect()
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Line chart of `s_star` against the swept axis with the local bound drawn at 2.
pub fn render_svg(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let (w, h) = (720.0, 450.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let s_values = rows.iter().map(|r| r.s_star);
    let lo = s_values.clone().fold(2.0f64, f64::min);
    let hi = s_values.fold(2.0f64, f64::max);
    let pad = ((hi - lo) * 0.08).max(0.02);
    let (y_lo, y_hi) = (lo - pad, hi + pad);
    let sx = |x: f64| left + (x - spec.min) / (spec.max - spec.min) * pw;
    let sy = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let fx = spec.min + (spec.max - spec.min) * i as f64 / 5.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let (x, y) = (sx(fx), sy(fy));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{fx:.3}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.3}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        spec.axis
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">CHSH</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    let y2 = sy(2.0);
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{y2:.2}" x2="{:.2}" y2="{y2:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        left + pw
    );

    let per_curve = spec.steps;
    let labels: Vec<String> = match &spec.series {
        None => vec!["s*".to_string()],
        Some(s) => s
            .values
            .iter()
            .map(|v| format!("{}={}", s.axis, v))
            .collect(),
    };
    for (c, chunk) in rows.chunks(per_curve).enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        let pts: Vec<String> = chunk
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.axis_value), sy(r.s_star)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 15.0 + 18.0 * c as f64;
        let lx = left + pw + 15.0;
        let label = labels.get(c).map(String::as_str).unwrap_or("");
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

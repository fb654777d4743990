//! Figure presets and parameter sweeps.
//!
//! A sweep expands into independent points, each solved on the rayon pool.
//! Results are collected in expansion order, so the CSV is identical no
//! matter how many threads ran it.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use bcrelay_core::oracle::{exhaustive_allocate, timesharing_gap};
use bcrelay_core::{channel_gains, AllocError, NetworkConfig, SolverOptions, SolverReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ConfigOverrides;
use crate::schemes::{scheme_throughput, SchemeId, SchemeOutcome};

/// Column order of every CSV this tool writes.
pub const CSV_HEADER: [&str; 18] = [
    "preset",
    "series",
    "param",
    "value",
    "param2",
    "value2",
    "scheme",
    "status",
    "throughput_bits",
    "m",
    "n",
    "rho",
    "p0",
    "p1",
    "beta",
    "case",
    "iterations",
    "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig2Convergence,
    Fig3Alpha1,
    Fig4Gap,
    Fig5Schemes,
    Fig6Related,
    Fig7HapPosition,
    Fig8Subframes,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig2Convergence,
        Preset::Fig3Alpha1,
        Preset::Fig4Gap,
        Preset::Fig5Schemes,
        Preset::Fig6Related,
        Preset::Fig7HapPosition,
        Preset::Fig8Subframes,
        Preset::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig2Convergence => "fig2-convergence",
            Preset::Fig3Alpha1 => "fig3-alpha1",
            Preset::Fig4Gap => "fig4-gap",
            Preset::Fig5Schemes => "fig5-schemes",
            Preset::Fig6Related => "fig6-related",
            Preset::Fig7HapPosition => "fig7-hap-position",
            Preset::Fig8Subframes => "fig8-subframes",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

/// A swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            values,
        }
    }

    /// `start, start + step, ..., stop` with values rounded to 1e-9 so
    /// repeated addition does not leak into the CSV.
    pub fn range(name: &str, start: f64, stop: f64, step: f64) -> Self {
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|i| ((start + step * i as f64) * 1e9).round() / 1e9)
            .collect();
        Self::new(name, values)
    }

    fn validate(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            bail!("axis `{}` has a non-finite value", self.name);
        }
        if self.values.windows(2).any(|w| w[0] > w[1]) {
            bail!("axis `{}` is not sorted", self.name);
        }
        Ok(())
    }
}

/// Sweep description; presets fill in everything but `overrides`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub preset: Preset,
    #[serde(default)]
    pub axis: Option<Axis>,
    /// Second axis, used by the position heatmap.
    #[serde(default)]
    pub axis2: Option<Axis>,
    /// One series per value of `Pmax`; empty keeps the configured value.
    #[serde(default)]
    pub pmax_series: Vec<f64>,
    #[serde(default)]
    pub overrides: ConfigOverrides,
    #[serde(default)]
    pub schemes: Vec<SchemeId>,
    /// Also run the exhaustive oracle at every point.
    #[serde(default)]
    pub exhaustive: bool,
}

impl SweepSpec {
    pub fn preset(preset: Preset) -> Self {
        let alpha = || Some(Axis::range("alpha1", 2.5, 4.0, 0.1));
        let base = SweepSpec {
            preset,
            axis: None,
            axis2: None,
            pmax_series: vec![20.0, 30.0],
            overrides: ConfigOverrides::default(),
            schemes: vec![SchemeId::Proposed],
            exhaustive: false,
        };
        match preset {
            Preset::Fig2Convergence => SweepSpec {
                axis: Some(Axis::new("alpha1", vec![2.5])),
                ..base
            },
            Preset::Fig3Alpha1 => SweepSpec {
                axis: alpha(),
                exhaustive: true,
                ..base
            },
            Preset::Fig4Gap => SweepSpec {
                axis: Some(Axis::range("L", 20.0, 100.0, 10.0)),
                pmax_series: Vec::new(),
                ..base
            },
            Preset::Fig5Schemes => SweepSpec {
                axis: alpha(),
                pmax_series: vec![20.0],
                overrides: ConfigOverrides {
                    alpha2: Some(3.2),
                    coord_d: Some([50.0, 0.0]),
                    ..ConfigOverrides::default()
                },
                schemes: vec![
                    SchemeId::Proposed,
                    SchemeId::BcOnly,
                    SchemeId::RelayBcFixed,
                    SchemeId::OpportunisticRelayBc,
                ],
                ..base
            },
            Preset::Fig6Related => SweepSpec {
                axis: alpha(),
                schemes: vec![SchemeId::Proposed, SchemeId::RelatedContinuousUpper],
                ..base
            },
            Preset::Fig7HapPosition => SweepSpec {
                axis: Some(Axis::range("relay_x", 5.0, 45.0, 5.0)),
                axis2: Some(Axis::range("relay_y", 5.0, 30.0, 5.0)),
                ..base
            },
            Preset::Fig8Subframes => SweepSpec {
                axis: alpha(),
                ..base
            },
            Preset::Custom => SweepSpec {
                axis: Some(Axis::new("alpha1", Vec::new())),
                pmax_series: Vec::new(),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in self.axis.iter().chain(&self.axis2) {
            a.validate()?;
            let probe = set_param(&NetworkConfig::baseline(), &a.name, 1.0);
            probe.with_context(|| format!("axis `{}`", a.name))?;
        }
        if self.pmax_series.iter().any(|v| !v.is_finite()) {
            bail!("non-finite Pmax series value");
        }
        Ok(())
    }
}

/// Sets one named parameter; coordinates are addressed per component.
pub fn set_param(cfg: &NetworkConfig, name: &str, v: f64) -> Result<NetworkConfig> {
    let mut c = cfg.clone();
    match name {
        "alpha1" => c.alpha1 = v,
        "alpha2" => c.alpha2 = v,
        "alpha3" => c.alpha3 = v,
        "xi_sd" => c.xi_sd = v,
        "xi_sr" => c.xi_sr = v,
        "xi_rd" => c.xi_rd = v,
        "Ts" => c.ts = v,
        "W" => c.w = v,
        "eta" => c.eta = v,
        "Pc" => c.pc = v,
        "P" => c.p = v,
        "Pmax" => c.pmax = v,
        "L" => {
            if v < 0.0 || v.fract() != 0.0 {
                bail!("L must be a nonnegative integer, got {v}");
            }
            c.l = v as usize;
        }
        "source_x" => c.coord_s[0] = v,
        "source_y" => c.coord_s[1] = v,
        "relay_x" => c.coord_r[0] = v,
        "relay_y" => c.coord_r[1] = v,
        "dest_x" => c.coord_d[0] = v,
        "dest_y" => c.coord_d[1] = v,
        _ => bail!("unknown parameter `{name}`"),
    }
    Ok(c)
}

/// One CSV row. Empty optional fields are written as empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub preset: String,
    pub series: String,
    pub param: String,
    pub value: f64,
    pub param2: String,
    pub value2: Option<f64>,
    pub scheme: String,
    pub status: String,
    pub throughput_bits: Option<f64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub beta: Option<f64>,
    pub case: String,
    pub iterations: usize,
    pub note: String,
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_INFEASIBLE: &str = "infeasible";
pub const STATUS_TRACE: &str = "trace";

/// A row together with the configuration and report that produced it.
#[derive(Debug, Clone)]
pub struct Record {
    pub row: Row,
    pub cfg: NetworkConfig,
    pub report: Option<SolverReport>,
}

struct Point {
    series: String,
    param: String,
    value: f64,
    param2: String,
    value2: Option<f64>,
    cfg: Result<NetworkConfig, String>,
}

fn series_label(pmax: Option<f64>, extra: &str) -> String {
    let mut parts = Vec::new();
    if let Some(p) = pmax {
        parts.push(format!("pmax={p}"));
    }
    if !extra.is_empty() {
        parts.push(extra.to_string());
    }
    parts.join(" ")
}

fn expand(spec: &SweepSpec, base: &NetworkConfig) -> Vec<Point> {
    let base = spec.overrides.apply(base);
    let pmaxes: Vec<Option<f64>> = if spec.pmax_series.is_empty() {
        vec![None]
    } else {
        spec.pmax_series.iter().copied().map(Some).collect()
    };
    let Some(axis) = &spec.axis else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut push = |series: String, cfg: Result<NetworkConfig>, v: f64, v2: Option<f64>| {
        out.push(Point {
            series,
            param: axis.name.clone(),
            value: v,
            param2: spec.axis2.as_ref().map(|a| a.name.clone()).unwrap_or_default(),
            value2: v2,
            cfg: cfg.map_err(|e| format!("{e:#}")),
        });
    };
    match spec.preset {
        Preset::Fig4Gap => {
            for (a1, pmax) in FIG4_CONFIGS {
                let series = format!("alpha1={a1} pmax={pmax}");
                for &v in &axis.values {
                    let cfg = NetworkConfig {
                        alpha1: a1,
                        pmax,
                        ..base.clone()
                    };
                    push(series.clone(), set_param(&cfg, &axis.name, v), v, None);
                }
            }
        }
        Preset::Fig6Related => {
            for &pmax in &pmaxes {
                for l in FIG6_SUBFRAMES {
                    let series = series_label(pmax, &format!("L={l}"));
                    for &v in &axis.values {
                        let cfg = NetworkConfig {
                            l,
                            pmax: pmax.unwrap_or(base.pmax),
                            ..base.clone()
                        };
                        push(series.clone(), set_param(&cfg, &axis.name, v), v, None);
                    }
                }
            }
        }
        _ => {
            for &pmax in &pmaxes {
                let series = series_label(pmax, "");
                let cfg = NetworkConfig {
                    pmax: pmax.unwrap_or(base.pmax),
                    ..base.clone()
                };
                for &v in &axis.values {
                    let c1 = set_param(&cfg, &axis.name, v);
                    match &spec.axis2 {
                        None => push(series.clone(), c1, v, None),
                        Some(a2) => {
                            for &v2 in &a2.values {
                                let c2 = c1.as_ref().map_err(|e| anyhow::anyhow!("{e:#}"))
                                    .and_then(|c| set_param(c, &a2.name, v2));
                                push(series.clone(), c2, v, Some(v2));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Configurations of the time-sharing gap figure: `(alpha1, Pmax)`.
pub const FIG4_CONFIGS: [(f64, f64); 4] = [(3.9, 20.0), (4.0, 20.0), (2.6, 30.0), (2.9, 30.0)];
/// Subframe counts compared in the related-scheme figure.
pub const FIG6_SUBFRAMES: [usize; 2] = [20, 1000];

fn blank_row(spec: &SweepSpec, p: &Point, scheme: &str) -> Row {
    Row {
        preset: spec.preset.to_string(),
        series: p.series.clone(),
        param: p.param.clone(),
        value: p.value,
        param2: p.param2.clone(),
        value2: p.value2,
        scheme: scheme.to_string(),
        status: STATUS_OK.to_string(),
        throughput_bits: None,
        m: None,
        n: None,
        rho: None,
        p0: None,
        p1: None,
        beta: None,
        case: String::new(),
        iterations: 0,
        note: String::new(),
    }
}

fn infeasible(mut row: Row, err: &str) -> Row {
    row.status = STATUS_INFEASIBLE.to_string();
    row.note = err.to_string();
    row
}

fn outcome_row(mut row: Row, o: &SchemeOutcome) -> Row {
    row.throughput_bits = Some(o.throughput);
    if let Some(a) = &o.allocation {
        row.m = Some(a.m);
        row.n = Some(a.n);
    }
    row.rho = Some(o.rho);
    row.p0 = Some(o.p0);
    row.p1 = Some(o.p1);
    row.beta = Some(o.beta);
    row.case = o.case.clone();
    row.iterations = o.iterations;
    row.note = o.notes.join("; ");
    row
}

fn report_row(mut row: Row, r: &SolverReport, cfg: &NetworkConfig) -> Row {
    let a = &r.allocation;
    row.throughput_bits = Some(r.throughput);
    row.m = Some(a.m);
    row.n = Some(a.n);
    row.rho = Some(a.m as f64 / cfg.l as f64);
    row.p0 = Some(a.p0);
    row.p1 = Some(a.p1);
    row.beta = Some(a.beta);
    row.case = match r.rates.case_label {
        bcrelay_core::throughput::BoundCase::DestinationLimited => "destination-limited",
        bcrelay_core::throughput::BoundCase::RelayLimited => "relay-limited",
        bcrelay_core::throughput::BoundCase::Straddling => "straddling",
    }
    .to_string();
    row.iterations = r.sca_trace.len();
    row.note = r.notes.join("; ");
    row
}

fn solve_point(spec: &SweepSpec, p: &Point, opts: &SolverOptions) -> Vec<Record> {
    let cfg = match &p.cfg {
        Ok(c) => c.clone(),
        Err(e) => {
            return vec![Record {
                row: infeasible(blank_row(spec, p, "proposed"), e),
                cfg: NetworkConfig::baseline(),
                report: None,
            }]
        }
    };
    let rec = |row: Row, report: Option<SolverReport>| Record {
        row,
        cfg: cfg.clone(),
        report,
    };
    let chan = match cfg.validate().map_err(AllocError::from).and_then(|_| Ok(channel_gains(&cfg)?)) {
        Ok(c) => c,
        Err(e) => return vec![rec(infeasible(blank_row(spec, p, "proposed"), &e.to_string()), None)],
    };
    let mut out = Vec::new();
    match spec.preset {
        Preset::Fig2Convergence => match scheme_throughput(SchemeId::Proposed, &chan, &cfg, opts) {
            Ok(o) => {
                for (k, s) in o.report.as_ref().map(|r| r.sca_trace.as_slice()).unwrap_or(&[]).iter().enumerate() {
                    let mut row = blank_row(spec, p, "proposed");
                    row.status = STATUS_TRACE.to_string();
                    row.throughput_bits = Some(s.t);
                    row.rho = Some(s.rho);
                    row.p0 = Some(s.a / (1.0 - s.rho));
                    row.p1 = Some(s.b / (1.0 - s.rho));
                    row.iterations = k + 1;
                    out.push(rec(row, None));
                }
                let report = o.report.clone();
                out.push(rec(outcome_row(blank_row(spec, p, "proposed"), &o), report));
            }
            Err(e) => out.push(rec(infeasible(blank_row(spec, p, "proposed"), &e.to_string()), None)),
        },
        Preset::Fig4Gap => match timesharing_gap(&chan, &cfg, &[cfg.l], opts) {
            Ok(g) => {
                let g = g[0];
                for (scheme, v) in [("proposed", g.proposed), ("exhaustive", g.oracle), ("gap", g.gap)] {
                    let mut row = blank_row(spec, p, scheme);
                    row.throughput_bits = Some(v);
                    out.push(rec(row, None));
                }
            }
            Err(e) => out.push(rec(infeasible(blank_row(spec, p, "gap"), &e.to_string()), None)),
        },
        _ => {
            for &s in &spec.schemes {
                let row = blank_row(spec, p, s.as_str());
                match scheme_throughput(s, &chan, &cfg, opts) {
                    Ok(o) => {
                        let report = o.report.clone();
                        out.push(rec(outcome_row(row, &o), report));
                    }
                    Err(e) => out.push(rec(infeasible(row, &e.to_string()), None)),
                }
            }
            if spec.exhaustive {
                let row = blank_row(spec, p, "exhaustive");
                match exhaustive_allocate(&chan, &cfg, opts) {
                    Ok(r) => {
                        let row = report_row(row, &r.report, &cfg);
                        out.push(rec(row, Some(r.report)));
                    }
                    Err(e) => out.push(rec(infeasible(row, &e.to_string()), None)),
                }
            }
        }
    }
    out
}

/// Runs a sweep on the current rayon pool, keeping expansion order.
pub fn run_sweep_records(spec: &SweepSpec, base: &NetworkConfig, opts: &SolverOptions) -> Result<Vec<Record>> {
    spec.validate()?;
    let points = expand(spec, base);
    let nested: Vec<Vec<Record>> = points.par_iter().map(|p| solve_point(spec, p, opts)).collect();
    Ok(nested.into_iter().flatten().collect())
}

pub fn run_sweep(spec: &SweepSpec, base: &NetworkConfig, opts: &SolverOptions) -> Result<Vec<Row>> {
    Ok(run_sweep_records(spec, base, opts)?.into_iter().map(|r| r.row).collect())
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        bail!("unexpected CSV header: {}", header.join(","));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("CSV row {}", i + 2)))
        .collect()
}

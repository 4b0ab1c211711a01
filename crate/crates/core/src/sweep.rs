//! Single-point pipeline, parameter sweeps and tabular output.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::constants::{mhz, to_mhz};
use crate::error::{Error, Result};
use crate::linear::{
    build_full_drift, build_reduced_drift, is_stable, solve_lyapunov, CovarianceMatrix, DriftDiffusion,
    StabilityVerdict,
};
use crate::measures::{correlation_report, CorrelationReport};
use crate::model::{effective_couplings, EffectiveCouplings, PhysicalParams};
use crate::report::format_float;
use crate::scenario::Scenario;
use crate::semiclassical::{steady_state, Regime, SemiclassicalState};

pub const TOOL_NAME: &str = "combtangle";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Regime of directly specified effective couplings, mirroring the
/// classification of the mean-field steady state.
pub fn classify_couplings(eff: &EffectiveCouplings, params: &PhysicalParams) -> Regime {
    let (gp2, gq2) = (eff.g_p * eff.g_p, eff.g_q * eff.g_q);
    if gq2 * params.kappa_p <= gp2 * params.kappa_q {
        Regime::DivergentThreshold
    } else if eff.threshold_margin(params) > 0.0 {
        Regime::BelowThreshold
    } else {
        Regime::AboveThreshold
    }
}

/// Everything computed at one parameter point. Correlations are present only
/// for stable, below-threshold points.
#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub regime: Regime,
    pub couplings: Option<EffectiveCouplings>,
    pub stability: Option<StabilityVerdict>,
    pub report: Option<CorrelationReport>,
    pub covariance: Option<CovarianceMatrix>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl PointResult {
    pub fn stable(&self) -> bool {
        self.stability.is_some_and(|s| s.stable)
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Linearized dynamics at a point: the regime, the couplings and, below
/// threshold, the drift/diffusion pair.
pub fn linearize(
    params: &PhysicalParams,
    direct: Option<&EffectiveCouplings>,
) -> Result<(Regime, EffectiveCouplings, Option<DriftDiffusion>)> {
    params.validate()?;
    if let Some(eff) = direct {
        let regime = classify_couplings(eff, params);
        if !regime.is_trivial() {
            return Ok((regime, *eff, None));
        }
        return Ok((regime, *eff, Some(build_reduced_drift(eff, params)?)));
    }
    let d_k = params.detunings().k;
    if d_k == 0.0 {
        let state = steady_state(params)?;
        let eff = effective_couplings(params, state.mean_k);
        if !state.regime.is_trivial() {
            return Ok((state.regime, eff, None));
        }
        return Ok((state.regime, eff, Some(build_reduced_drift(&eff, params)?)));
    }
    // Off resonance the trivial state always exists; whether it is the
    // physical one is decided by the stability of its fluctuations.
    let mean_k = params.drive() / Complex64::new(params.kappa_k, d_k);
    let state = SemiclassicalState { mean_k, regime: Regime::BelowThreshold, ..SemiclassicalState::zero() };
    let dd = build_full_drift(params, &state)?;
    let regime = if is_stable(&dd).stable { Regime::BelowThreshold } else { Regime::AboveThreshold };
    Ok((regime, effective_couplings(params, mean_k), Some(dd)))
}

pub fn evaluate_point(params: &PhysicalParams, direct: Option<&EffectiveCouplings>) -> PointResult {
    let mut out = PointResult {
        regime: Regime::BelowThreshold,
        couplings: None,
        stability: None,
        report: None,
        covariance: None,
        warnings: Vec::new(),
        error: None,
    };
    let (regime, eff, dd) = match linearize(params, direct) {
        Ok(x) => x,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.regime = regime;
    out.couplings = Some(eff);
    let Some(dd) = dd else {
        out.warnings.push("above threshold: fluctuations are not linearized".into());
        return out;
    };
    let verdict = is_stable(&dd);
    out.stability = Some(verdict);
    if !verdict.stable {
        out.warnings.push(format!("unstable drift (abscissa {:.6e} rad/s)", verdict.abscissa));
        return out;
    }
    let solution = match solve_lyapunov(&dd) {
        Ok(s) => s,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.warnings.extend(solution.warnings.iter().cloned());
    match correlation_report(&solution.covariance, Some(&eff), true, solution.physical) {
        Ok(r) => out.report = Some(r),
        Err(e) => out.error = Some(e.to_string()),
    }
    out.covariance = Some(solution.covariance);
    out
}

pub fn evaluate_scenario(s: &Scenario) -> PointResult {
    evaluate_point(&s.params(), s.direct_couplings().as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    /// `G_q/G_p` at fixed `G_p` (bare `g_q/g_p` without direct couplings).
    #[serde(rename = "ratio_GqGp")]
    RatioGqGp,
    /// `κ_q/κ_p` at fixed `κ_p`.
    #[serde(rename = "kappa_ratio_qp")]
    KappaRatioQp,
    #[serde(rename = "kappa_r_mhz")]
    KappaRMhz,
    #[serde(rename = "kappa_q_mhz")]
    KappaQMhz,
    #[serde(rename = "G_p_mhz")]
    GpMhz,
    #[serde(rename = "temperature_k")]
    TemperatureK,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        SweepParam::RatioGqGp,
        SweepParam::KappaRatioQp,
        SweepParam::KappaRMhz,
        SweepParam::KappaQMhz,
        SweepParam::GpMhz,
        SweepParam::TemperatureK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::RatioGqGp => "ratio_GqGp",
            SweepParam::KappaRatioQp => "kappa_ratio_qp",
            SweepParam::KappaRMhz => "kappa_r_mhz",
            SweepParam::KappaQMhz => "kappa_q_mhz",
            SweepParam::GpMhz => "G_p_mhz",
            SweepParam::TemperatureK => "temperature_k",
        }
    }

    pub fn parse(s: &str) -> Option<SweepParam> {
        SweepParam::ALL.into_iter().find(|p| p.name() == s)
    }

    fn is_ratio(self) -> bool {
        matches!(self, SweepParam::RatioGqGp | SweepParam::KappaRatioQp)
    }

    /// Overwrites one parameter of a scenario. Ratios expand against the
    /// scenario's current anchor (`G_p` or `κ_p`).
    pub fn apply(self, s: &mut Scenario, value: f64) {
        match self {
            SweepParam::RatioGqGp => match s.coupling.G_p_mhz {
                Some(gp) => s.coupling.G_q_mhz = Some(value * gp),
                None => s.coupling.g_q_mhz = value * s.coupling.g_p_mhz,
            },
            SweepParam::KappaRatioQp => s.dissipation.kappa_q_mhz = value * s.dissipation.kappa_p_mhz,
            SweepParam::KappaRMhz => s.dissipation.kappa_r_mhz = value,
            SweepParam::KappaQMhz => s.dissipation.kappa_q_mhz = value,
            SweepParam::GpMhz => match s.coupling.G_p_mhz {
                Some(old) => {
                    // Keep the ratio when the anchor moves.
                    let ratio = s.coupling.G_q_mhz.unwrap_or(0.0) / old;
                    s.coupling.G_p_mhz = Some(value);
                    s.coupling.G_q_mhz = Some(if ratio.is_finite() { ratio * value } else { 0.0 });
                }
                None => {
                    s.coupling.G_p_mhz = Some(value);
                    s.coupling.G_q_mhz = Some(0.0);
                }
            },
            SweepParam::TemperatureK => s.bath.temperature_k = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn new(param: SweepParam, start: f64, stop: f64, points: usize) -> Self {
        SweepAxis { param, start, stop, points }
    }

    /// Parses `name:start:stop:points`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidSpec(format!("axis must look like name:start:stop:points, got {text:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let param = SweepParam::parse(parts[0])
            .ok_or_else(|| Error::InvalidSpec(format!("unknown sweep parameter {:?}", parts[0])))?;
        let start = parts[1].parse().map_err(|_| bad())?;
        let stop = parts[2].parse().map_err(|_| bad())?;
        let points = parts[3].parse().map_err(|_| bad())?;
        Ok(SweepAxis { param, start, stop, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.stop } else { self.start + step * k as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputGroup {
    Entanglement,
    SymplecticEigenvalue,
    Steering,
    Occupation,
    Bogoliubov,
}

impl OutputGroup {
    pub const ALL: [OutputGroup; 5] = [
        OutputGroup::Entanglement,
        OutputGroup::SymplecticEigenvalue,
        OutputGroup::Steering,
        OutputGroup::Occupation,
        OutputGroup::Bogoliubov,
    ];

    fn columns(self) -> &'static [&'static str] {
        match self {
            OutputGroup::Entanglement => &["E_rp", "E_rq", "E_pq"],
            OutputGroup::SymplecticEigenvalue => &["nu_rp", "nu_rq", "nu_pq"],
            OutputGroup::Steering => &["S_rp", "S_pr", "S_rq", "S_qr", "S_pq", "S_qp"],
            OutputGroup::Occupation => &["N_r", "N_p", "N_q"],
            OutputGroup::Bogoliubov => &["xi", "G_tilde_mhz", "n_beta1", "n_beta2"],
        }
    }

    fn values(self, r: &CorrelationReport) -> Vec<Option<f64>> {
        match self {
            OutputGroup::Entanglement => {
                let e = &r.log_negativity;
                vec![Some(e.rp), Some(e.rq), Some(e.pq)]
            }
            OutputGroup::SymplecticEigenvalue => vec![Some(r.nu.rp), Some(r.nu.rq), Some(r.nu.pq)],
            OutputGroup::Steering => {
                let s = &r.steering;
                [s.S_rp, s.S_pr, s.S_rq, s.S_qr, s.S_pq, s.S_qp].into_iter().map(Some).collect()
            }
            OutputGroup::Occupation => {
                let n = &r.occupation;
                vec![Some(n.r), Some(n.p), Some(n.q)]
            }
            OutputGroup::Bogoliubov => match &r.bogoliubov {
                Some(b) => vec![
                    Some(b.xi),
                    Some(to_mhz(b.G_tilde)),
                    Some(b.occupancy_beta1),
                    Some(b.occupancy_beta2),
                ],
                None => vec![None; 4],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub name: Option<String>,
    pub base: Scenario,
    pub axes: Vec<SweepAxis>,
    pub outputs: Vec<OutputGroup>,
}

impl SweepSpec {
    pub fn new(base: Scenario, axes: Vec<SweepAxis>) -> Self {
        SweepSpec { name: None, base, axes, outputs: OutputGroup::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSpec("a sweep needs one or two axes".into()));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::InvalidSpec("sweep axes must differ".into()));
        }
        for a in &self.axes {
            if !a.start.is_finite() || !a.stop.is_finite() {
                return Err(Error::InvalidSpec(format!("axis {} has a non-finite range", a.param)));
            }
            if a.points < 2 {
                return Err(Error::InvalidSpec(format!("axis {} needs at least two points", a.param)));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidSpec("no outputs requested".into()));
        }
        self.base.validate()
    }

    /// Scenarios in row order: the first axis varies slowest.
    pub fn points(&self) -> Vec<(Vec<f64>, Scenario)> {
        let grids: Vec<Vec<f64>> = self.axes.iter().map(SweepAxis::values).collect();
        let mut coords: Vec<Vec<f64>> = vec![vec![]];
        for g in &grids {
            coords = coords
                .into_iter()
                .flat_map(|c| g.iter().map(move |&v| [c.clone(), vec![v]].concat()))
                .collect();
        }
        coords
            .into_iter()
            .map(|c| {
                let mut s = self.base.clone();
                // Absolute values first so ratios expand against final anchors.
                for pass_ratio in [false, true] {
                    for (axis, &v) in self.axes.iter().zip(&c) {
                        if axis.param.is_ratio() == pass_ratio {
                            axis.param.apply(&mut s, v);
                        }
                    }
                }
                (c, s)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario_sha256: String,
    pub preset: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Null,
}

impl Cell {
    fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Null, Cell::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Null => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            // Through the same 12-digit rendering as the CSV, so both outputs agree.
            Cell::Num(x) if x.is_finite() => s.serialize_f64(format_float(*x).parse().expect("formatted float")),
            Cell::Num(_) | Cell::Null => s.serialize_none(),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

const PARAMETER_COLUMNS: [&str; 7] =
    ["ratio_GqGp", "G_p_mhz", "G_q_mhz", "kappa_r_mhz", "kappa_p_mhz", "kappa_q_mhz", "temperature_k"];
const STATUS_COLUMNS: [&str; 5] = ["stable", "physical", "regime", "abscissa_mhz", "error"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Points whose evaluation raised a numerical error.
    pub failures: usize,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx].clone()).collect())
    }

    /// Numeric column with nulls as `None`.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        Some(self.column(name)?.iter().map(Cell::as_f64).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep result serializes")
    }
}

fn parameter_cells(s: &Scenario) -> Vec<Cell> {
    let p = s.params();
    let (gp, gq, ratio) = match s.direct_couplings() {
        Some(e) => (Some(to_mhz(e.g_p)), Some(to_mhz(e.g_q)), e.g_q / e.g_p),
        None => (None, None, p.g_q / p.g_p),
    };
    vec![
        Cell::Num(ratio),
        Cell::opt(gp),
        Cell::opt(gq),
        Cell::Num(s.dissipation.kappa_r_mhz),
        Cell::Num(s.dissipation.kappa_p_mhz),
        Cell::Num(s.dissipation.kappa_q_mhz),
        Cell::Num(s.bath.temperature_k),
    ]
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.points();
    let results: Vec<PointResult> = points.par_iter().map(|(_, s)| evaluate_scenario(s)).collect();
    let provenance = Provenance {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        scenario_sha256: spec.base.hash(),
        preset: spec.name.clone(),
        seed: None,
    };
    Ok(tabulate(&spec.axes, &spec.outputs, &points, &results, provenance))
}

/// One-row table for a single evaluated scenario, in the sweep schema.
pub fn point_table(s: &Scenario, result: &PointResult, outputs: &[OutputGroup]) -> SweepResult {
    let provenance = Provenance {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        scenario_sha256: s.hash(),
        preset: None,
        seed: None,
    };
    tabulate(&[], outputs, &[(Vec::new(), s.clone())], std::slice::from_ref(result), provenance)
}

fn tabulate(
    axes: &[SweepAxis],
    outputs: &[OutputGroup],
    points: &[(Vec<f64>, Scenario)],
    results: &[PointResult],
    provenance: Provenance,
) -> SweepResult {
    let mut columns: Vec<String> = Vec::new();
    for a in axes {
        if !PARAMETER_COLUMNS.contains(&a.param.name()) {
            columns.push(a.param.name().to_string());
        }
    }
    columns.extend(PARAMETER_COLUMNS.iter().map(|c| c.to_string()));
    for g in outputs {
        columns.extend(g.columns().iter().map(|c| c.to_string()));
    }
    columns.extend(STATUS_COLUMNS.iter().map(|c| c.to_string()));

    let mut rows = Vec::with_capacity(points.len());
    for ((coords, s), r) in points.iter().zip(results) {
        let mut row = Vec::with_capacity(columns.len());
        for (a, &v) in axes.iter().zip(coords) {
            if !PARAMETER_COLUMNS.contains(&a.param.name()) {
                row.push(Cell::Num(v));
            }
        }
        row.extend(parameter_cells(s));
        for g in outputs {
            match &r.report {
                Some(rep) => row.extend(g.values(rep).into_iter().map(Cell::opt)),
                None => row.extend(g.columns().iter().map(|_| Cell::Null)),
            }
        }
        row.push(Cell::Bool(r.stable()));
        row.push(r.report.as_ref().map_or(Cell::Null, |rep| Cell::Bool(rep.physical)));
        row.push(Cell::Text(r.regime.tag().to_string()));
        row.push(r.stability.map_or(Cell::Null, |v| Cell::Num(v.abscissa / mhz(1.0))));
        row.push(r.error.clone().map_or(Cell::Null, Cell::Text));
        rows.push(row);
    }
    SweepResult {
        provenance,
        columns,
        failures: results.iter().filter(|r| r.failed()).count(),
        rows,
    }
}
